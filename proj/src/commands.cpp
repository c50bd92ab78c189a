#include "landscape/commands.hpp"

#include <cmath>

#include "landscape/counterexample.hpp"
#include "landscape/error.hpp"
#include "landscape/io.hpp"
#include "landscape/selftest.hpp"

namespace landscape {

namespace {

Json base_report(const std::string& command, std::uint64_t seed) {
  return {{"schema_version", kReportSchemaVersion},
          {"command", command},
          {"inputs", Json::object()},
          {"certificates", Json::object()},
          {"verdicts", Json::object()},
          {"seed", seed},
          {"status", "ok"}};
}

void add_input(Json& inputs, const std::string& role, const std::string& path) {
  inputs[role] = {{"path", path}, {"sha256", sha256_hex(read_file(path))}};
}

}  // namespace

Dataset load_dataset(const DataSource& s, Json& inputs) {
  if (!s.bundle_path.empty()) {
    if (!s.data_path.empty() || !s.labels_path.empty())
      throw Error(ErrorCode::ParseError, "use either --bundle or --data/--labels, not both");
    add_input(inputs, "bundle", s.bundle_path);
    return read_bundle(s.bundle_path);
  }
  if (s.data_path.empty() || s.labels_path.empty())
    throw Error(ErrorCode::ParseError, "dataset needs --data and --labels, or --bundle");
  add_input(inputs, "data", s.data_path);
  add_input(inputs, "labels", s.labels_path);
  return Dataset::make(read_csv_matrix(s.data_path), read_csv_matrix(s.labels_path));
}

Json error_report(const std::string& command, ErrorCode code, const std::string& message,
                  std::uint64_t seed) {
  Json r = base_report(command, seed);
  r["status"] = "error";
  r["error"] = {{"code", std::string(to_string(code))},
                {"message", message},
                {"exit_code", exit_code_for(code)}};
  return r;
}

CommandResult cmd_spurious(const SpuriousArgs& a) {
  CommandResult out{base_report("spurious", a.seed), 0};
  const Dataset data = load_dataset(a.source, out.report["inputs"]);
  const Activation act = Activation::relu_like(a.s_plus, a.s_minus);
  Step1Options opt;
  opt.hidden_width = a.hidden_width;
  opt.probe_radius = a.probe_radius;
  opt.probe_samples = a.probe_samples;
  opt.seed = a.seed;
  const SpuriousCertificate cert = certify_spurious(data, act, a.alpha, opt);
  out.report["certificates"] = to_json(cert);
  out.report["activation"] = {{"name", act.name()}, {"s_plus", a.s_plus}, {"s_minus", a.s_minus}};
  const bool probe_ok = !cert.step1.probe.violation.has_value();
  out.report["verdicts"] = {{"local_min_probe_clean", probe_ok},
                            {"step2_case", cert.step2.which == Step2Case::Case1 ? "Case1" : "Case2"},
                            {"gap", cert.gap},
                            {"spurious", probe_ok && cert.gap > 0.0}};
  if (!probe_ok) {
    out.report["status"] = "certification_failed";
    out.exit_code = exit_code_for(ErrorCode::CertificateFailed);
  }
  return out;
}

CommandResult cmd_counterexample(const CounterexampleArgs& a) {
  CommandResult out{base_report("counterexample", a.seed), 0};
  const Activation act = Activation::by_name(a.activation, a.params);
  ProbeOptions po;
  po.radius = a.probe_radius;
  po.samples = a.probe_samples;
  po.seed = a.seed;
  out.report["activation"] = {{"name", act.name()}};
  GlobalMinResult global;
  SpuriousMinResult spurious;
  Json certs;
  if (act.is_piecewise_linear()) {
    out.report["activation"]["s_plus"] = act.s_plus();
    out.report["activation"]["s_minus"] = act.s_minus();
    ReluLikeCounterexample r = relu_like_counterexample(act.s_plus(), act.s_minus(), po);
    global = r.global;
    spurious = r.spurious;
    certs["witness"] = to_json(gallery(act));
  } else {
    if (act.kind() == ActivationKind::Elu || act.kind() == ActivationKind::Selu) {
      out.report["activation"]["alpha"] = act.elu_alpha();
      out.report["activation"]["lambda"] = act.elu_lambda();
    }
    const WitnessTuple w = gallery(act);
    certs["witness"] = to_json(w);
    certs["part1_check"] = to_json(check_part1(act, *w.part1));
    global = build_global_min(act, *w.part1);
    spurious = build_spurious_min(act, *w.part2, po);
  }
  certs["global"] = to_json(global);
  certs["spurious"] = to_json(spurious);
  out.report["certificates"] = certs;
  const double dev = (spurious.output.array() - 1.0 / 3.0).abs().maxCoeff();
  const bool global_ok = global.loss <= 1e-12;
  const bool spurious_ok = std::abs(spurious.loss - 1.0 / 3.0) <= 1e-12 && dev <= 1e-12;
  const bool probe_ok = !spurious.probe.violation.has_value();
  out.report["verdicts"] = {{"global_loss", global.loss},
                            {"spurious_loss", spurious.loss},
                            {"global_ok", global_ok},
                            {"spurious_ok", spurious_ok},
                            {"probe_clean", probe_ok},
                            {"spurious_gap", spurious.loss - global.loss}};
  if (!(global_ok && spurious_ok && probe_ok)) {
    out.report["status"] = "certification_failed";
    out.exit_code = exit_code_for(ErrorCode::CertificateFailed);
  }
  return out;
}

CommandResult cmd_classify(const ClassifyArgs& a) {
  CommandResult out{base_report("classify", a.seed), 0};
  if (a.chain_path.empty()) throw Error(ErrorCode::ParseError, "classify needs --chain");
  add_input(out.report["inputs"], "chain", a.chain_path);
  const LinearChain chain = read_chain(a.chain_path);
  const Dataset data = load_dataset(a.source, out.report["inputs"]);
  if (data.d_x() != chain.d_x() || data.d_y() != chain.d_y())
    throw Error(ErrorCode::ShapeMismatch, "chain dimensions do not match the dataset");
  const L0Oracle oracle = squared_loss_oracle(data.X, data.Y);
  const std::vector<Matrix> partials = partial_grads(chain, oracle);
  Json norms = Json::array();
  for (const Matrix& g : partials) norms.push_back(g.norm());
  out.report["certificates"]["partial_grad_norms"] = norms;
  out.report["certificates"]["loss"] = chain_loss(chain, oracle);
  out.report["certificates"]["oracle_scale"] = oracle.scale;
  try {
    const Classification c = classify_critical(chain, oracle, a.epsilon, a.tol);
    out.report["verdicts"] = to_json(c);
  } catch (const Error& e) {
    // Keep the gradient norms in the failure report.
    Json r = error_report("classify", e.code(), e.what(), a.seed);
    r["inputs"] = out.report["inputs"];
    r["certificates"] = out.report["certificates"];
    return {r, exit_code_for(e.code())};
  }
  return out;
}

CommandResult cmd_selftest(const std::string& level, std::uint64_t seed) {
  SelftestLevel lv;
  if (level == "fast") {
    lv = SelftestLevel::Fast;
  } else if (level == "full") {
    lv = SelftestLevel::Full;
  } else {
    throw Error(ErrorCode::ParseError, "unknown selftest level '" + level + "' (fast|full)");
  }
  CommandResult out{base_report("selftest", seed), 0};
  out.report["level"] = level;
  Json list = Json::array();
  bool all = true;
  for (const CriterionResult& r : run_selftest(lv)) {
    list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed},
                    {"summary", r.summary}, {"details", r.details}});
    all = all && r.passed;
  }
  out.report["verdicts"] = {{"checks", list}, {"all_passed", all}};
  if (!all) {
    out.report["status"] = "certification_failed";
    out.exit_code = exit_code_for(ErrorCode::CertificateFailed);
  }
  return out;
}

}  // namespace landscape
