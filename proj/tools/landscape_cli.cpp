// landscape: build and certify loss-landscape constructions from the command line.
#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "landscape/commands.hpp"
#include "landscape/error.hpp"

using namespace landscape;

namespace {

void add_data_flags(CLI::App* cmd, DataSource& src) {
  cmd->add_option("--data", src.data_path, "CSV matrix X (d_x rows, m columns)");
  cmd->add_option("--labels", src.labels_path, "CSV matrix Y (d_y rows, m columns)");
  cmd->add_option("--bundle", src.bundle_path, "JSON file {\"X\": [[...]], \"Y\": [[...]]}");
}

int emit(Json report, double ms, const std::string& out_path) {
  report["timing_ms"] = ms;
  const std::string text = dump_json(report) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "landscape: cannot write '" << out_path << "'\n";
    return exit_code_for(ErrorCode::IoError);
  }
  f << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construct and certify spurious minima and saddle escapes"};
  app.require_subcommand(1);
  std::string out_path;
  std::uint64_t seed = 42;
  app.add_option("--out", out_path, "write the JSON report here instead of stdout");
  app.add_option("--seed", seed, "random seed for probes")->capture_default_str();

  SpuriousArgs sp;
  auto* spurious = app.add_subcommand("spurious", "local minimum and better point for a ReLU-like net");
  add_data_flags(spurious, sp.source);
  spurious->add_option("--splus", sp.s_plus, "positive-side slope")->capture_default_str();
  spurious->add_option("--sminus", sp.s_minus, "negative-side slope")->capture_default_str();
  spurious->add_option("--alpha", sp.alpha, "scale of the local minimum")->capture_default_str();
  spurious->add_option("--hidden", sp.hidden_width, "hidden width (>= 2)")->capture_default_str();
  spurious->add_option("--probe-radius", sp.probe_radius, "relative probe radius");
  spurious->add_option("--probe-samples", sp.probe_samples)->capture_default_str();

  CounterexampleArgs ce;
  double elu_alpha = 0.0, elu_lambda = 0.0;
  auto* counter = app.add_subcommand("counterexample", "fixed-dataset counterexample for an activation");
  counter->add_option("--activation", ce.activation,
                      "sigmoid|tanh|arctan|quadratic|elu|selu|relu|relu-like")->required();
  auto* ea = counter->add_option("--elu-alpha", elu_alpha);
  auto* el = counter->add_option("--elu-lambda", elu_lambda);
  counter->add_option("--splus", ce.params.s_plus)->capture_default_str();
  counter->add_option("--sminus", ce.params.s_minus)->capture_default_str();
  counter->add_option("--probe-radius", ce.probe_radius)->capture_default_str();
  counter->add_option("--probe-samples", ce.probe_samples)->capture_default_str();

  ClassifyArgs cl;
  auto* classify = app.add_subcommand("classify", "classify a critical point of a deep linear net");
  classify->add_option("--chain", cl.chain_path, "JSON {\"dims\": [...], \"weights\": [...]}")->required();
  add_data_flags(classify, cl.source);
  classify->add_option("--epsilon", cl.epsilon, "perturbation radius")->capture_default_str();
  classify->add_option("--tol", cl.tol, "criticality tolerance")->capture_default_str();

  std::string level = "fast";
  auto* selftest = app.add_subcommand("selftest", "run the built-in certification suites");
  selftest->add_option("--level", level, "fast|full")->capture_default_str();

  for (auto* sub : {spurious, counter, classify, selftest}) {
    sub->add_option("--out", out_path, "write the JSON report here instead of stdout");
    sub->add_option("--seed", seed, "random seed for probes");
  }

  std::string command = "landscape";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cout << dump_json(error_report(command, ErrorCode::ParseError, e.what(), seed)) << "\n";
    return exit_code_for(ErrorCode::ParseError);
  }

  if (*ea) ce.params.elu_alpha = elu_alpha;
  if (*el) ce.params.elu_lambda = elu_lambda;
  sp.seed = ce.seed = cl.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    CommandResult r;
    if (spurious->parsed()) {
      command = "spurious";
      r = cmd_spurious(sp);
    } else if (counter->parsed()) {
      command = "counterexample";
      r = cmd_counterexample(ce);
    } else if (classify->parsed()) {
      command = "classify";
      r = cmd_classify(cl);
    } else {
      command = "selftest";
      r = cmd_selftest(level, seed);
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const int io = emit(std::move(r.report), ms, out_path);
    return io != 0 ? io : r.exit_code;
  } catch (const Error& e) {
    std::cerr << "landscape " << command << ": " << to_string(e.code()) << ": " << e.what() << "\n";
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit(error_report(command, e.code(), e.what(), seed), ms, out_path);
    return exit_code_for(e.code());
  }
}
