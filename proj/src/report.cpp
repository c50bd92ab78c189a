#include "landscape/report.hpp"

#include <cmath>
#include <cstdio>

namespace landscape {

namespace {

void write_number(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

void write(std::string& out, const Json& j, int indent, int level) {
  const auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, it.value(), indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += (flat && indent >= 0) ? ", " : ",";
        first = false;
        if (!flat) newline(level + 1);
        write(out, e, indent, level + 1);
      }
      if (!flat) newline(level);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

Json index_list(const std::vector<Index>& v) {
  Json a = Json::array();
  for (Index i : v) a.push_back(i);
  return a;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  return out;
}

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const OneHiddenParams& p) {
  return {{"W1", to_json(p.W1)}, {"b1", to_json(p.b1)}, {"W2", to_json(p.W2)}, {"b2", to_json(p.b2)}};
}

Json to_json(const ProbeReport& r) {
  Json j = {{"samples", r.samples},
            {"radius", r.radius},
            {"abs_radius", r.abs_radius},
            {"min_loss_found", r.min_loss_found},
            {"argmin_sample", r.argmin_sample},
            {"base_loss", r.base_loss},
            {"slack", r.slack},
            {"seed", r.seed},
            {"violation", nullptr}};
  if (r.violation)
    j["violation"] = {{"sample", r.violation->sample},
                      {"loss", r.violation->loss},
                      {"delta", to_json(r.violation->delta)}};
  return j;
}

Json to_json(const BoundarySet& b) {
  Json s = Json::array();
  for (double x : b.partial_sums) s.push_back(x);
  return {{"order", index_list(b.order)},
          {"partial_sums", s},
          {"indices", index_list(b.indices)},
          {"tol", b.tol},
          {"tol_dup", b.tol_dup}};
}

Json to_json(const Step1Certificate& c) {
  return {{"alpha", c.alpha},
          {"eta", c.eta},
          {"params", to_json(c.params)},
          {"least_squares_W", to_json(c.fit.W)},
          {"loss_at_min", c.loss_at_min},
          {"baseline_loss0", c.baseline_loss0},
          {"min_preactivation", c.min_preactivation},
          {"residual_orthogonality", c.residual_orthogonality},
          {"margin_limited_radius", c.margin_limited_radius},
          {"probe", to_json(c.probe)}};
}

Json to_json(const Step2Certificate& c) {
  Json j = {{"case", c.which == Step2Case::Case1 ? "Case1" : "Case2"},
            {"boundary_set", to_json(c.boundary)},
            {"permutation", index_list(c.permutation)},
            {"beta", c.beta},
            {"gamma", c.gamma},
            {"gamma_bound", c.gamma_bound},
            {"halvings", c.halvings},
            {"params", to_json(c.params)},
            {"loss_better", c.loss_better},
            {"baseline_loss0", c.baseline_loss0},
            {"margin", c.margin},
            {"sign_structure_ok", c.sign_structure_ok}};
  if (c.j0) j["j0"] = *c.j0;
  if (c.case2) {
    const Case2Details& d = *c.case2;
    j["case2"] = {{"y_star", d.y_star},
                  {"tied", index_list(d.tied)},
                  {"tied_nonzero", index_list(d.tied_nonzero)},
                  {"tied_ge", index_list(d.tied_ge)},
                  {"tied_lt", index_list(d.tied_lt)},
                  {"j1", d.j1},
                  {"j2", d.j2},
                  {"split_position", d.split_position},
                  {"v", to_json(d.v)},
                  {"g", d.g},
                  {"M", d.M},
                  {"alpha", d.alpha},
                  {"left_max", d.left_max},
                  {"right_min", d.right_min},
                  {"residual_split", d.residual_split},
                  {"residual_split_expected", d.residual_split_expected},
                  {"fit_diagnostics_ok", d.fit_diagnostics_ok}};
  }
  return j;
}

Json to_json(const SpuriousCertificate& c) {
  return {{"step1", to_json(c.step1)}, {"step2", to_json(c.step2)}, {"gap", c.gap}};
}

Json to_json(const WitnessTuple& w) {
  Json j = {{"activation", w.activation},
            {"taylor_bound_certified", w.taylor_bound_certified},
            {"part1", nullptr},
            {"part2", nullptr}};
  if (w.part1) j["part1"] = {w.part1->v1, w.part1->v2, w.part1->v3, w.part1->v4};
  if (w.part2) j["part2"] = {w.part2->v1, w.part2->v2, w.part2->u1, w.part2->u2};
  return j;
}

Json to_json(const Part1Check& c) {
  return {{"c1_ok", c.c1_ok}, {"c2_ok", c.c2_ok}, {"c1_residual", c.c1_residual},
          {"c2_gap", c.c2_gap}, {"tol", c.tol}};
}

Json to_json(const QuadFormCertificate& q) {
  return {{"alpha1_lead", q.alpha1_lead}, {"alpha2_lead", q.alpha2_lead},
          {"alpha3_lead", q.alpha3_lead}, {"psd_ok", q.psd_ok},
          {"margin", q.margin},           {"c6_ok", q.c6_ok},
          {"c7_ok", q.c7_ok}};
}

Json to_json(const GlobalMinResult& g) {
  return {{"params", to_json(g.params)}, {"loss", g.loss}};
}

Json to_json(const SpuriousMinResult& s) {
  Json j = {{"params", to_json(s.params)},
            {"loss", s.loss},
            {"output", to_json(s.output)},
            {"probe", to_json(s.probe)},
            {"taylor_bound_certified", s.taylor_bound_certified},
            {"quadratic_form", nullptr}};
  if (s.certificate) j["quadratic_form"] = to_json(*s.certificate);
  return j;
}

Json to_json(const LinearChain& chain) {
  Json dims = Json::array();
  for (Index d : chain.dims()) dims.push_back(d);
  Json w = Json::array();
  for (const Matrix& m : chain.weights()) w.push_back(to_json(m));
  return {{"dims", dims}, {"weights", w}};
}

Json to_json(const EscapePair& e) {
  return {{"ascent", to_json(e.ascent)},
          {"descent", to_json(e.descent)},
          {"loss_base", e.loss_base},
          {"loss_ascent", e.loss_ascent},
          {"loss_descent", e.loss_descent},
          {"epsilon", e.epsilon},
          {"gamma", e.gamma},
          {"eta", e.eta},
          {"construction_case", e.construction_case},
          {"j_star", e.j_star},
          {"transposed", e.transposed},
          {"inner_product", e.inner_product},
          {"max_distance_ascent", e.max_distance_ascent},
          {"max_distance_descent", e.max_distance_descent}};
}

Json to_json(const Classification& c) {
  Json j = {{"verdict", std::string(to_string(c.verdict))},
            {"grad_norm", c.grad_norm},
            {"max_partial_norm", c.max_partial_norm},
            {"j_star", nullptr},
            {"escape", nullptr}};
  if (c.j_star) j["j_star"] = *c.j_star;
  if (c.escape) j["escape"] = to_json(*c.escape);
  return j;
}

}  // namespace landscape
