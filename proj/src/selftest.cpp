#include "landscape/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "landscape/counterexample.hpp"
#include "landscape/deeplinear.hpp"
#include "landscape/error.hpp"
#include "landscape/relu_spurious.hpp"

namespace landscape {

namespace {

constexpr double kThird = 1.0 / 3.0;

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Matrix gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix M(r, c);
  for (Index i = 0; i < M.size(); ++i) M.data()[i] = n(rng);
  return M;
}

Index uniform_int(Index lo, Index hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

struct CatalogEntry {
  std::string label;
  Activation act;
};

std::vector<CatalogEntry> catalog() {
  return {{"sigmoid", Activation::sigmoid()},
          {"tanh", Activation::tanh()},
          {"arctan", Activation::arctan()},
          {"quadratic", Activation::quadratic()},
          {"elu", Activation::elu()},
          {"selu", Activation::selu()},
          {"relu-like(1.5,1)", Activation::relu_like(1.5, 1.0)},
          {"relu-like(1,0)", Activation::relu_like(1.0, 0.0)}};
}

// Global and spurious points for one catalog entry.
std::pair<GlobalMinResult, SpuriousMinResult> build_pair(const Activation& act,
                                                         const ProbeOptions& po) {
  if (act.is_piecewise_linear()) {
    ReluLikeCounterexample r = relu_like_counterexample(act.s_plus(), act.s_minus(), po);
    return {r.global, r.spurious};
  }
  const WitnessTuple w = gallery(act);
  return {build_global_min(act, *w.part1), build_spurious_min(act, *w.part2, po)};
}

std::vector<Index> random_dims(Index H, std::mt19937_64& rng) {
  std::vector<Index> d(H + 2);
  d.front() = uniform_int(1, 4, rng);
  d.back() = uniform_int(1, 4, rng);
  const Index lo = std::min(d.front(), d.back());
  for (Index j = 1; j <= H; ++j) d[j] = uniform_int(lo, 4, rng);
  return d;
}

LinearChain random_chain(const std::vector<Index>& d, std::mt19937_64& rng) {
  std::vector<Matrix> w;
  for (std::size_t j = 1; j < d.size(); ++j) w.push_back(gaussian(d[j], d[j - 1], rng));
  return LinearChain(std::move(w));
}

double rel_err(double num, double a, double b) {
  return num / std::max({a, b, 1e-12});
}

}  // namespace

CriterionResult check_counterexample_gallery() {
  CriterionResult r{1, "counterexample reproduction", true, "", Json::array()};
  ProbeOptions po;
  po.samples = 1;
  double worst_global = 0.0, worst_spurious = 0.0, worst_forward = 0.0;
  for (const CatalogEntry& e : catalog()) {
    Json d = {{"activation", e.label}};
    try {
      const auto [g, s] = build_pair(e.act, po);
      const double fwd = (s.output.array() - kThird).abs().maxCoeff();
      const bool ok = g.loss <= 1e-12 && std::abs(s.loss - kThird) <= 1e-12 && fwd <= 1e-12;
      d.update({{"global_loss", g.loss}, {"spurious_loss", s.loss}, {"forward_dev", fwd},
                {"passed", ok}});
      worst_global = std::max(worst_global, g.loss);
      worst_spurious = std::max(worst_spurious, std::abs(s.loss - kThird));
      worst_forward = std::max(worst_forward, fwd);
      r.passed = r.passed && ok;
    } catch (const Error& ex) {
      d.update({{"error", std::string(to_string(ex.code()))}, {"passed", false}});
      r.passed = false;
    }
    r.details.push_back(d);
  }
  r.summary = "8 activations; max global loss " + fmt("%.3g", worst_global) +
              ", max |spurious-1/3| " + fmt("%.3g", worst_spurious) + ", max forward dev " +
              fmt("%.3g", worst_forward);
  return r;
}

CriterionResult check_spurious_locality(std::size_t samples) {
  CriterionResult r{2, "spurious-point locality", true, "", Json::array()};
  ProbeOptions po;
  po.radius = 1e-4;
  po.samples = samples;
  po.seed = 42;
  double worst = INFINITY;
  for (const CatalogEntry& e : catalog()) {
    Json d = {{"activation", e.label}};
    try {
      const SpuriousMinResult s = build_pair(e.act, po).second;
      const bool ok = s.probe.min_loss_found >= kThird - 1e-12;
      worst = std::min(worst, s.probe.min_loss_found - kThird);
      d.update({{"min_loss_found", s.probe.min_loss_found}, {"passed", ok}});
      r.passed = r.passed && ok;
    } catch (const Error& ex) {
      d.update({{"error", std::string(to_string(ex.code()))}, {"passed", false}});
      r.passed = false;
    }
    r.details.push_back(d);
  }
  r.summary = std::to_string(samples) + " samples at radius 1e-4; min(found - 1/3) = " +
              fmt("%.3g", worst);
  return r;
}

CriterionResult check_spurious_random(int datasets) {
  CriterionResult r{3, "spurious minima on random datasets", true, "", Json::object()};
  const Activation act = Activation::relu_like(1.5, 1.0);
  int successes = 0, skipped = 0, attempts = 0;
  double worst_match = 0.0, min_gap = INFINITY;
  Json failures = Json::array();
  std::mt19937_64 rng(20240);
  while (attempts < datasets) {
    Dataset data = Dataset::make(gaussian(3, 20, rng), gaussian(1, 20, rng));
    if (is_linearly_fittable(data)) {
      ++skipped;
      continue;
    }
    ++attempts;
    try {
      Step1Options opt;
      opt.seed = 1000 + static_cast<std::uint64_t>(attempts);
      opt.probe_radius = std::nullopt;
      const Step1Certificate s1 = construct_local_min(data, act, 1.0, opt);
      // Probe exactly at the margin-limited radius.
      ProbeOptions po;
      po.radius = s1.margin_limited_radius;
      po.samples = 4096;
      po.seed = opt.seed;
      const ProbeReport probe = probe_local_min(s1.params, act, data, po);
      const Step2Certificate s2 = construct_better_point(data, act);
      const double match = std::abs(s1.loss_at_min - s1.baseline_loss0);
      const double gap = s1.loss_at_min - s2.loss_better;
      const bool ok = match <= 1e-10 && !probe.violation && s2.loss_better < s2.baseline_loss0 &&
                      gap > 0.0 && s2.sign_structure_ok;
      worst_match = std::max(worst_match, match);
      min_gap = std::min(min_gap, gap);
      if (ok) {
        ++successes;
      } else {
        failures.push_back({{"dataset", attempts}, {"match", match}, {"gap", gap},
                            {"probe_violation", probe.violation.has_value()}});
      }
    } catch (const Error& ex) {
      failures.push_back({{"dataset", attempts}, {"error", std::string(to_string(ex.code()))}});
    }
  }
  r.passed = successes == datasets;
  r.details = {{"successes", successes}, {"datasets", datasets}, {"skipped_fittable", skipped},
               {"worst_loss_match", worst_match}, {"min_gap", min_gap}, {"failures", failures}};
  r.summary = std::to_string(successes) + "/" + std::to_string(datasets) +
              " datasets; worst |loss-loss0| " + fmt("%.3g", worst_match) + ", min gap " +
              fmt("%.3g", min_gap);
  return r;
}

CriterionResult check_case2_route() {
  CriterionResult r{4, "Case-2 route on the fixed dataset", false, "", Json::object()};
  try {
    const Step2Certificate c =
        construct_better_point(fixed_dataset(), Activation::relu_like(1.5, 1.0));
    const bool case2 = c.which == Step2Case::Case2 && c.case2.has_value();
    bool ok = case2 && c.loss_better < kThird && c.margin > 1e-10 && c.sign_structure_ok;
    if (case2) {
      const Case2Details& d = *c.case2;
      ok = ok && d.fit_diagnostics_ok && d.left_max < 0.0 && d.right_min > 0.0 &&
           std::abs(d.residual_split - d.residual_split_expected) <= 1e-9 &&
           std::abs(d.residual_split_expected) > 1e-9;
    }
    r.passed = ok;
    r.details = {{"case2", case2}, {"loss_better", c.loss_better}, {"margin", c.margin}};
    r.summary = "loss_better " + fmt("%.17g", c.loss_better) + ", margin " + fmt("%.3g", c.margin);
  } catch (const Error& ex) {
    r.details = {{"error", std::string(to_string(ex.code()))}};
    r.summary = std::string("error ") + std::string(to_string(ex.code()));
  }
  return r;
}

CriterionResult check_deep_linear_saddles(int instances) {
  CriterionResult r{5, "deep linear saddles", true, "", Json::object()};
  std::mt19937_64 rng(5150);
  const double eps = 0.1;
  int saddles = 0, globals = 0;
  double min_margin_ratio = INFINITY;
  Json failures = Json::array();
  for (int k = 0; k < instances; ++k) {
    const Index H = uniform_int(1, 3, rng);
    const std::vector<Index> dims = random_dims(H, rng);
    const Index m = 6;
    const Matrix X = gaussian(dims.front(), m, rng);
    const Matrix Y = gaussian(dims.back(), m, rng);
    const L0Oracle oracle = squared_loss_oracle(X, Y);
    try {
      const LinearChain zero = LinearChain::zeros(dims);
      const bool crit = is_critical(zero, oracle);
      const Classification c = classify_critical(zero, oracle, eps);
      bool ok = crit && c.verdict == Verdict::Saddle && c.escape.has_value();
      if (ok) {
        const EscapePair& e = *c.escape;
        const double scale = oracle.scale;
        const double m1 = e.loss_ascent - e.loss_base, m2 = e.loss_base - e.loss_descent;
        min_margin_ratio = std::min(min_margin_ratio, std::min(m1, m2) / scale);
        ok = m1 > 1e-12 * scale && m2 > 1e-12 * scale &&
             e.max_distance_ascent <= eps * (1.0 + 1e-12) &&
             e.max_distance_descent <= eps * (1.0 + 1e-12);
      }
      if (ok) ++saddles;

      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X.transpose());
      const Matrix R = cod.solve(Y.transpose()).transpose();
      const Classification g = classify_critical(embed_product(R, dims), oracle, eps);
      const bool gok = g.verdict == Verdict::GlobalMin;
      if (gok) ++globals;
      if (!ok || !gok) failures.push_back({{"instance", k}, {"saddle_ok", ok}, {"global_ok", gok}});
    } catch (const Error& ex) {
      failures.push_back({{"instance", k}, {"error", std::string(to_string(ex.code()))},
                          {"message", ex.what()}});
    }
  }
  r.passed = saddles == instances && globals == instances;
  r.details = {{"saddles", saddles}, {"global_mins", globals}, {"instances", instances},
               {"min_margin_over_scale", min_margin_ratio}, {"failures", failures}};
  r.summary = std::to_string(saddles) + "/" + std::to_string(instances) + " saddles, " +
              std::to_string(globals) + "/" + std::to_string(instances) +
              " global mins; min margin/scale " + fmt("%.3g", min_margin_ratio);
  return r;
}

CriterionResult check_decompose_near(int instances) {
  CriterionResult r{6, "near-product decomposition", true, "", Json::object()};
  std::mt19937_64 rng(6060);
  const double eps = 0.1;
  int ok_count = 0, failed = 0, draws = 0;
  double worst_product = 0.0, worst_factor = 0.0;
  while (ok_count + failed < instances && draws < 100 * instances) {
    ++draws;
    const Index H = uniform_int(1, 3, rng);
    const LinearChain chain = random_chain(random_dims(H, rng), rng);
    const std::optional<Index> js = find_j_star(chain);
    if (!js) continue;
    const Matrix A = chain_product(chain, H + 1, *js + 1);
    const Matrix B = chain_product(chain, *js - 1, 1);
    const double radius = smallest_singular_value(A) * smallest_singular_value(B) * eps;
    Matrix dir = gaussian(chain.d_y(), chain.d_x(), rng);
    dir *= 0.5 * radius / dir.norm();
    const Matrix R = end_to_end(chain) + dir;
    try {
      const LinearChain V = decompose_near(chain, R, *js, eps);
      const double scale = 1.0 + R.norm();
      const double perr = (end_to_end(V) - R).norm();
      const double ferr = V.max_factor_distance(chain);
      worst_product = std::max(worst_product, perr / scale);
      worst_factor = std::max(worst_factor, ferr);
      if (perr <= 1e-10 * scale && ferr <= eps * (1.0 + 1e-12)) {
        ++ok_count;
      } else {
        ++failed;
      }
    } catch (const Error&) {
      ++failed;
    }
  }
  r.passed = ok_count == instances;
  r.details["passed_instances"] = ok_count;
  r.details["failed"] = failed;
  r.details["draws"] = draws;
  r.details["worst_product_error_over_scale"] = worst_product;
  r.details["worst_factor_distance"] = worst_factor;
  r.summary = std::to_string(ok_count) + "/" + std::to_string(instances) +
              " pairs; worst product err/scale " + fmt("%.3g", worst_product) +
              ", worst factor move " + fmt("%.3g", worst_factor);
  return r;
}

CriterionResult check_polynomial_identities(int samples) {
  CriterionResult r{7, "polynomial identities", true, "", Json::object()};
  std::mt19937_64 rng(7070);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst3 = 0.0, worst4 = 0.0;
  for (int n = 2; n <= 8; ++n) {
    for (int s = 0; s < samples; ++s) {
      const double a = u(rng), b = u(rng);
      const double lhs = std::pow(a, n) + std::pow(b, n) - 2.0 * std::pow(0.5 * (a + b), n);
      const double res = std::abs(lhs - (a - b) * (a - b) * eval_p(n, a, b));
      const double scale = std::pow(1.0 + std::max(std::abs(a), std::abs(b)), n);
      worst3 = std::max(worst3, res / scale);
    }
  }
  for (int n1 = 1; n1 <= 5; ++n1) {
    for (int n2 = 1; n2 <= 5; ++n2) {
      for (int s = 0; s < samples; ++s) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const double lhs = std::pow(a, n1) * std::pow(c, n2) + std::pow(b, n1) * std::pow(d, n2) -
                           2.0 * std::pow(0.5 * (a + b), n1) * std::pow(0.5 * (c + d), n2);
        const double rhs = (a - b) * (a - b) * eval_q(n1, n2, a, b, d) +
                           (c - d) * (c - d) * eval_q(n2, n1, c, d, b) +
                           (a - b) * (c - d) * eval_r(n1, n2, a, b, c, d);
        const double m = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
        worst4 = std::max(worst4, std::abs(lhs - rhs) / std::pow(1.0 + m, n1 + n2));
      }
    }
  }
  const bool exact = eval_p(2, 0.3, -1.7) == 0.5 && eval_q(1, 1, 0.3, -1.7, 2.1) == 0.0 &&
                     eval_r(1, 1, 0.3, -1.7, 2.1, 0.9) == 0.5;
  r.passed = worst3 <= 1e-9 && worst4 <= 1e-9 && exact;
  r.details = {{"worst_a3_over_scale", worst3}, {"worst_a4_over_scale", worst4},
               {"exact_values", exact}, {"samples", samples}};
  r.summary = "worst residual/scale " + fmt("%.3g", worst3) + " (p), " + fmt("%.3g", worst4) +
              " (q,r); exact values " + (exact ? "ok" : "wrong");
  return r;
}

CriterionResult check_gradients(int shallow, int deep) {
  CriterionResult r{8, "gradient oracle", true, "", Json::object()};
  std::mt19937_64 rng(8080);
  const std::vector<Activation> smooth = {Activation::sigmoid(), Activation::tanh(),
                                          Activation::arctan(), Activation::quadratic()};
  double worst_shallow = 0.0, worst_deep = 0.0;
  for (int k = 0; k < shallow; ++k) {
    const Activation& act = smooth[static_cast<std::size_t>(k) % smooth.size()];
    const Index dx = uniform_int(1, 4, rng), d1 = uniform_int(1, 4, rng),
                dy = uniform_int(1, 3, rng), m = uniform_int(1, 8, rng);
    const Dataset data = Dataset::make(gaussian(dx, m, rng), gaussian(dy, m, rng));
    OneHiddenParams p{gaussian(d1, dx, rng), gaussian(d1, 1, rng).col(0), gaussian(dy, d1, rng),
                      gaussian(dy, 1, rng).col(0)};
    const OneHiddenParams g = gradient(p, act, data);
    const OneHiddenParams f = fd_gradient(p, act, data, 1e-6);
    worst_shallow = std::max(worst_shallow, rel_err((g - f).norm(), g.norm(), f.norm()));
  }
  for (int k = 0; k < deep; ++k) {
    const Index H = uniform_int(1, 3, rng);
    std::vector<Index> dims(H + 2);
    for (Index& d : dims) d = uniform_int(1, 4, rng);
    LinearChain chain = random_chain(dims, rng);
    const Index m = uniform_int(1, 6, rng);
    const L0Oracle oracle = squared_loss_oracle(gaussian(dims.front(), m, rng),
                                                gaussian(dims.back(), m, rng));
    const std::vector<Matrix> g = partial_grads(chain, oracle);
    double num = 0.0, gn = 0.0, fn = 0.0;
    const double h = 1e-6;
    for (Index j = 1; j <= chain.num_factors(); ++j) {
      Matrix fdj = Matrix::Zero(chain.factor(j).rows(), chain.factor(j).cols());
      for (Index i = 0; i < fdj.size(); ++i) {
        LinearChain up = chain, dn = chain;
        Matrix wu = chain.factor(j), wd = chain.factor(j);
        wu.data()[i] += h;
        wd.data()[i] -= h;
        up.set_factor(j, wu);
        dn.set_factor(j, wd);
        fdj.data()[i] = (chain_loss(up, oracle) - chain_loss(dn, oracle)) / (2.0 * h);
      }
      num += (g[j - 1] - fdj).squaredNorm();
      gn += g[j - 1].squaredNorm();
      fn += fdj.squaredNorm();
    }
    worst_deep = std::max(worst_deep, rel_err(std::sqrt(num), std::sqrt(gn), std::sqrt(fn)));
  }
  r.passed = worst_shallow <= 1e-5 && worst_deep <= 1e-5;
  r.details = {{"shallow_instances", shallow}, {"deep_instances", deep},
               {"worst_shallow_rel_err", worst_shallow}, {"worst_deep_rel_err", worst_deep}};
  r.summary = std::to_string(shallow) + " shallow / " + std::to_string(deep) +
              " deep; worst rel err " + fmt("%.3g", worst_shallow) + " / " +
              fmt("%.3g", worst_deep);
  return r;
}

std::vector<CriterionResult> run_selftest(SelftestLevel level) {
  if (level == SelftestLevel::Fast)
    return {check_counterexample_gallery(), check_polynomial_identities(100), check_gradients(20, 10)};
  return {check_counterexample_gallery(), check_spurious_locality(10000),
          check_spurious_random(100),     check_case2_route(),
          check_deep_linear_saddles(50),  check_decompose_near(100),
          check_polynomial_identities(500), check_gradients(100, 50)};
}

}  // namespace landscape
