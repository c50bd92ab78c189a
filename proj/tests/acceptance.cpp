// Acceptance run: each criterion is checked twice, once through the library's
// own self-check and once against oracles written here from the definitions.
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "landscape/counterexample.hpp"
#include "landscape/deeplinear.hpp"
#include "landscape/error.hpp"
#include "landscape/relu_spurious.hpp"
#include "landscape/selftest.hpp"
#include "test_support.hpp"

using namespace landscape;
using testsupport::gaussian;
using testsupport::uniform_int;

namespace {

constexpr double kThird = 1.0 / 3.0;

struct Outcome {
  bool ok = true;
  std::string note;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double naive_output(const OneHiddenParams& p, const Activation& act, const Matrix& X, Index s,
                    Index o) {
  double out = p.b2(o);
  for (Index u = 0; u < p.W1.rows(); ++u) {
    double z = p.b1(u);
    for (Index i = 0; i < X.rows(); ++i) z += p.W1(u, i) * X(i, s);
    out += p.W2(o, u) * act.value(z);
  }
  return out;
}

double naive_loss(const OneHiddenParams& p, const Activation& act, const Dataset& d) {
  double t = 0.0;
  for (Index s = 0; s < d.m(); ++s)
    for (Index o = 0; o < d.d_y(); ++o) {
      const double r = naive_output(p, act, d.X, s, o) - d.Y(o, s);
      t += 0.5 * r * r;
    }
  return t;
}

Matrix naive_product(const LinearChain& c) {
  Matrix P = Matrix::Identity(c.d_x(), c.d_x());
  for (const Matrix& W : c.weights()) {
    Matrix n = Matrix::Zero(W.rows(), P.cols());
    for (Index r = 0; r < W.rows(); ++r)
      for (Index s = 0; s < P.cols(); ++s)
        for (Index k = 0; k < W.cols(); ++k) n(r, s) += W(r, k) * P(k, s);
    P = n;
  }
  return P;
}

double naive_chain_loss(const LinearChain& c, const Matrix& X, const Matrix& Y) {
  return 0.5 * (naive_product(c) * X - Y).squaredNorm();
}

// Least-squares loss by pivoted QR on the augmented data.
double ls_loss(const Dataset& d) {
  Matrix A(d.d_x() + 1, d.m());
  A << d.X, Matrix::Ones(1, d.m());
  const Matrix W = A.transpose().colPivHouseholderQr().solve(d.Y.transpose()).transpose();
  return 0.5 * (W * A - d.Y).squaredNorm();
}

std::vector<std::pair<std::string, Activation>> catalog() {
  return {{"sigmoid", Activation::sigmoid()},     {"tanh", Activation::tanh()},
          {"arctan", Activation::arctan()},       {"quadratic", Activation::quadratic()},
          {"elu", Activation::elu()},             {"selu", Activation::selu()},
          {"relu-like(1.5,1)", Activation::relu_like(1.5, 1.0)},
          {"relu-like(1,0)", Activation::relu_like(1.0, 0.0)}};
}

std::pair<GlobalMinResult, SpuriousMinResult> build(const Activation& act, const ProbeOptions& po) {
  if (act.is_piecewise_linear()) {
    const ReluLikeCounterexample r = relu_like_counterexample(act.s_plus(), act.s_minus(), po);
    return {r.global, r.spurious};
  }
  const WitnessTuple t = gallery(act);
  return {build_global_min(act, *t.part1), build_spurious_min(act, *t.part2, po)};
}

Outcome oracle_gallery() {
  Outcome out;
  const Dataset d = fixed_dataset();
  ProbeOptions po;
  po.samples = 64;
  double worst = 0.0;
  for (const auto& [name, act] : catalog()) {
    const auto [g, s] = build(act, po);
    const double lg = naive_loss(g.params, act, d);
    const double ls = naive_loss(s.params, act, d);
    out.require(lg <= 1e-12, name + ": global loss " + fmt("%.3g", lg));
    out.require(std::abs(ls - kThird) <= 1e-12, name + ": spurious loss off 1/3");
    for (Index i = 0; i < 3; ++i) {
      const double y = naive_output(s.params, act, d.X, i, 0);
      worst = std::max(worst, std::abs(y - kThird));
      out.require(std::abs(y - kThird) <= 1e-12, name + ": spurious output off 1/3");
    }
  }
  out.note = out.ok ? "naive forward max |y - 1/3| = " + fmt("%.2g", worst) : out.note;
  return out;
}

Outcome oracle_locality() {
  Outcome out;
  const Dataset d = fixed_dataset();
  ProbeOptions po;
  po.samples = 64;
  std::mt19937_64 rng(90210);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u;
  double worst = INFINITY;
  for (const auto& [name, act] : catalog()) {
    const OneHiddenParams p = build(act, po).second.params;
    const double r = 1e-4 * (1.0 + p.norm());
    const Index dim = p.parameter_count();
    // Uniform in the full-parameter ball, independent of the library sampler.
    for (int k = 0; k < 2000; ++k) {
      OneHiddenParams q = p;
      std::vector<double*> slots;
      for (Matrix* M : {&q.W1, &q.W2})
        for (Index i = 0; i < M->size(); ++i) slots.push_back(M->data() + i);
      for (Vector* v : {&q.b1, &q.b2})
        for (Index i = 0; i < v->size(); ++i) slots.push_back(v->data() + i);
      std::vector<double> g(slots.size());
      double nn = 0.0;
      for (double& x : g) nn += (x = n(rng)) * x;
      const double len = r * std::pow(u(rng), 1.0 / static_cast<double>(dim)) / std::sqrt(nn);
      for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] += len * g[i];
      const double l = naive_loss(q, act, d);
      worst = std::min(worst, l - kThird);
      out.require(l >= kThird - 1e-12, name + ": oracle probe found " + fmt("%.17g", l));
    }
  }
  if (out.ok) out.note = "2000-sample oracle probe per point; min(loss - 1/3) = " + fmt("%.3g", worst);
  return out;
}

Outcome oracle_spurious_random() {
  Outcome out;
  std::mt19937_64 rng(777);
  const std::vector<Activation> acts = {Activation::relu(), Activation::relu_like(1.5, 1.0),
                                        Activation::relu_like(2.0, 0.5)};
  int done = 0;
  double min_gap = INFINITY;
  while (done < 100) {
    const Dataset d = Dataset::make(gaussian(3, 20, rng), gaussian(1, 20, rng));
    const double l0 = ls_loss(d);
    if (l0 <= 1e-10 * (1 + d.Y.squaredNorm())) continue;
    const Activation& act = acts[done % acts.size()];
    try {
      Step1Options opt;
      opt.probe_samples = 64;
      const Step1Certificate s1 = construct_local_min(d, act, 1.0 + done % 5, opt);
      const double l1 = naive_loss(s1.params, act, d);
      out.require(std::abs(l1 - l0) <= 1e-10, "local-min loss differs from least squares");
      ProbeOptions po;
      po.radius = s1.margin_limited_radius;
      po.samples = 4096;
      po.seed = 5000 + done;
      out.require(!probe_local_min(s1.params, act, d, po).violation, "probe found a lower point");
      const Step2Certificate s2 = construct_better_point(d, act);
      const double l2 = naive_loss(s2.params, act, d);
      out.require(l2 < l0, "better point is not better");
      min_gap = std::min(min_gap, l1 - l2);
    } catch (const Error& e) {
      out.require(false, std::string("dataset raised ") + std::string(to_string(e.code())));
    }
    ++done;
  }
  if (out.ok) out.note = "100/100 with naive losses; min gap = " + fmt("%.3g", min_gap);
  return out;
}

Outcome oracle_case2() {
  Outcome out;
  const Dataset d = fixed_dataset();
  const Activation act = Activation::relu_like(1.5, 1.0);
  const Step2Certificate c = construct_better_point(d, act);
  out.require(c.which == Step2Case::Case2, "not routed through Case 2");
  out.require(c.case2.has_value(), "missing Case 2 details");
  if (!out.ok) return out;
  const Case2Details& k = *c.case2;
  const double l = naive_loss(c.params, act, d);
  out.require(kThird - l > 1e-10, "margin " + fmt("%.3g", kThird - l));
  // The fit predicts 1/3 everywhere; residuals are 1/3, 1/3, -2/3 and sum to zero.
  const double res[3] = {kThird, kThird, -2.0 * kThird};
  double left = 0.0, right = 0.0;
  for (Index pos = 0; pos < 3; ++pos) {
    const Index i = c.permutation[pos];
    const double t = kThird - k.alpha * k.v.dot(d.X.col(i)) - c.beta;
    if (pos <= k.split_position) {
      out.require(t < 0 && t + c.gamma < 0 && t - c.gamma < 0, "left group not negative");
      left += res[i];
    } else {
      out.require(t > 0 && t + c.gamma > 0 && t - c.gamma > 0, "right group not positive");
      right += res[i];
    }
  }
  out.require(std::abs((right - left) + 2.0 * res[k.j1]) <= 1e-12, "residual split identity");
  out.require(std::abs(res[k.j1]) > 0, "split residual is zero");
  if (out.ok) out.note = "naive loss " + fmt("%.15g", l) + ", margin " + fmt("%.3g", kThird - l);
  return out;
}

Outcome oracle_saddles() {
  Outcome out;
  std::mt19937_64 rng(31337);
  const double eps = 0.1;
  double min_ratio = INFINITY;
  for (int k = 0; k < 50; ++k) {
    const Index H = uniform_int(1, 3, rng);
    std::vector<Index> dims;
    for (Index j = 0; j <= H + 1; ++j) dims.push_back(uniform_int(1, 4, rng));
    const Index lo = std::min(dims.front(), dims.back());
    for (Index j = 1; j <= H; ++j) dims[j] = std::max(dims[j], lo);
    const Matrix X = gaussian(dims.front(), 8, rng), Y = gaussian(dims.back(), 8, rng);
    const L0Oracle o = squared_loss_oracle(X, Y);
    try {
      const LinearChain z = LinearChain::zeros(dims);
      out.require(is_critical(z, o), "zero chain not critical");
      const Classification c = classify_critical(z, o, eps);
      out.require(c.verdict == Verdict::Saddle && c.escape.has_value(), "zero chain not a saddle");
      if (c.escape) {
        const double l = naive_chain_loss(z, X, Y);
        const double lp = naive_chain_loss(c.escape->ascent, X, Y);
        const double lq = naive_chain_loss(c.escape->descent, X, Y);
        out.require(lp - l > 1e-12 * o.scale && l - lq > 1e-12 * o.scale, "ordering margin too small");
        out.require(z.max_factor_distance(c.escape->ascent) <= eps * (1 + 1e-12) &&
                        z.max_factor_distance(c.escape->descent) <= eps * (1 + 1e-12),
                    "escape left the epsilon ball");
        min_ratio = std::min(min_ratio, std::min(lp - l, l - lq) / o.scale);
      }
      const Matrix R = Y * X.transpose() * (X * X.transpose()).inverse();
      const LinearChain opt = embed_product(R, dims);
      out.require(classify_critical(opt, o, eps).verdict == Verdict::GlobalMin,
                  "embedded least squares not GlobalMin");
    } catch (const Error& e) {
      out.require(false, std::string("instance raised ") + std::string(to_string(e.code())));
    }
  }
  if (out.ok) out.note = "50/50 saddles + 50/50 global mins; min margin/scale = " + fmt("%.3g", min_ratio);
  return out;
}

Outcome oracle_decompose() {
  Outcome out;
  std::mt19937_64 rng(4242);
  int done = 0;
  double worst = 0.0;
  const double eps = 0.1;
  while (done < 100) {
    const Index dx = uniform_int(1, 3, rng), dy = uniform_int(1, 3, rng), H = uniform_int(1, 3, rng);
    std::vector<Matrix> w;
    Index prev = dx;
    for (Index j = 0; j <= H; ++j) {
      const Index next = (j == H) ? dy : uniform_int(std::max(dx, dy), 5, rng);
      w.push_back(gaussian(next, prev, rng));
      prev = next;
    }
    const LinearChain c(w);
    const Index js = uniform_int(1, c.num_factors(), rng);
    const Matrix A = chain_product(c, c.num_factors(), js + 1), B = chain_product(c, js - 1, 1);
    const Eigen::JacobiSVD<Matrix> sa(A), sb(B);
    const double smin_a = sa.singularValues().minCoeff(), smin_b = sb.singularValues().minCoeff();
    if (smin_a < 1e-6 * sa.singularValues().maxCoeff() || smin_b < 1e-6 * sb.singularValues().maxCoeff())
      continue;
    Matrix D = gaussian(dy, dx, rng);
    D *= 0.5 * smin_a * smin_b * eps / D.norm();
    const Matrix R = naive_product(c) + D;
    try {
      const LinearChain v = decompose_near(c, R, js, eps);
      const double err = (naive_product(v) - R).norm();
      worst = std::max(worst, err / (1 + R.norm()));
      out.require(err <= 1e-10 * (1 + R.norm()), "product misses R");
      out.require(c.max_factor_distance(v) <= eps, "factor moved beyond epsilon");
    } catch (const Error& e) {
      out.require(false, std::string("pair raised ") + std::string(to_string(e.code())));
    }
    ++done;
  }
  if (out.ok) out.note = "100/100; max relative product error " + fmt("%.2g", worst);
  return out;
}

Outcome oracle_polynomials() {
  Outcome out;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int n = 2; n <= 8; ++n)
    for (int k = 0; k < 500; ++k) {
      const double a = u(rng), b = u(rng);
      const double lhs = std::pow(a, n) + std::pow(b, n) - 2 * std::pow((a + b) / 2, n);
      const double res = std::abs(lhs - (a - b) * (a - b) * eval_p(n, a, b)) / (1 + std::pow(2.0, n));
      worst = std::max(worst, res);
    }
  for (int n1 = 1; n1 <= 5; ++n1)
    for (int n2 = 1; n2 <= 5; ++n2)
      for (int k = 0; k < 500; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const double lhs = std::pow(a, n1) * std::pow(c, n2) + std::pow(b, n1) * std::pow(d, n2) -
                           2 * std::pow((a + b) / 2, n1) * std::pow((c + d) / 2, n2);
        const double rhs = (a - b) * (a - b) * eval_q(n1, n2, a, b, d) +
                           (c - d) * (c - d) * eval_q(n2, n1, c, d, b) +
                           (a - b) * (c - d) * eval_r(n1, n2, a, b, c, d);
        worst = std::max(worst, std::abs(lhs - rhs) / (1 + std::pow(2.0, n1 + n2)));
      }
  out.require(worst <= 1e-9, "identity residual " + fmt("%.3g", worst));
  out.require(eval_p(2, 0.7, -1.3) == 0.5, "p_2 != 1/2");
  out.require(eval_q(1, 1, 0.7, -1.3, 0.2) == 0.0, "q_11 != 0");
  out.require(eval_r(1, 1, 0.7, -1.3, 0.2, 1.9) == 0.5, "r_11 != 1/2");
  if (out.ok) out.note = "max scaled residual " + fmt("%.2g", worst);
  return out;
}

Outcome oracle_gradients() {
  Outcome out;
  std::mt19937_64 rng(1618);
  const std::vector<Activation> acts = {Activation::sigmoid(), Activation::tanh(), Activation::arctan(),
                                        Activation::quadratic(), Activation::elu(), Activation::selu()};
  double worst_shallow = 0.0, worst_deep = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Activation& act = acts[k % acts.size()];
    const Index dx = uniform_int(1, 4, rng), d1 = uniform_int(1, 5, rng), dy = uniform_int(1, 2, rng),
                m = uniform_int(2, 8, rng);
    const Dataset d = Dataset::make(gaussian(dx, m, rng), gaussian(dy, m, rng));
    OneHiddenParams p{gaussian(d1, dx, rng), gaussian(d1, 1, rng).col(0), gaussian(dy, d1, rng),
                      gaussian(dy, 1, rng).col(0)};
    const OneHiddenParams g = gradient(p, act, d);
    double num = 0.0, den = 0.0;
    const auto visit = [&](auto& block, const auto& gblock) {
      for (Index i = 0; i < block.size(); ++i) {
        const double keep = block.data()[i];
        const double h = 1e-6;
        block.data()[i] = keep + h;
        const double lp = naive_loss(p, act, d);
        block.data()[i] = keep - h;
        const double lm = naive_loss(p, act, d);
        block.data()[i] = keep;
        const double fd = (lp - lm) / (2 * h);
        num += std::pow(gblock.data()[i] - fd, 2);
        den += fd * fd;
      }
    };
    visit(p.W1, g.W1);
    visit(p.b1, g.b1);
    visit(p.W2, g.W2);
    visit(p.b2, g.b2);
    const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
    worst_shallow = std::max(worst_shallow, rel);
    out.require(rel <= 1e-5, "shallow gradient error " + fmt("%.3g", rel));
  }
  for (int k = 0; k < 50; ++k) {
    const Index H = uniform_int(1, 3, rng);
    std::vector<Matrix> w;
    Index prev = uniform_int(1, 4, rng);
    const Index dx = prev;
    for (Index j = 0; j <= H; ++j) {
      const Index next = uniform_int(1, 4, rng);
      w.push_back(gaussian(next, prev, rng));
      prev = next;
    }
    const LinearChain c(w);
    const Matrix X = gaussian(dx, 6, rng), Y = gaussian(c.d_y(), 6, rng);
    const auto grads = partial_grads(c, squared_loss_oracle(X, Y));
    double num = 0.0, den = 0.0;
    for (Index j = 1; j <= c.num_factors(); ++j)
      for (Index i = 0; i < c.factor(j).size(); ++i) {
        LinearChain a = c, b = c;
        Matrix Wa = c.factor(j), Wb = c.factor(j);
        Wa.data()[i] += 1e-6;
        Wb.data()[i] -= 1e-6;
        a.set_factor(j, Wa);
        b.set_factor(j, Wb);
        const double fd = (naive_chain_loss(a, X, Y) - naive_chain_loss(b, X, Y)) / 2e-6;
        num += std::pow(grads[j - 1].data()[i] - fd, 2);
        den += fd * fd;
      }
    const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
    worst_deep = std::max(worst_deep, rel);
    out.require(rel <= 1e-5, "deep gradient error " + fmt("%.3g", rel));
  }
  if (out.ok)
    out.note = "max relative error " + fmt("%.2g", worst_shallow) + " (shallow), " +
               fmt("%.2g", worst_deep) + " (deep)";
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::function<CriterionResult()>, std::function<Outcome()>>> criteria = {
      {[] { return check_counterexample_gallery(); }, oracle_gallery},
      {[] { return check_spurious_locality(10000); }, oracle_locality},
      {[] { return check_spurious_random(100); }, oracle_spurious_random},
      {[] { return check_case2_route(); }, oracle_case2},
      {[] { return check_deep_linear_saddles(50); }, oracle_saddles},
      {[] { return check_decompose_near(100); }, oracle_decompose},
      {[] { return check_polynomial_identities(500); }, oracle_polynomials},
      {[] { return check_gradients(100, 50); }, oracle_gradients},
  };
  int failures = 0;
  for (const auto& [library, oracle] : criteria) {
    CriterionResult r;
    Outcome o;
    try {
      r = library();
    } catch (const std::exception& e) {
      r.passed = false;
      r.summary = std::string("threw: ") + e.what();
    }
    try {
      o = oracle();
    } catch (const std::exception& e) {
      o.ok = false;
      o.note = std::string("threw: ") + e.what();
    }
    const bool pass = r.passed && o.ok;
    failures += pass ? 0 : 1;
    std::printf("[%s] %d. %s | library: %s | oracle: %s\n", pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.summary.c_str(), o.note.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
