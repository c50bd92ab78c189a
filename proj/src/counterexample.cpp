#include "landscape/counterexample.hpp"

#include <cmath>
#include <string>

#include "landscape/error.hpp"

namespace landscape {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

OneHiddenParams spurious_params(const Part2Witness& w) {
  OneHiddenParams p = OneHiddenParams::zeros(2, 2, 1);
  p.W1 << w.v1, w.v1, w.v2, w.v2;
  p.W2 << w.u1, w.u2;
  return p;
}

SpuriousMinResult finish_spurious(const Activation& act, const Part2Witness& w,
                                  const ProbeOptions& probe) {
  const Dataset data = fixed_dataset();
  SpuriousMinResult r;
  r.params = spurious_params(w);
  r.output = forward(r.params, act, data.X);
  r.loss = loss(r.params, act, data);
  r.probe = probe_local_min(r.params, act, data, probe);
  r.taylor_bound_certified = act.taylor_bound_certified();
  return r;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Bracketed coefficient shared by p_n and q_{n1,n2}.
double pq_coefficient(int n, int k) {
  double s = 0.0;
  for (int l = 0; l <= k; ++l) s += static_cast<double>(k + 1 - l) * binom(n, l);
  return static_cast<double>(k + 1) - std::ldexp(s, -n + 1);
}

void check_degree(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidDegree, what);
}

}  // namespace

Dataset fixed_dataset() {
  Matrix X(2, 3), Y(1, 3);
  X << 1.0, 0.0, 0.5, 0.0, 1.0, 0.5;
  Y << 0.0, 0.0, 1.0;
  return Dataset::make(std::move(X), std::move(Y));
}

Part1Check check_part1(const Activation& act, const Part1Witness& w, std::optional<double> tol) {
  const double h1 = act.value(w.v1), h2 = act.value(w.v2), h3 = act.value(w.v3),
               h4 = act.value(w.v4);
  const double l1 = h1 * h4, r1 = h2 * h3;
  const double l2 = h1 * act.value(0.5 * (w.v3 + w.v4));
  const double r2 = h3 * act.value(0.5 * (w.v1 + w.v2));
  Part1Check c;
  c.tol = tol.value_or(1e-10 * (1.0 + std::abs(l1) + std::abs(r1)));
  c.c1_residual = std::abs(l1 - r1);
  c.c1_ok = c.c1_residual <= c.tol;
  c.c2_gap = std::abs(l2 - r2);
  const double tol2 = tol.value_or(1e-10 * (1.0 + std::abs(l2) + std::abs(r2)));
  c.c2_ok = c.c2_gap > tol2;
  return c;
}

Part2Check check_part2(const Activation& act, const Part2Witness& w, std::optional<double> tol) {
  const double a = w.u1 * act.value(w.v1), b = w.u2 * act.value(w.v2);
  Part2Check c;
  c.tol = tol.value_or(1e-10 * (1.0 + std::abs(a) + std::abs(b)));
  c.c3_residual = std::abs(a + b - 1.0 / 3.0);
  c.c3_ok = c.c3_residual <= c.tol;
  return c;
}

GlobalMinResult build_global_min(const Activation& act, const Part1Witness& w) {
  const Part1Check chk = check_part1(act, w);
  if (!chk.c1_ok || !chk.c2_ok)
    throw Error(ErrorCode::ConditionViolated, "witness fails the exact-fit conditions");
  const double h1 = act.value(w.v1), h3 = act.value(w.v3);
  const double det = h3 * act.value(0.5 * (w.v1 + w.v2)) - h1 * act.value(0.5 * (w.v3 + w.v4));
  GlobalMinResult r;
  r.params = OneHiddenParams::zeros(2, 2, 1);
  r.params.W1 << w.v1, w.v2, w.v3, w.v4;
  r.params.W2 << h3 / det, -h1 / det;
  r.loss = loss(r.params, act, fixed_dataset());
  return r;
}

QuadFormCertificate quadratic_form_certificate(const Activation& act, const Part2Witness& w) {
  const double d1 = act.derivative(w.v1), d2 = act.derivative(w.v2);
  const double s1 = act.second_derivative(w.v1), s2 = act.second_derivative(w.v2);
  QuadFormCertificate q;
  q.alpha1_lead = w.u1 * s1 / 12.0 + w.u1 * w.u1 * d1 * d1 / 4.0;
  q.alpha2_lead = w.u2 * s2 / 12.0 + w.u2 * w.u2 * d2 * d2 / 4.0;
  q.alpha3_lead = w.u1 * w.u2 * d1 * d2 / 2.0;
  q.margin = 4.0 * q.alpha1_lead * q.alpha2_lead - q.alpha3_lead * q.alpha3_lead;
  q.psd_ok = q.alpha1_lead > 0.0 && q.margin > 0.0;
  const double a = (w.u1 * d1) * (w.u1 * d1) + w.u1 * s1 / 3.0;
  const double b = (w.u2 * d2) * (w.u2 * d2) + w.u2 * s2 / 3.0;
  const double cross = w.u1 * d1 * w.u2 * d2;
  q.c6_ok = a > 0.0;
  q.c7_ok = cross * cross < a * b;
  return q;
}

SpuriousMinResult build_spurious_min(const Activation& act, const Part2Witness& w,
                                     const ProbeOptions& probe) {
  if (!check_part2(act, w).c3_ok)
    throw Error(ErrorCode::ConditionViolated, "u1 h(v1) + u2 h(v2) != 1/3");
  const QuadFormCertificate q = quadratic_form_certificate(act, w);
  if (!q.psd_ok)
    throw Error(ErrorCode::CertificateFailed, "leading-order quadratic form is not positive");
  SpuriousMinResult r = finish_spurious(act, w, probe);
  r.certificate = q;
  return r;
}

WitnessTuple gallery(const Activation& act) {
  WitnessTuple t;
  t.activation = act.name();
  t.taylor_bound_certified = act.taylor_bound_certified();
  switch (act.kind()) {
    case ActivationKind::Sigmoid:
      t.part1 = Part1Witness{logit(0.5), logit(0.25), logit(0.25), logit(0.125)};
      t.part2 = Part2Witness{logit(0.25), logit(0.25), 2.0 / 3.0, 2.0 / 3.0};
      break;
    case ActivationKind::Tanh:
      t.part1 = Part1Witness{std::atanh(0.5), std::atanh(0.25), std::atanh(0.25), std::atanh(0.125)};
      t.part2 = Part2Witness{std::atanh(0.5), std::atanh(0.5), 1.0, -1.0 / 3.0};
      break;
    case ActivationKind::Arctan:
      t.part1 = Part1Witness{std::tan(0.5), std::tan(0.25), std::tan(0.25), std::tan(0.125)};
      t.part2 = Part2Witness{std::tan(0.5), std::tan(0.5), 1.0, -1.0 / 3.0};
      break;
    case ActivationKind::Quadratic:
      t.part1 = Part1Witness{1.0, 0.5, 0.5, -0.25};
      t.part2 = Part2Witness{1.0, 1.0, 1.0 / 6.0, 1.0 / 6.0};
      break;
    case ActivationKind::Elu:
    case ActivationKind::Selu: {
      const double lam = act.elu_lambda(), al = act.elu_alpha();
      // h^{-1}(-lam*al*t) = log(1 - t) on the negative branch.
      t.part1 = Part1Witness{std::log(0.5), std::log(0.75), std::log(0.75), std::log(0.875)};
      t.part2 = Part2Witness{1.0 / 3.0, std::log(2.0 / 3.0), 2.0 / lam, 1.0 / (lam * al)};
      break;
    }
    case ActivationKind::PiecewiseLinear: {
      const double sp = act.s_plus(), sm = act.s_minus();
      if (sm > 0.0) t.part1 = Part1Witness{1.0 / sp, -1.0 / sm, -1.0 / sm, 1.0 / sp};
      t.part2 = Part2Witness{0.25 / sp, 0.25 / sp, 2.0 / 3.0, 2.0 / 3.0};
      t.taylor_bound_certified = false;
      break;
    }
    case ActivationKind::Custom:
      throw Error(ErrorCode::UnknownActivation,
                  "no published witness for custom activation '" + act.name() + "'");
  }
  return t;
}

WitnessTuple gallery(std::string_view name, const Activation::Params& params) {
  return gallery(Activation::by_name(name, params));
}

ReluLikeCounterexample relu_like_counterexample(double s_plus, double s_minus,
                                                const ProbeOptions& probe) {
  const Activation act = Activation::relu_like(s_plus, s_minus);
  const WitnessTuple t = gallery(act);
  ReluLikeCounterexample out;
  out.part2 = *t.part2;
  if (s_minus > 0.0) {
    out.part1 = *t.part1;
    out.global = build_global_min(act, out.part1);
  } else {
    // Pure ReLU: the generic two-unit readout is singular here.
    out.global.params = OneHiddenParams::zeros(2, 2, 1);
    out.global.params.W1 << 0.0, 2.0, -2.0, 1.0;
    out.global.params.W2 << 1.0 / s_plus, -2.0 / s_plus;
    out.global.loss = loss(out.global.params, act, fixed_dataset());
  }
  if (!check_part2(act, out.part2).c3_ok)
    throw Error(ErrorCode::ConditionViolated, "u1 h(v1) + u2 h(v2) != 1/3");
  out.spurious = finish_spurious(act, out.part2, probe);
  return out;
}

double eval_p(int n, double a, double b) {
  check_degree(n >= 2 && n <= 20, "p_n needs 2 <= n <= 20");
  double s = 0.0;
  for (int k = 0; k <= n - 2; ++k)
    s += pq_coefficient(n, k) * std::pow(a, n - k - 2) * std::pow(b, k);
  return s;
}

double eval_q(int n1, int n2, double a, double b, double d) {
  check_degree(n1 >= 1 && n2 >= 1 && n1 + n2 <= 20, "q needs n1, n2 >= 1 and n1 + n2 <= 20");
  double s = 0.0;
  for (int k = 0; k <= n1 - 2; ++k)
    s += pq_coefficient(n1, k) * std::pow(a, n1 - k - 2) * std::pow(b, k);
  return s * std::pow(d, n2);
}

double eval_r(int n1, int n2, double a, double b, double c, double d) {
  check_degree(n1 >= 1 && n2 >= 1 && n1 + n2 <= 20, "r needs n1, n2 >= 1 and n1 + n2 <= 20");
  double s = 0.0;
  for (int k1 = 0; k1 < n1; ++k1) {
    for (int k2 = 0; k2 < n2; ++k2) {
      double acc = 0.0;
      for (int l1 = 0; l1 <= k1; ++l1)
        for (int l2 = 0; l2 <= k2; ++l2) acc += binom(n1, l1) * binom(n2, l2);
      const double coef = 1.0 - std::ldexp(acc, -n1 - n2 + 1);
      s += coef * std::pow(a, n1 - k1 - 1) * std::pow(b, k1) * std::pow(c, n2 - k2 - 1) *
           std::pow(d, k2);
    }
  }
  return s;
}

}  // namespace landscape
