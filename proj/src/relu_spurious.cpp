#include "landscape/relu_spurious.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "landscape/error.hpp"

namespace landscape {

namespace {

constexpr int kMaxHalvings = 60;

void require_construction_setting(const Dataset& data, const Activation& act, Index hidden_width) {
  if (data.d_y() != 1)
    throw Error(ErrorCode::OutputDimNotOne, "construction needs d_y = 1, got " +
                                                std::to_string(data.d_y()));
  if (hidden_width < 2)
    throw Error(ErrorCode::HiddenTooNarrow, "construction needs at least 2 hidden units");
  if (!act.is_piecewise_linear())
    throw Error(ErrorCode::InvalidArgument, "construction needs a piecewise-linear activation");
  if (is_linearly_fittable(data))
    throw Error(ErrorCode::LinearlyFittable, "labels are an affine function of the inputs");
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct Halving {
  double t = 0.0;
  double margin = 0.0;
  int halvings = 0;
};

// Halves t from t0 until margin(t) exceeds thr, then keeps halving while the
// margin still grows.
Halving halve_until_better(double t0, double thr, const std::function<double(double)>& margin) {
  double t = t0;
  for (int k = 0; k <= kMaxHalvings; ++k, t *= 0.5) {
    const double m = margin(t);
    if (m > thr) {
      Halving best{t, m, k};
      for (int j = k + 1; j <= kMaxHalvings; ++j) {
        const double next = margin(best.t * 0.5);
        if (!(next > best.margin)) break;
        best = {best.t * 0.5, next, j};
      }
      return best;
    }
  }
  throw Error(ErrorCode::BacktrackExhausted,
              "no improving step after " + std::to_string(kMaxHalvings) + " halvings");
}

// Hidden layer (x, -x, 0...) readout shared by both cases.
OneHiddenParams two_unit_params(const Vector& w, double c, double beta, double gamma,
                                const Activation& act, Index hidden_width) {
  const Index dx = w.size();
  OneHiddenParams p = OneHiddenParams::zeros(dx, hidden_width, 1);
  p.W1.row(0) = w.transpose();
  p.W1.row(1) = -w.transpose();
  p.b1(0) = c - beta + gamma;
  p.b1(1) = -c + beta + gamma;
  const double denom = act.s_plus() + act.s_minus();
  p.W2(0, 0) = 1.0 / denom;
  p.W2(0, 1) = -1.0 / denom;
  p.b2(0) = beta;
  return p;
}

}  // namespace

BoundarySet compute_boundary_set(const LeastSquaresFit& fit, const Dataset& data,
                                 std::optional<double> tol) {
  if (data.d_y() != 1 || fit.Y_hat.rows() != 1)
    throw Error(ErrorCode::OutputDimNotOne, "boundary set needs d_y = 1");
  const Index m = data.m();
  BoundarySet bs;
  bs.order.resize(m);
  std::iota(bs.order.begin(), bs.order.end(), Index{0});
  std::stable_sort(bs.order.begin(), bs.order.end(),
                   [&](Index a, Index b) { return fit.Y_hat(0, a) < fit.Y_hat(0, b); });
  bs.tol = tol.value_or(1e-9 * (1.0 + data.Y.cwiseAbs().maxCoeff()));
  bs.tol_dup = 1e-9 * (1.0 + fit.Y_hat.cwiseAbs().maxCoeff());
  for (Index k = 0; k < m; ++k) {
    bs.y_hat_sorted.push_back(fit.Y_hat(0, bs.order[k]));
    bs.y_sorted.push_back(data.Y(0, bs.order[k]));
  }
  double s = 0.0;
  for (Index j = 0; j + 1 < m; ++j) {
    s += bs.y_hat_sorted[j] - bs.y_sorted[j];
    bs.partial_sums.push_back(s);
    if (std::abs(s) > bs.tol && bs.y_hat_sorted[j + 1] - bs.y_hat_sorted[j] > bs.tol_dup)
      bs.indices.push_back(j);
  }
  return bs;
}

Step1Certificate construct_local_min(const Dataset& data, const Activation& act, double alpha,
                                     const Step1Options& options) {
  require_construction_setting(data, act, options.hidden_width);
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidArgument, "alpha must be positive");

  Step1Certificate cert;
  cert.alpha = alpha;
  cert.fit = least_squares(data);
  cert.baseline_loss0 = cert.fit.loss0;
  const Index dx = data.d_x();
  const Index d1 = options.hidden_width;
  const Vector w = cert.fit.W.row(0).head(dx).transpose();
  const double c = cert.fit.W(0, dx);
  cert.eta = std::min(-1.0, 2.0 * cert.fit.Y_hat.minCoeff());

  OneHiddenParams& p = cert.params;
  p = OneHiddenParams::zeros(dx, d1, 1);
  p.W1.row(0) = alpha * w.transpose();
  p.b1.setConstant(-alpha * cert.eta);
  p.b1(0) = alpha * (c - cert.eta);
  p.W2(0, 0) = 1.0 / (alpha * act.s_plus());
  p.b2(0) = cert.eta;

  const Matrix Z = preactivations(p, data.X);
  cert.min_preactivation = Z.minCoeff();
  if (!(cert.min_preactivation > 0.0))
    throw Error(ErrorCode::NonPositivePreactivation,
                "a hidden preactivation is not positive at the constructed point");

  cert.loss_at_min = loss(p, act, data);
  cert.residual_orthogonality =
      ((cert.fit.Y_hat - data.Y) * augment(data.X).transpose()).cwiseAbs().maxCoeff();

  double max_x = 0.0;
  for (Index i = 0; i < data.m(); ++i) max_x = std::max(max_x, data.X.col(i).norm());
  cert.margin_limited_radius =
      0.5 * cert.min_preactivation / (1.0 + max_x) / (1.0 + p.norm());

  ProbeOptions po;
  po.radius = options.probe_radius.value_or(std::min(1e-4, cert.margin_limited_radius));
  po.samples = options.probe_samples;
  po.seed = options.seed;
  cert.probe = probe_local_min(p, act, data, po);
  return cert;
}

Step2Certificate construct_better_point(const Dataset& data, const Activation& act,
                                        Index hidden_width) {
  require_construction_setting(data, act, hidden_width);
  const LeastSquaresFit fit = least_squares(data);
  const Index dx = data.d_x();
  const Index m = data.m();
  const Vector w = fit.W.row(0).head(dx).transpose();
  const double c = fit.W(0, dx);
  const double sp = act.s_plus();
  const double sm = act.s_minus();

  Step2Certificate cert;
  cert.boundary = compute_boundary_set(fit, data);
  cert.baseline_loss0 = fit.loss0;
  const BoundarySet& bs = cert.boundary;
  const double thr = 1e-12 * (1.0 + fit.loss0);

  if (!bs.indices.empty()) {
    cert.which = Step2Case::Case1;
    cert.permutation = bs.order;
    const Index j0 = bs.indices.front();
    cert.j0 = j0;
    const double lo = bs.y_hat_sorted[j0];
    const double hi = bs.y_hat_sorted[j0 + 1];
    cert.beta = 0.5 * (lo + hi);
    cert.gamma_bound = 0.25 * (hi - lo);
    const double dir = sign_of(bs.partial_sums[j0] * (sp - sm));
    const auto margin = [&](double g) {
      return fit.loss0 -
             loss(two_unit_params(w, c, cert.beta, dir * g, act, hidden_width), act, data);
    };
    const Halving h = halve_until_better(cert.gamma_bound, thr, margin);
    cert.gamma = dir * h.t;
    cert.halvings = h.halvings;
    cert.params = two_unit_params(w, c, cert.beta, cert.gamma, act, hidden_width);

    bool ok = true;
    for (Index i = 0; i < m; ++i) {
      const double t = fit.Y_hat(0, i) - cert.beta;
      const double a = t + cert.gamma;
      const double b = t - cert.gamma;
      ok = ok && ((t > 0 && a > 0 && b > 0) || (t < 0 && a < 0 && b < 0));
    }
    cert.sign_structure_ok = ok;
  } else {
    cert.which = Step2Case::Case2;
    Case2Details d;

    double max_x = 0.0;
    for (Index i = 0; i < m; ++i) max_x = std::max(max_x, data.X.col(i).norm());
    const double dup_x = 1e-12 * (1.0 + max_x);
    for (Index i = 0; i < m; ++i)
      for (Index j = i + 1; j < m; ++j)
        if ((data.X.col(i) - data.X.col(j)).norm() <= dup_x)
          throw Error(ErrorCode::DuplicateDataPoints,
                      "inputs " + std::to_string(i) + " and " + std::to_string(j) +
                          " coincide");
    d.M = max_x;

    // Groups of equal predictions in sorted order: [start, end).
    std::vector<std::pair<Index, Index>> groups;
    for (Index k = 0; k < m;) {
      Index e = k + 1;
      while (e < m && bs.y_hat_sorted[e] - bs.y_hat_sorted[e - 1] <= bs.tol_dup) ++e;
      groups.emplace_back(k, e);
      k = e;
    }
    const auto residual = [&](Index orig) { return fit.Y_hat(0, orig) - data.Y(0, orig); };

    // With an empty boundary set every lone point is fit exactly and every
    // group of equal predictions has residuals summing to zero. Each of these
    // is a difference of two partial sums, hence the factor 2.
    bool diag = true;
    for (const auto& [s, e] : groups) {
      double sum = 0.0;
      for (Index k = s; k < e; ++k) sum += residual(bs.order[k]);
      diag = diag && std::abs(sum) <= 2.0 * bs.tol;
    }
    d.fit_diagnostics_ok = diag;
    if (!diag)
      throw Error(ErrorCode::CertificateFailed,
                  "least-squares fit fails the empty-boundary-set diagnostics");

    const std::pair<Index, Index>* target = nullptr;
    for (const auto& grp : groups) {
      if (grp.second - grp.first < 2) continue;
      for (Index k = grp.first; k < grp.second && !target; ++k)
        if (std::abs(residual(bs.order[k])) > bs.tol) target = &grp;
      if (target) break;
    }
    if (!target)
      throw Error(ErrorCode::CertificateFailed,
                  "no group of equal predictions carries a nonzero residual");

    d.y_star = bs.y_hat_sorted[target->first];
    for (Index k = target->first; k < target->second; ++k) d.tied.push_back(bs.order[k]);
    std::sort(d.tied.begin(), d.tied.end());
    for (Index j : d.tied)
      if (std::abs(residual(j)) > bs.tol) d.tied_nonzero.push_back(j);

    d.j1 = d.tied_nonzero.front();
    for (Index j : d.tied_nonzero)
      if (data.X.col(j).norm() > data.X.col(d.j1).norm()) d.j1 = j;
    const Vector x1 = data.X.col(d.j1);
    const double n1sq = x1.dot(x1);
    for (Index j : d.tied)
      (data.X.col(j).dot(x1) >= n1sq ? d.tied_ge : d.tied_lt).push_back(j);
    if (d.tied_lt.empty() || !(n1sq > 0.0))
      throw Error(ErrorCode::CertificateFailed, "tied group has no point off the split side");
    d.j2 = d.tied_lt.front();
    for (Index j : d.tied_lt)
      if (data.X.col(j).dot(x1) > data.X.col(d.j2).dot(x1)) d.j2 = j;

    // Permutation: sorted order with the tied block rearranged.
    cert.permutation.assign(bs.order.begin(), bs.order.begin() + target->first);
    for (Index j : d.tied_ge)
      if (j != d.j1) cert.permutation.push_back(j);
    cert.permutation.push_back(d.j1);
    d.split_position = static_cast<Index>(cert.permutation.size()) - 1;
    for (Index j : d.tied_lt) cert.permutation.push_back(j);
    cert.permutation.insert(cert.permutation.end(), bs.order.begin() + target->second,
                            bs.order.end());

    if (groups.size() > 1) {
      double gap = INFINITY;
      for (std::size_t q = 1; q < groups.size(); ++q)
        gap = std::min(gap, bs.y_hat_sorted[groups[q].first] - bs.y_hat_sorted[groups[q - 1].first]);
      d.g = 0.25 * gap;
    } else {
      d.g = 0.25 * (1.0 + fit.Y_hat.cwiseAbs().maxCoeff());
    }
    d.v = d.g / (d.M * std::sqrt(n1sq)) * x1;

    const Vector x2 = data.X.col(d.j2);
    const double dir = sign_of(residual(d.j1) * (sp - sm));
    const double vsum = d.v.dot(x1 + x2);
    const double vdiff = d.v.dot(x1 - x2);
    const auto beta_at = [&](double a) { return d.y_star - 0.5 * a * vsum; };
    const auto gamma_at = [&](double a) { return dir * a * vdiff / 4.0; };
    const auto params_at = [&](double a) {
      return two_unit_params(w - a * d.v, c, beta_at(a), gamma_at(a), act, hidden_width);
    };
    cert.gamma_bound = std::abs(gamma_at(1.0));
    const Halving h = halve_until_better(
        1.0, thr, [&](double a) { return fit.loss0 - loss(params_at(a), act, data); });
    d.alpha = h.t;
    cert.halvings = h.halvings;
    cert.beta = beta_at(d.alpha);
    cert.gamma = gamma_at(d.alpha);
    cert.params = params_at(d.alpha);

    d.left_max = -INFINITY;
    d.right_min = INFINITY;
    double left_res = 0.0, right_res = 0.0;
    bool ok = true;
    for (Index k = 0; k < m; ++k) {
      const Index i = cert.permutation[k];
      const double t = fit.Y_hat(0, i) - d.alpha * d.v.dot(data.X.col(i)) - cert.beta;
      const double a = t + cert.gamma;
      const double b = t - cert.gamma;
      if (k <= d.split_position) {
        d.left_max = std::max(d.left_max, t);
        left_res += residual(i);
        ok = ok && t < 0 && a < 0 && b < 0;
      } else {
        d.right_min = std::min(d.right_min, t);
        right_res += residual(i);
        ok = ok && t > 0 && a > 0 && b > 0;
      }
    }
    d.residual_split = right_res - left_res;
    d.residual_split_expected = -2.0 * residual(d.j1);
    cert.sign_structure_ok = ok;
    const double split_tol = 2.0 * static_cast<double>(m) * bs.tol;
    if (!ok || std::abs(d.residual_split - d.residual_split_expected) > split_tol ||
        !(std::abs(d.residual_split_expected) > bs.tol))
      throw Error(ErrorCode::CertificateFailed, "sign split around j1 does not hold");
    cert.case2 = std::move(d);
  }

  cert.loss_better = loss(cert.params, act, data);
  cert.margin = fit.loss0 - cert.loss_better;
  if (!(cert.margin > 0.0))
    throw Error(ErrorCode::CertificateFailed, "constructed point is not strictly better");
  return cert;
}

SpuriousCertificate certify_spurious(const Dataset& data, const Activation& act, double alpha,
                                     const Step1Options& options) {
  SpuriousCertificate out;
  out.step1 = construct_local_min(data, act, alpha, options);
  out.step2 = construct_better_point(data, act, options.hidden_width);
  out.gap = out.step1.loss_at_min - out.step2.loss_better;
  if (!(out.gap > 0.0))
    throw Error(ErrorCode::CertificateFailed, "local minimum is not spurious: gap <= 0");
  return out;
}

}  // namespace landscape
