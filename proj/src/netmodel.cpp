#include "landscape/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "landscape/error.hpp"
#include "landscape/kernels.hpp"

namespace landscape {

namespace {

std::span<const double> view(const Matrix& M) {
  return {M.data(), static_cast<std::size_t>(M.size())};
}
std::span<double> view(Matrix& M) { return {M.data(), static_cast<std::size_t>(M.size())}; }

void check_input(const OneHiddenParams& p, const Matrix& X) {
  p.validate();
  if (X.rows() != p.input_dim())
    throw Error(ErrorCode::ShapeMismatch, "X has " + std::to_string(X.rows()) +
                                              " rows, network expects " +
                                              std::to_string(p.input_dim()));
}

// Visits every scalar parameter in a fixed order: W1, b1, W2, b2.
template <typename F>
void for_each_param(OneHiddenParams& p, F&& f) {
  for (Index i = 0; i < p.W1.size(); ++i) f(p.W1.data()[i], 0, i);
  for (Index i = 0; i < p.b1.size(); ++i) f(p.b1.data()[i], 1, i);
  for (Index i = 0; i < p.W2.size(); ++i) f(p.W2.data()[i], 2, i);
  for (Index i = 0; i < p.b2.size(); ++i) f(p.b2.data()[i], 3, i);
}

// Uniform point in the Frobenius ball of radius r in the shape of `out`.
template <typename M>
void ball_sample(M& out, double r, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = normal(rng);
  const double n = out.norm();
  const double dim = static_cast<double>(out.size());
  const double scale = n > 0.0 ? r * std::pow(unif(rng), 1.0 / dim) / n : 0.0;
  out *= scale;
}

}  // namespace

OneHiddenParams OneHiddenParams::zeros(Index d_x, Index d1, Index d_y) {
  return {Matrix::Zero(d1, d_x), Vector::Zero(d1), Matrix::Zero(d_y, d1), Vector::Zero(d_y)};
}

void OneHiddenParams::validate() const {
  if (W1.rows() < 1 || W1.cols() < 1 || W2.rows() < 1)
    throw Error(ErrorCode::ShapeMismatch, "empty parameter block");
  if (b1.size() != W1.rows() || W2.cols() != W1.rows() || b2.size() != W2.rows())
    throw Error(ErrorCode::ShapeMismatch, "parameter blocks have inconsistent shapes");
  if (!W1.allFinite() || !b1.allFinite() || !W2.allFinite() || !b2.allFinite())
    throw Error(ErrorCode::NonFinite, "parameters contain non-finite entries");
}

double OneHiddenParams::norm() const {
  return std::sqrt(W1.squaredNorm() + b1.squaredNorm() + W2.squaredNorm() + b2.squaredNorm());
}

Index OneHiddenParams::parameter_count() const {
  return W1.size() + b1.size() + W2.size() + b2.size();
}

OneHiddenParams OneHiddenParams::operator+(const OneHiddenParams& o) const {
  return {W1 + o.W1, b1 + o.b1, W2 + o.W2, b2 + o.b2};
}
OneHiddenParams OneHiddenParams::operator-(const OneHiddenParams& o) const {
  return {W1 - o.W1, b1 - o.b1, W2 - o.W2, b2 - o.b2};
}
OneHiddenParams OneHiddenParams::operator*(double c) const {
  return {W1 * c, b1 * c, W2 * c, b2 * c};
}

Matrix preactivations(const OneHiddenParams& p, const Matrix& X) {
  check_input(p, X);
  Matrix Z = p.W1 * X;
  Z.colwise() += p.b1;
  return Z;
}

Matrix forward(const OneHiddenParams& p, const Activation& act, const Matrix& X) {
  const Matrix Z = preactivations(p, X);
  Matrix H(Z.rows(), Z.cols());
  act.apply(view(Z), view(H));
  Matrix out = p.W2 * H;
  out.colwise() += p.b2;
  return out;
}

double loss(const OneHiddenParams& p, const Activation& act, const Dataset& data) {
  const Matrix Yh = forward(p, act, data.X);
  if (Yh.rows() != data.Y.rows())
    throw Error(ErrorCode::ShapeMismatch, "network output dimension differs from d_y");
  return 0.5 * kernels::active().sum_sq_diff(view(Yh), view(data.Y));
}

OneHiddenParams gradient(const OneHiddenParams& p, const Activation& act, const Dataset& data) {
  const Matrix Z = preactivations(p, data.X);
  if (p.output_dim() != data.d_y())
    throw Error(ErrorCode::ShapeMismatch, "network output dimension differs from d_y");
  if (act.is_piecewise_linear()) {
    const double kink_tol = 1e-12 * (1.0 + Z.cwiseAbs().maxCoeff());
    std::vector<std::pair<long, long>> where;
    for (Index s = 0; s < Z.cols(); ++s)
      for (Index u = 0; u < Z.rows(); ++u)
        if (std::abs(Z(u, s)) <= kink_tol) where.emplace_back(u, s);
    if (!where.empty())
      throw AtKinkError(std::move(where), "preactivation at the kink; gradient undefined");
  }
  Matrix H(Z.rows(), Z.cols()), dH(Z.rows(), Z.cols());
  act.apply(view(Z), view(H));
  act.apply_derivative(view(Z), view(dH));
  Matrix E = p.W2 * H;
  E.colwise() += p.b2;
  E -= data.Y;
  const Matrix dZ = (p.W2.transpose() * E).cwiseProduct(dH);
  OneHiddenParams g;
  g.W2 = E * H.transpose();
  g.b2 = E.rowwise().sum();
  g.W1 = dZ * data.X.transpose();
  g.b1 = dZ.rowwise().sum();
  return g;
}

OneHiddenParams fd_gradient(const OneHiddenParams& p, const Activation& act, const Dataset& data,
                            double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "fd step must be positive");
  p.validate();
  OneHiddenParams work = p;
  OneHiddenParams g = OneHiddenParams::zeros(p.input_dim(), p.hidden_width(), p.output_dim());
  std::vector<double*> slots;
  for_each_param(g, [&](double& x, int, Index) { slots.push_back(&x); });
  std::size_t k = 0;
  for_each_param(work, [&](double& x, int, Index) {
    const double saved = x;
    x = saved + step;
    const double up = loss(work, act, data);
    x = saved - step;
    const double down = loss(work, act, data);
    x = saved;
    *slots[k++] = (up - down) / (2.0 * step);
  });
  return g;
}

ProbeReport probe_local_min(const OneHiddenParams& p, const Activation& act, const Dataset& data,
                            const ProbeOptions& options) {
  if (!(options.radius >= 0.0) || !std::isfinite(options.radius))
    throw Error(ErrorCode::InvalidArgument, "probe radius must be finite and >= 0");
  if (options.samples < 1) throw Error(ErrorCode::InvalidArgument, "probe needs samples >= 1");

  ProbeReport rep;
  rep.samples = options.samples;
  rep.radius = options.radius;
  rep.abs_radius = options.radius * (1.0 + p.norm());
  rep.seed = options.seed;
  rep.base_loss = loss(p, act, data);
  rep.slack = 1e-12 * (1.0 + rep.base_loss);

  const auto draw = [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 rng(seq);
    OneHiddenParams d = OneHiddenParams::zeros(p.input_dim(), p.hidden_width(), p.output_dim());
    ball_sample(d.W1, rep.abs_radius, rng);
    ball_sample(d.b1, rep.abs_radius, rng);
    ball_sample(d.W2, rep.abs_radius, rng);
    ball_sample(d.b2, rep.abs_radius, rng);
    return d;
  };

  std::vector<double> losses(options.samples);
  unsigned workers = options.workers;
  if (workers == 0) workers = std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, options.samples));
  const auto run = [&](unsigned w) {
    for (std::size_t i = w; i < options.samples; i += workers)
      losses[i] = loss(p + draw(i), act, data);
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }

  // Lowest index wins ties, independent of scheduling.
  std::size_t best = 0;
  for (std::size_t i = 1; i < losses.size(); ++i)
    if (losses[i] < losses[best]) best = i;
  rep.argmin_sample = best;
  rep.min_loss_found = losses[best];
  if (losses[best] < rep.base_loss - rep.slack)
    rep.violation = ProbeViolation{best, losses[best], draw(best)};
  return rep;
}

}  // namespace landscape
