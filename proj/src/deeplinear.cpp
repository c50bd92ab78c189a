#include "landscape/deeplinear.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "landscape/error.hpp"

namespace landscape {

namespace {

constexpr int kMaxHalvings = 60;

Index nullity(const Matrix& A) { return A.cols() - numeric_rank(A); }

Matrix rect_identity(Index rows, Index cols) { return Matrix::Identity(rows, cols); }

// Halves eta from 1 until P is above and Q below the base loss, then keeps
// halving while the smaller of the two margins grows.
void choose_eta(EscapePair& e, const LinearChain& base, Index j, const Matrix& step,
                const L0Oracle& oracle) {
  const double thr = 1e-12 * (1.0 + std::abs(e.loss_base));
  const auto trial = [&](double eta, LinearChain& p, LinearChain& q) {
    p = base;
    q = base;
    p.set_factor(j, base.factor(j) + eta * step);
    q.set_factor(j, base.factor(j) - eta * step);
    const double lp = chain_loss(p, oracle), lq = chain_loss(q, oracle);
    return std::min(lp - e.loss_base, e.loss_base - lq);
  };
  LinearChain p = base, q = base;
  double eta = 1.0;
  for (int k = 0; k <= kMaxHalvings; ++k, eta *= 0.5) {
    double m = trial(eta, p, q);
    if (m > thr) {
      for (int r = k + 1; r <= kMaxHalvings; ++r) {
        LinearChain p2 = base, q2 = base;
        const double m2 = trial(eta * 0.5, p2, q2);
        if (!(m2 > m)) break;
        m = m2;
        eta *= 0.5;
        p = std::move(p2);
        q = std::move(q2);
      }
      e.eta = eta;
      e.ascent = std::move(p);
      e.descent = std::move(q);
      e.loss_ascent = chain_loss(e.ascent, oracle);
      e.loss_descent = chain_loss(e.descent, oracle);
      return;
    }
  }
  throw Error(ErrorCode::BacktrackExhausted, "no step size separates the losses");
}

// Construction for d_x >= d_y.
EscapePair construct_primal(const LinearChain& W, const L0Oracle& oracle, double eps) {
  const Index H = W.depth();
  const Matrix G = oracle.grad(end_to_end(W));
  const SingularTriplet top = top_singular_vectors(G);
  const Vector& v0 = top.v;

  EscapePair e{W, W};
  e.epsilon = eps;
  e.loss_base = chain_loss(W, oracle);

  const Matrix A_full = chain_product(W, H + 1, 2);
  const Matrix A_H = chain_product(W, H, 2);
  if (nullity(A_full) > nullity(A_H)) {
    e.construction_case = 1;
    const Matrix basis = complement_within(null_space_basis(A_full), null_space_basis(A_H));
    if (basis.cols() == 0)
      throw Error(ErrorCode::CertificateFailed, "empty null-space complement");
    const Vector v1 = basis.col(0);
    LinearChain V = W;
    V.set_factor(1, W.factor(1) + eps * v1 * v0.transpose());
    const Matrix D = G * V.factor(1).transpose() * A_H.transpose();
    const double floor = 1e-12 * G.norm() * V.factor(1).norm() * std::max(1.0, A_H.norm());
    if (!(D.norm() > floor))
      throw Error(ErrorCode::BacktrackExhausted, "escape direction vanishes");
    const Matrix step = eps * D / D.norm();
    e.gamma = eps;
    e.j_star = H + 1;
    e.inner_product = (G.cwiseProduct(step * A_H * V.factor(1))).sum();
    choose_eta(e, V, H + 1, step, oracle);
  } else {
    e.construction_case = 2;
    Index js = 0;
    for (Index j = H; j >= 2 && js == 0; --j)
      if (nullity(chain_product(W, j, 2)) > nullity(chain_product(W, j - 1, 2))) js = j;
    if (js == 0) throw Error(ErrorCode::CertificateFailed, "no layer where the null space grows");
    const Matrix basis = complement_within(null_space_basis(chain_product(W, js, 2)),
                                           null_space_basis(chain_product(W, js - 1, 2)));
    if (basis.cols() == 0)
      throw Error(ErrorCode::CertificateFailed, "empty null-space complement");
    const Vector v1 = basis.col(0);
    // vs[k] for k = js..H+1.
    std::vector<Vector> vs(H + 2);
    vs[H + 1] = top.u;
    for (Index k = js; k <= H; ++k) {
      const Matrix ln = left_null_space_basis(chain_product(W, k, 2));
      if (ln.cols() == 0)
        throw Error(ErrorCode::CertificateFailed, "partial product has trivial left null space");
      vs[k] = ln.col(0);
    }
    const Matrix B = chain_product(W, js - 1, 2);
    double gamma = eps;
    for (int h = 0;; ++h, gamma *= 0.5) {
      if (h > kMaxHalvings)
        throw Error(ErrorCode::BacktrackExhausted, "escape direction vanishes for every gamma");
      LinearChain V = W;
      V.set_factor(1, W.factor(1) + gamma * v1 * v0.transpose());
      for (Index k = js; k <= H; ++k)
        V.set_factor(k + 1, W.factor(k + 1) + gamma * vs[k + 1] * vs[k].transpose());
      const Matrix top_part = chain_product(V, H + 1, js + 1);
      const Matrix D = top_part.transpose() * G * V.factor(1).transpose() * B.transpose();
      const double floor =
          1e-12 * top_part.norm() * G.norm() * V.factor(1).norm() * std::max(1.0, B.norm());
      if (D.norm() > floor) {
        const Matrix step = eps * D / D.norm();
        e.gamma = gamma;
        e.j_star = js;
        e.inner_product = (G.cwiseProduct(top_part * step * B * V.factor(1))).sum();
        choose_eta(e, V, js, step, oracle);
        break;
      }
    }
  }
  e.max_distance_ascent = e.ascent.max_factor_distance(W);
  e.max_distance_descent = e.descent.max_factor_distance(W);
  return e;
}

}  // namespace

LinearChain::LinearChain(std::vector<Matrix> weights) : weights_(std::move(weights)) {
  if (weights_.size() < 2)
    throw Error(ErrorCode::ShapeMismatch, "a linear chain needs H >= 1 (two factors)");
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (weights_[j].rows() < 1 || weights_[j].cols() < 1)
      throw Error(ErrorCode::ShapeMismatch, "empty factor W_" + std::to_string(j + 1));
    if (!weights_[j].allFinite())
      throw Error(ErrorCode::NonFinite, "factor W_" + std::to_string(j + 1) + " is not finite");
    if (j > 0 && weights_[j].cols() != weights_[j - 1].rows())
      throw Error(ErrorCode::ShapeMismatch, "W_" + std::to_string(j + 1) + " does not compose with W_" +
                                                std::to_string(j));
  }
}

LinearChain LinearChain::zeros(const std::vector<Index>& dims) {
  if (dims.size() < 3) throw Error(ErrorCode::ShapeMismatch, "dims needs at least 3 entries");
  std::vector<Matrix> w;
  for (std::size_t j = 1; j < dims.size(); ++j) w.push_back(Matrix::Zero(dims[j], dims[j - 1]));
  return LinearChain(std::move(w));
}

const Matrix& LinearChain::factor(Index j) const {
  if (j < 1 || j > num_factors())
    throw Error(ErrorCode::IndexOutOfRange, "factor index " + std::to_string(j));
  return weights_[j - 1];
}

void LinearChain::set_factor(Index j, Matrix W) {
  const Matrix& old = factor(j);
  if (W.rows() != old.rows() || W.cols() != old.cols())
    throw Error(ErrorCode::ShapeMismatch, "replacement factor has a different shape");
  weights_[j - 1] = std::move(W);
}

std::vector<Index> LinearChain::dims() const {
  std::vector<Index> d{weights_.front().cols()};
  for (const Matrix& w : weights_) d.push_back(w.rows());
  return d;
}

bool LinearChain::width_condition() const {
  const Index lo = std::min(d_x(), d_y());
  for (std::size_t j = 0; j + 1 < weights_.size(); ++j)
    if (weights_[j].rows() < lo) return false;
  return true;
}

LinearChain LinearChain::transposed() const {
  std::vector<Matrix> w;
  for (auto it = weights_.rbegin(); it != weights_.rend(); ++it) w.push_back(it->transpose());
  return LinearChain(std::move(w));
}

double LinearChain::max_factor_distance(const LinearChain& other) const {
  if (other.num_factors() != num_factors())
    throw Error(ErrorCode::ShapeMismatch, "chains differ in depth");
  double m = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j)
    m = std::max(m, (weights_[j] - other.weights_[j]).norm());
  return m;
}

L0Oracle squared_loss_oracle(Matrix X, Matrix Y) {
  if (X.cols() != Y.cols()) throw Error(ErrorCode::ShapeMismatch, "X and Y column counts differ");
  L0Oracle o;
  o.scale = 1.0 + X.norm() * Y.norm() + X.squaredNorm();
  o.crit_implies_global = true;
  o.orientation = Orientation::Minimize;
  auto x = std::make_shared<const Matrix>(std::move(X));
  auto y = std::make_shared<const Matrix>(std::move(Y));
  auto check = [x, y](const Matrix& R) {
    if (R.rows() != y->rows() || R.cols() != x->rows())
      throw Error(ErrorCode::ShapeMismatch, "end-to-end matrix does not match the data shapes");
  };
  o.value = [x, y, check](const Matrix& R) {
    check(R);
    return 0.5 * (R * *x - *y).squaredNorm();
  };
  o.grad = [x, y, check](const Matrix& R) -> Matrix {
    check(R);
    return (R * *x - *y) * x->transpose();
  };
  return o;
}

L0Oracle transposed_oracle(const L0Oracle& oracle) {
  L0Oracle o = oracle;
  o.value = [f = oracle.value](const Matrix& S) { return f(S.transpose()); };
  o.grad = [g = oracle.grad](const Matrix& S) -> Matrix { return g(S.transpose()).transpose(); };
  return o;
}

Matrix chain_product(const LinearChain& chain, Index i, Index j) {
  const Index H = chain.depth();
  if (!(1 <= j && j <= i + 1 && i + 1 <= H + 2))
    throw Error(ErrorCode::IndexOutOfRange,
                "chain_product(" + std::to_string(i) + ", " + std::to_string(j) + ")");
  if (i == j - 1) {
    const Index d = (i == 0) ? chain.d_x() : chain.factor(i).rows();
    return Matrix::Identity(d, d);
  }
  Matrix P = chain.factor(j);
  for (Index k = j + 1; k <= i; ++k) P = chain.factor(k) * P;
  return P;
}

Matrix end_to_end(const LinearChain& chain) {
  return chain_product(chain, chain.depth() + 1, 1);
}

double chain_loss(const LinearChain& chain, const L0Oracle& oracle) {
  return oracle.value(end_to_end(chain));
}

std::vector<Matrix> partial_grads(const LinearChain& chain, const L0Oracle& oracle) {
  const Index H = chain.depth();
  const Matrix G = oracle.grad(end_to_end(chain));
  std::vector<Matrix> out;
  for (Index j = 1; j <= H + 1; ++j)
    out.push_back(chain_product(chain, H + 1, j + 1).transpose() * G *
                  chain_product(chain, j - 1, 1).transpose());
  return out;
}

double max_partial_norm(const LinearChain& chain, const L0Oracle& oracle) {
  double m = 0.0;
  for (const Matrix& g : partial_grads(chain, oracle)) m = std::max(m, g.norm());
  return m;
}

bool is_critical(const LinearChain& chain, const L0Oracle& oracle, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  return max_partial_norm(chain, oracle) <= tol * oracle.scale;
}

EscapePair construct_saddle_perturbations(const LinearChain& chain, const L0Oracle& oracle,
                                          double epsilon, double tol) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!chain.width_condition())
    throw Error(ErrorCode::WidthViolation, "a hidden width is below min(d_x, d_y)");
  if (!is_critical(chain, oracle, tol))
    throw Error(ErrorCode::NotCritical, "chain is not a critical point");
  const Matrix G = oracle.grad(end_to_end(chain));
  if (!(G.norm() > tol * oracle.scale))
    throw Error(ErrorCode::GradientZero, "end-to-end gradient vanishes");

  if (chain.d_x() >= chain.d_y()) return construct_primal(chain, oracle, epsilon);

  // Transposed problem has d_x >= d_y; map the result back.
  EscapePair t = construct_primal(chain.transposed(), transposed_oracle(oracle), epsilon);
  t.ascent = t.ascent.transposed();
  t.descent = t.descent.transposed();
  t.j_star = chain.depth() + 2 - t.j_star;
  t.transposed = true;
  return t;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Saddle: return "Saddle";
    case Verdict::GlobalMin: return "GlobalMin";
    case Verdict::GlobalMax: return "GlobalMax";
    case Verdict::LocalMinTransfer: return "LocalMinTransfer";
    case Verdict::LocalMaxTransfer: return "LocalMaxTransfer";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "Unknown";
}

Classification classify_critical(const LinearChain& chain, const L0Oracle& oracle, double epsilon,
                                 double tol, LocalCertification local) {
  if (!chain.width_condition())
    throw Error(ErrorCode::WidthViolation, "a hidden width is below min(d_x, d_y)");
  Classification c;
  c.max_partial_norm = max_partial_norm(chain, oracle);
  const Matrix G = oracle.grad(end_to_end(chain));
  c.grad_norm = G.norm();
  if (!(c.max_partial_norm <= tol * oracle.scale))
    throw Error(ErrorCode::NotCritical,
                "chain is not critical: max partial norm " + std::to_string(c.max_partial_norm) +
                    ", end-to-end gradient norm " + std::to_string(c.grad_norm));
  c.j_star = find_j_star(chain);
  if (c.grad_norm > tol * oracle.scale) {
    c.verdict = Verdict::Saddle;
    c.escape = construct_saddle_perturbations(chain, oracle, epsilon, tol);
    if (!(c.escape->loss_ascent > c.escape->loss_base &&
          c.escape->loss_base > c.escape->loss_descent))
      throw Error(ErrorCode::CertificateFailed, "escape pair does not bracket the base loss");
  } else if (oracle.crit_implies_global) {
    c.verdict = oracle.orientation == Orientation::Minimize ? Verdict::GlobalMin : Verdict::GlobalMax;
  } else if (local == LocalCertification::LocalMin) {
    c.verdict = Verdict::LocalMinTransfer;
  } else if (local == LocalCertification::LocalMax) {
    c.verdict = Verdict::LocalMaxTransfer;
  } else {
    c.verdict = Verdict::Indeterminate;
  }
  return c;
}

LinearChain decompose_near(const LinearChain& chain, const Matrix& R, Index j_star, double epsilon) {
  const Index H = chain.depth();
  if (j_star < 1 || j_star > H + 1)
    throw Error(ErrorCode::IndexOutOfRange, "j* = " + std::to_string(j_star));
  if (R.rows() != chain.d_y() || R.cols() != chain.d_x())
    throw Error(ErrorCode::ShapeMismatch, "R must be d_y x d_x");
  const Matrix A = chain_product(chain, H + 1, j_star + 1);
  const Matrix B = chain_product(chain, j_star - 1, 1);
  if (numeric_rank(A) < A.rows())
    throw Error(ErrorCode::RankDeficient, "upper partial product lacks full row rank");
  if (numeric_rank(B) < B.cols())
    throw Error(ErrorCode::RankDeficient, "lower partial product lacks full column rank");
  const Matrix diff = R - end_to_end(chain);
  const double radius = smallest_singular_value(A) * smallest_singular_value(B) * epsilon;
  if (diff.norm() > radius * (1.0 + 1e-12))
    throw Error(ErrorCode::RadiusExceeded, "R is farther than sigma_min(A) sigma_min(B) epsilon");
  const Matrix left = A.transpose() * (A * A.transpose()).ldlt().solve(diff);
  const Matrix B_pinv = (B.transpose() * B).ldlt().solve(B.transpose());
  LinearChain out = chain;
  out.set_factor(j_star, chain.factor(j_star) + left * B_pinv);
  return out;
}

LinearChain embed_product(const Matrix& R, const std::vector<Index>& dims) {
  if (dims.size() < 3) throw Error(ErrorCode::ShapeMismatch, "dims needs at least 3 entries");
  const Index dx = dims.front(), dy = dims.back();
  if (R.rows() != dy || R.cols() != dx) throw Error(ErrorCode::ShapeMismatch, "R must be d_y x d_x");
  const Index lo = std::min(dx, dy);
  for (std::size_t j = 1; j + 1 < dims.size(); ++j)
    if (dims[j] < lo) throw Error(ErrorCode::WidthViolation, "a hidden width is below min(d_x, d_y)");
  std::vector<Matrix> w;
  for (std::size_t j = 1; j < dims.size(); ++j) w.push_back(rect_identity(dims[j], dims[j - 1]));
  if (dx >= dy) {
    w.front().setZero();
    w.front().topRows(dy) = R;
  } else {
    w.back().setZero();
    w.back().leftCols(dx) = R;
  }
  return LinearChain(std::move(w));
}

std::optional<Index> find_j_star(const LinearChain& chain, std::optional<double> rel_tol) {
  const Index H = chain.depth();
  for (Index j = 1; j <= H + 1; ++j) {
    const Matrix A = chain_product(chain, H + 1, j + 1);
    const Matrix B = chain_product(chain, j - 1, 1);
    if (numeric_rank(A, rel_tol) == A.rows() && numeric_rank(B, rel_tol) == B.cols()) return j;
  }
  return std::nullopt;
}

}  // namespace landscape
