#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "landscape/matrixcore.hpp"

namespace landscape {

// Weights W_1..W_{H+1} of a linear network; W_j is d_j x d_{j-1}.
// Layer indices are 1-based throughout, matching W_j.
class LinearChain {
 public:
  explicit LinearChain(std::vector<Matrix> weights);
  static LinearChain zeros(const std::vector<Index>& dims);

  Index depth() const { return static_cast<Index>(weights_.size()) - 1; }  // H
  Index num_factors() const { return static_cast<Index>(weights_.size()); }
  const std::vector<Matrix>& weights() const { return weights_; }
  const Matrix& factor(Index j) const;
  // Replaces W_j; the shape must not change.
  void set_factor(Index j, Matrix W);

  std::vector<Index> dims() const;  // d_0 .. d_{H+1}
  Index d_x() const { return weights_.front().cols(); }
  Index d_y() const { return weights_.back().rows(); }

  // Every hidden width is at least min(d_x, d_y).
  bool width_condition() const;

  // Reversed order, each factor transposed: the chain of the transposed map.
  LinearChain transposed() const;

  double max_factor_distance(const LinearChain& other) const;

 private:
  std::vector<Matrix> weights_;
};

enum class Orientation { Minimize, Maximize };

// Loss of the end-to-end matrix R (d_y x d_x) and its gradient.
struct L0Oracle {
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> grad;
  // Every critical point of the loss is a global optimum (convex or concave loss).
  bool crit_implies_global = false;
  // Which kind of global optimum crit_implies_global refers to.
  Orientation orientation = Orientation::Minimize;
  // Magnitude reference for tolerances.
  double scale = 1.0;
};

// 0.5 ||R X - Y||_F^2; scale = 1 + ||X|| ||Y|| + ||X||^2.
L0Oracle squared_loss_oracle(Matrix X, Matrix Y);

// Oracle of S -> value(S^T), for use with LinearChain::transposed().
L0Oracle transposed_oracle(const L0Oracle& oracle);

// W_i W_{i-1} ... W_j; identity of size d_i when i = j - 1.
Matrix chain_product(const LinearChain& chain, Index i, Index j);
Matrix end_to_end(const LinearChain& chain);

double chain_loss(const LinearChain& chain, const L0Oracle& oracle);

// Partial derivatives with respect to W_1..W_{H+1} (0-based vector).
std::vector<Matrix> partial_grads(const LinearChain& chain, const L0Oracle& oracle);

double max_partial_norm(const LinearChain& chain, const L0Oracle& oracle);

bool is_critical(const LinearChain& chain, const L0Oracle& oracle, double tol = 1e-9);

struct EscapePair {
  LinearChain ascent;   // P: loss strictly above the base point
  LinearChain descent;  // Q: loss strictly below
  double loss_base = 0.0;
  double loss_ascent = 0.0;
  double loss_descent = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  int construction_case = 1;  // 1: start layer moves only; 2: a block of layers moves
  Index j_star = 0;           // factor that carries the eta step
  bool transposed = false;    // built on the transposed chain (d_y > d_x)
  double inner_product = 0.0;  // <grad, d(product)/d(eta)>
  double max_distance_ascent = 0.0;
  double max_distance_descent = 0.0;
};

// Chains within epsilon (per factor) of a critical chain whose end-to-end
// gradient is nonzero, one above and one below in loss.
EscapePair construct_saddle_perturbations(const LinearChain& chain, const L0Oracle& oracle,
                                          double epsilon, double tol = 1e-9);

enum class Verdict { Saddle, GlobalMin, GlobalMax, LocalMinTransfer, LocalMaxTransfer, Indeterminate };

std::string_view to_string(Verdict v);

// What the caller knows about the end-to-end loss at the product.
enum class LocalCertification { None, LocalMin, LocalMax };

struct Classification {
  Verdict verdict = Verdict::Indeterminate;
  double grad_norm = 0.0;         // ||grad l0(product)||_F
  double max_partial_norm = 0.0;
  std::optional<Index> j_star;    // rank condition index, when it holds
  std::optional<EscapePair> escape;
};

Classification classify_critical(const LinearChain& chain, const L0Oracle& oracle, double epsilon,
                                 double tol = 1e-9,
                                 LocalCertification local = LocalCertification::None);

// Moves one factor so that the product becomes R.
LinearChain decompose_near(const LinearChain& chain, const Matrix& R, Index j_star,
                           double epsilon);

// Chain of padded identities whose product is exactly R.
LinearChain embed_product(const Matrix& R, const std::vector<Index>& dims);

// Smallest j with W_{H+1:j+1} of full row rank and W_{j-1:1} of full column rank.
std::optional<Index> find_j_star(const LinearChain& chain,
                                 std::optional<double> rel_tol = std::nullopt);

}  // namespace landscape
