#pragma once

#include <optional>
#include <vector>

#include "landscape/netmodel.hpp"

namespace landscape {

// Sorted view of a single-output least-squares fit.
struct BoundarySet {
  std::vector<Index> order;          // order[k]: original index of the k-th smallest prediction
  std::vector<double> y_hat_sorted;  // predictions in sorted order
  std::vector<double> y_sorted;      // labels in the same order
  std::vector<double> partial_sums;  // partial_sums[j] = sum_{k<=j} (y_hat - y), j = 0..m-2
  std::vector<Index> indices;        // sorted positions j where the split between j and j+1 helps
  double tol = 0.0;                  // partial-sum threshold
  double tol_dup = 0.0;              // predictions closer than this count as equal
};

// Uses tol = 1e-9 * (1 + ||Y||_inf) unless given; tol_dup = 1e-9 * (1 + max|y_hat|).
BoundarySet compute_boundary_set(const LeastSquaresFit& fit, const Dataset& data,
                                 std::optional<double> tol = std::nullopt);

struct Step1Options {
  Index hidden_width = 2;
  // Relative probe radius. When unset: min(1e-4, the radius that keeps every
  // preactivation positive).
  std::optional<double> probe_radius;
  std::size_t probe_samples = 4096;
  std::uint64_t seed = 42;
};

struct Step1Certificate {
  double alpha = 0.0;
  double eta = 0.0;
  OneHiddenParams params;
  LeastSquaresFit fit;
  double loss_at_min = 0.0;
  double baseline_loss0 = 0.0;
  double min_preactivation = 0.0;      // over active units and samples
  double residual_orthogonality = 0.0;  // ||(Y_hat - Y) X_aug^T||_inf
  double margin_limited_radius = 0.0;  // relative radius keeping preactivations positive
  ProbeReport probe;
};

// Local minimum whose loss equals the least-squares loss: every hidden unit
// stays in its linear region, so the network reproduces the linear fit.
Step1Certificate construct_local_min(const Dataset& data, const Activation& act, double alpha,
                                     const Step1Options& options = {});

enum class Step2Case { Case1, Case2 };

struct Case2Details {
  double y_star = 0.0;
  std::vector<Index> tied;           // original indices with prediction y_star
  std::vector<Index> tied_nonzero;   // tied members with nonzero residual
  std::vector<Index> tied_ge;        // <x_j, x_j1> >= ||x_j1||^2
  std::vector<Index> tied_lt;
  Index j1 = 0;
  Index j2 = 0;
  Index split_position = 0;  // position of j1 in the permutation; left group is [0, split]
  Vector v;
  double g = 0.0;
  double M = 0.0;
  double alpha = 0.0;
  double left_max = 0.0;   // max over left group of y_hat - alpha v.x - beta (must be < 0)
  double right_min = 0.0;  // min over right group (must be > 0)
  double residual_split = 0.0;  // right residual sum minus left residual sum
  double residual_split_expected = 0.0;  // -2 * residual at j1
  bool fit_diagnostics_ok = false;
};

struct Step2Certificate {
  Step2Case which = Step2Case::Case1;
  BoundarySet boundary;
  std::vector<Index> permutation;
  std::optional<Index> j0;  // sorted position, Case 1
  std::optional<Case2Details> case2;
  double beta = 0.0;
  double gamma = 0.0;
  double gamma_bound = 0.0;
  int halvings = 0;
  OneHiddenParams params;
  double loss_better = 0.0;
  double baseline_loss0 = 0.0;
  double margin = 0.0;  // baseline_loss0 - loss_better
  bool sign_structure_ok = false;
};

// Point with loss strictly below the least-squares loss.
Step2Certificate construct_better_point(const Dataset& data, const Activation& act,
                                        Index hidden_width = 2);

struct SpuriousCertificate {
  Step1Certificate step1;
  Step2Certificate step2;
  double gap = 0.0;
};

SpuriousCertificate certify_spurious(const Dataset& data, const Activation& act, double alpha,
                                     const Step1Options& options = {});

}  // namespace landscape
