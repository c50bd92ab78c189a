#pragma once

#include <cstdint>
#include <optional>

#include "landscape/activation.hpp"
#include "landscape/matrixcore.hpp"

namespace landscape {

// Y_hat = W2 h(W1 X + b1 1^T) + b2 1^T
struct OneHiddenParams {
  Matrix W1;  // d1 x d_x
  Vector b1;  // d1
  Matrix W2;  // d_y x d1
  Vector b2;  // d_y

  Index input_dim() const { return W1.cols(); }
  Index hidden_width() const { return W1.rows(); }
  Index output_dim() const { return W2.rows(); }

  static OneHiddenParams zeros(Index d_x, Index d1, Index d_y);

  // Throws ShapeMismatch / NonFinite.
  void validate() const;
  double norm() const;  // Frobenius norm over all four blocks
  Index parameter_count() const;

  OneHiddenParams operator+(const OneHiddenParams& o) const;
  OneHiddenParams operator-(const OneHiddenParams& o) const;
  OneHiddenParams operator*(double c) const;
};

Matrix preactivations(const OneHiddenParams& p, const Matrix& X);
Matrix forward(const OneHiddenParams& p, const Activation& act, const Matrix& X);
double loss(const OneHiddenParams& p, const Activation& act, const Dataset& data);

// Analytic gradient of loss. Piecewise-linear activations throw AtKinkError
// when any preactivation lies within 1e-12 * (1 + max|z|) of zero.
OneHiddenParams gradient(const OneHiddenParams& p, const Activation& act, const Dataset& data);

OneHiddenParams fd_gradient(const OneHiddenParams& p, const Activation& act, const Dataset& data,
                            double step = 1e-6);

struct ProbeOptions {
  double radius = 1e-4;  // relative to 1 + ||p||
  std::size_t samples = 4096;
  std::uint64_t seed = 42;
  unsigned workers = 0;  // 0: hardware concurrency, capped at 8
};

struct ProbeViolation {
  std::size_t sample = 0;
  double loss = 0.0;
  OneHiddenParams delta;
};

struct ProbeReport {
  std::size_t samples = 0;
  double radius = 0.0;      // relative radius as requested
  double abs_radius = 0.0;  // radius * (1 + ||p||)
  double min_loss_found = 0.0;
  std::size_t argmin_sample = 0;
  double base_loss = 0.0;
  double slack = 0.0;
  std::uint64_t seed = 0;
  std::optional<ProbeViolation> violation;
};

// Loss at `samples` random points, each block drawn uniformly from its own
// Frobenius ball of radius abs_radius. Sample i uses its own RNG stream
// seeded by (seed, i), so the report does not depend on the worker count.
ProbeReport probe_local_min(const OneHiddenParams& p, const Activation& act, const Dataset& data,
                            const ProbeOptions& options = {});

}  // namespace landscape
