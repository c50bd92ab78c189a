#include <algorithm>

#include "kernels_internal.hpp"

namespace landscape::kernels::detail {

namespace {

void relu_like(std::span<const double> in, std::span<double> out, double sp, double sm) {
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = in[i];
    out[i] = std::max(sp * x, 0.0) + std::min(sm * x, 0.0);
  }
}

void relu_like_slope(std::span<const double> in, std::span<double> out, double sp,
                     double sm) {
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] >= 0.0 ? sp : sm;
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable kScalarTable{Isa::Scalar, relu_like, relu_like_slope, sum_sq_diff, dot};

}  // namespace landscape::kernels::detail
