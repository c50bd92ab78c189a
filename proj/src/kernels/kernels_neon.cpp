#include <arm_neon.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace landscape::kernels::detail {

namespace {

void relu_like(std::span<const double> in, std::span<double> out, double sp, double sm) {
  const std::size_t n = in.size();
  const float64x2_t vsp = vdupq_n_f64(sp);
  const float64x2_t vsm = vdupq_n_f64(sm);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(in.data() + i);
    const float64x2_t a = vmulq_f64(vsp, x);
    const float64x2_t b = vmulq_f64(vsm, x);
    // Select instead of vmaxq/vminq so -0 and NaN follow std::max/std::min.
    const float64x2_t pos = vbslq_f64(vcltq_f64(a, zero), zero, a);
    const float64x2_t neg = vbslq_f64(vcltq_f64(zero, b), zero, b);
    vst1q_f64(out.data() + i, vaddq_f64(pos, neg));
  }
  for (; i < n; ++i) {
    const double x = in[i];
    out[i] = std::max(sp * x, 0.0) + std::min(sm * x, 0.0);
  }
}

void relu_like_slope(std::span<const double> in, std::span<double> out, double sp,
                     double sm) {
  const std::size_t n = in.size();
  const float64x2_t vsp = vdupq_n_f64(sp);
  const float64x2_t vsm = vdupq_n_f64(sm);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(in.data() + i);
    vst1q_f64(out.data() + i, vbslq_f64(vcgeq_f64(x, zero), vsp, vsm));
  }
  for (; i < n; ++i) out[i] = in[i] >= 0.0 ? sp : sm;
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable kNeonTable{Isa::Neon, relu_like, relu_like_slope, sum_sq_diff, dot};

}  // namespace landscape::kernels::detail
