#include <immintrin.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace landscape::kernels::detail {

namespace {

// Same operation order as the scalar path so results are bit-identical.
void relu_like(std::span<const double> in, std::span<double> out, double sp, double sm) {
  const std::size_t n = in.size();
  const __m256d vsp = _mm256_set1_pd(sp);
  const __m256d vsm = _mm256_set1_pd(sm);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in.data() + i);
    // max/min argument order matches std::max(a, 0) / std::min(a, 0) on NaN and -0.
    const __m256d pos = _mm256_max_pd(zero, _mm256_mul_pd(vsp, x));
    const __m256d neg = _mm256_min_pd(zero, _mm256_mul_pd(vsm, x));
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(pos, neg));
  }
  for (; i < n; ++i) {
    const double x = in[i];
    out[i] = std::max(sp * x, 0.0) + std::min(sm * x, 0.0);
  }
}

void relu_like_slope(std::span<const double> in, std::span<double> out, double sp,
                     double sm) {
  const std::size_t n = in.size();
  const __m256d vsp = _mm256_set1_pd(sp);
  const __m256d vsm = _mm256_set1_pd(sm);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in.data() + i);
    const __m256d ge = _mm256_cmp_pd(x, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(out.data() + i, _mm256_blendv_pd(vsm, vsp, ge));
  }
  for (; i < n; ++i) out[i] = in[i] >= 0.0 ? sp : sm;
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4),
                           acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable kAvx2Table{Isa::Avx2, relu_like, relu_like_slope, sum_sq_diff, dot};

}  // namespace landscape::kernels::detail
