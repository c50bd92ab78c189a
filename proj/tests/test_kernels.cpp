#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "landscape/kernels.hpp"

using namespace landscape::kernels;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> v;
  if (const KernelTable* t = avx2_table()) v.push_back(t);
  if (const KernelTable* t = neon_table()) v.push_back(t);
  return v;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("scalar reference matches the defining formula") {
  const KernelTable& s = scalar_table();
  std::vector<double> in{-2.0, -0.5, 0.0, 0.5, 3.0}, out(5);
  s.relu_like(in, out, 1.5, 0.25);
  CHECK(out[0] == -0.5);
  CHECK(out[1] == -0.125);
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 0.75);
  CHECK(out[4] == 4.5);
  s.relu_like_slope(in, out, 1.5, 0.25);
  CHECK(out[0] == 0.25);
  CHECK(out[2] == 1.5);
  CHECK(out[4] == 1.5);
  const std::vector<double> a{1, 2, 3}, b{0, 4, 1};
  CHECK(s.sum_sq_diff(a, b) == 9.0);
  CHECK(s.dot(a, b) == 11.0);
  CHECK(s.sum_sq_diff(std::span<const double>(), std::span<const double>()) == 0.0);
}

TEST_CASE("active table is one of the compiled variants") {
  const KernelTable& t = active();
  CHECK((&t == &scalar_table() || &t == avx2_table() || &t == neon_table()));
  MESSAGE("active kernels: " << to_string(t.isa));
}

TEST_CASE("property: SIMD activations are bit-identical to scalar") {
  std::mt19937_64 rng(21);
  for (const KernelTable* t : variants()) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 1001u}) {
      std::vector<double> in = random_vec(n, rng);
      if (n > 2) {
        in[0] = 0.0;
        in[1] = -0.0;
        in[2] = std::numeric_limits<double>::denorm_min();
      }
      for (auto [sp, sm] : {std::pair{1.0, 0.0}, {1.5, 1.0}, {0.3, 2.0}}) {
        std::vector<double> ref(n), got(n);
        scalar_table().relu_like(in, ref, sp, sm);
        t->relu_like(in, got, sp, sm);
        for (std::size_t i = 0; i < n; ++i) CHECK(bit_equal(ref[i], got[i]));
        scalar_table().relu_like_slope(in, ref, sp, sm);
        t->relu_like_slope(in, got, sp, sm);
        for (std::size_t i = 0; i < n; ++i) CHECK(bit_equal(ref[i], got[i]));
      }
    }
  }
}

TEST_CASE("property: SIMD reductions agree with scalar to rounding") {
  std::mt19937_64 rng(22);
  for (const KernelTable* t : variants()) {
    for (std::size_t n : {0u, 1u, 2u, 5u, 8u, 13u, 16u, 17u, 100u, 4097u}) {
      const std::vector<double> a = random_vec(n, rng), b = random_vec(n, rng);
      double abs_sum = 0.0, sq_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        abs_sum += std::abs(a[i] * b[i]);
        sq_sum += (a[i] - b[i]) * (a[i] - b[i]);
      }
      const double tol = 4.0 * static_cast<double>(n + 1) * 1.1e-16;
      CHECK(std::abs(t->sum_sq_diff(a, b) - scalar_table().sum_sq_diff(a, b)) <= tol * sq_sum);
      CHECK(std::abs(t->dot(a, b) - scalar_table().dot(a, b)) <= tol * abs_sum);
    }
  }
}

TEST_CASE("positive homogeneity of the activation kernel") {
  std::mt19937_64 rng(23);
  const std::vector<double> in = random_vec(257, rng);
  std::vector<double> base(in.size()), scaled_in(in.size()), scaled(in.size());
  active().relu_like(in, base, 1.5, 0.5);
  for (double c : {0.0, 0.5, 2.0, 8.0}) {  // powers of two keep the products exact
    for (std::size_t i = 0; i < in.size(); ++i) scaled_in[i] = c * in[i];
    active().relu_like(scaled_in, scaled, 1.5, 0.5);
    for (std::size_t i = 0; i < in.size(); ++i) CHECK(scaled[i] == c * base[i]);
  }
}
