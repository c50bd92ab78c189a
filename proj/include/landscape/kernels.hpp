#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Hot loops of the activation and loss evaluations. Every routine has a
// scalar reference; wider variants are picked once at runtime.
namespace landscape::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // out[i] = max(sp*x, 0) + min(sm*x, 0)
  void (*relu_like)(std::span<const double> in, std::span<double> out, double sp, double sm);
  // out[i] = x >= 0 ? sp : sm
  void (*relu_like_slope)(std::span<const double> in, std::span<double> out, double sp,
                          double sm);
  double (*sum_sq_diff)(std::span<const double> a, std::span<const double> b);
  double (*dot)(std::span<const double> a, std::span<const double> b);
};

const KernelTable& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Best table available on this machine. LANDSCAPE_ISA=scalar forces the reference.
const KernelTable& active();

}  // namespace landscape::kernels
