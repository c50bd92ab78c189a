#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace landscape::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return detail::kScalarTable; }

const KernelTable* avx2_table() {
#if defined(LANDSCAPE_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(LANDSCAPE_HAVE_NEON)
  return &detail::kNeonTable;  // Advanced SIMD is mandatory on AArch64.
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("LANDSCAPE_ISA");
    if (env && std::string_view(env) == "scalar") return &detail::kScalarTable;
    if (const KernelTable* t = avx2_table()) return t;
    if (const KernelTable* t = neon_table()) return t;
    return &detail::kScalarTable;
  }();
  return *chosen;
}

}  // namespace landscape::kernels
