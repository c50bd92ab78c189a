#pragma once

#include "landscape/kernels.hpp"

namespace landscape::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(LANDSCAPE_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(LANDSCAPE_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace landscape::kernels::detail
