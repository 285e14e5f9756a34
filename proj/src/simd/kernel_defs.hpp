#pragma once

// Private declarations shared by the kernel translation units.

#include "biosim/simd/kernels.hpp"

namespace biosim::simd::detail {

extern const KernelTable kScalarTable;
#if defined(BIOSIM_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(BIOSIM_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace biosim::simd::detail
