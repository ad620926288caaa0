#pragma once

#include "scanalr/simd/kernels.hpp"

namespace scanalr::simd {

namespace scalar {
extern const KernelTable table;
}

#if defined(SCANALR_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif

}  // namespace scanalr::simd
