#pragma once

#include "wts/kernels.hpp"

namespace wts::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(WTS_HAVE_AVX2_KERNELS)
extern const KernelTable kAvx2Table;
#endif

} // namespace wts::kernels::detail
