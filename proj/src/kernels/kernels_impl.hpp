#pragma once

#include <cstddef>

// Internal dispatch table shared by the kernel backends.

namespace kp::kernels::detail {

struct Ops {
    double (*weighted_sum)(const double*, const double*, std::size_t);
    double (*weighted_sq_sum)(const double*, const double*, std::size_t);
    double (*weighted_sq_dev_sum)(const double*, const double*, std::size_t, double);
    double (*exp_weighted_sum)(const double*, const double*, std::size_t, double, double);
    double (*max_value)(const double*, std::size_t);
    void (*min_inplace)(double*, const double*, std::size_t);
};

const Ops& scalar_ops();

#if defined(KPFL_HAVE_AVX2)
const Ops& avx2_ops();
#endif

}  // namespace kp::kernels::detail
