#include <cmath>
#include <cstddef>

#include "kernels_impl.hpp"

// Reference kernels. Plain loops, one accumulator; these define the semantics
// the vector variants are tested against.

namespace kp::kernels::detail {

namespace {

double weighted_sum_scalar(const double* v, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * v[i];
    return acc;
}

double weighted_sq_sum_scalar(const double* v, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * v[i] * v[i];
    return acc;
}

double weighted_sq_dev_sum_scalar(const double* v, const double* w, std::size_t n, double mu) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = v[i] - mu;
        acc += w[i] * d * d;
    }
    return acc;
}

double exp_weighted_sum_scalar(const double* v, const double* w, std::size_t n, double rate,
                               double shift) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::exp(rate * v[i] - shift);
    return acc;
}

double max_value_scalar(const double* v, std::size_t n) {
    double m = v[0];
    for (std::size_t i = 1; i < n; ++i) m = v[i] > m ? v[i] : m;
    return m;
}

void min_inplace_scalar(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] < dst[i] ? src[i] : dst[i];
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        weighted_sum_scalar,    weighted_sq_sum_scalar, weighted_sq_dev_sum_scalar,
        exp_weighted_sum_scalar, max_value_scalar,      min_inplace_scalar,
    };
    return ops;
}

}  // namespace kp::kernels::detail
