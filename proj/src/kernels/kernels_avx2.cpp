#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "kernels_impl.hpp"

// AVX2+FMA kernels, 4 doubles per lane. Compiled with -mavx2 -mfma; only
// dispatched to after a runtime CPU check.

namespace kp::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// exp(x) on 4 lanes. Range reduction x = n*ln2 + r with a two-term ln2 split,
// degree-13 Taylor on |r| <= ln2/2, then scaling by 2^n applied in two halves
// so subnormal results survive. Inputs outside the finite range of double exp
// saturate to +inf / 0 like std::exp.
inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d overflow_edge = _mm256_set1_pd(709.782712893384);
    const __m256d underflow_edge = _mm256_set1_pd(-745.133219101941);

    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    // Horner over 1/13! .. 1/2!, then 1 + r + r^2 * p(r).
    __m256d p = _mm256_set1_pd(1.6059043836821613e-10);  // 1/13!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.08767569878681e-9));    // 1/12!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.5052108385441717e-8));  // 1/11!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.755731922398589e-7));   // 1/10!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.755731922398589e-6));   // 1/9!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.4801587301587302e-5));  // 1/8!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.984126984126984e-4));   // 1/7!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.3888888888888889e-3));  // 1/6!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(8.333333333333333e-3));   // 1/5!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(4.1666666666666664e-2));  // 1/4!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.6666666666666666e-1));  // 1/3!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(5e-1));                   // 1/2!
    __m256d r2 = _mm256_mul_pd(r, r);
    __m256d result = _mm256_add_pd(_mm256_add_pd(_mm256_set1_pd(1.0), r),
                                   _mm256_mul_pd(r2, p));

    // 2^n in two steps: n = n1 + n2 with n1 = round(n/2).
    __m256d half_n = _mm256_round_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d rest_n = _mm256_sub_pd(n, half_n);
    __m128i n1 = _mm256_cvtpd_epi32(half_n);
    __m128i n2 = _mm256_cvtpd_epi32(rest_n);
    const __m256i bias = _mm256_set1_epi64x(1023);
    __m256i scale1 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1), bias), 52);
    __m256i scale2 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2), bias), 52);
    result = _mm256_mul_pd(result, _mm256_castsi256_pd(scale1));
    result = _mm256_mul_pd(result, _mm256_castsi256_pd(scale2));

    __m256d inf = _mm256_set1_pd(HUGE_VAL);
    __m256d zero = _mm256_setzero_pd();
    result = _mm256_blendv_pd(result, inf, _mm256_cmp_pd(x, overflow_edge, _CMP_GT_OQ));
    result = _mm256_blendv_pd(result, zero, _mm256_cmp_pd(x, underflow_edge, _CMP_LT_OQ));
    return result;
}

double weighted_sum_avx2(const double* v, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(v + i), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * v[i];
    return total;
}

double weighted_sq_sum_avx2(const double* v, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_loadu_pd(v + i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), x), x, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * v[i] * v[i];
    return total;
}

double weighted_sq_dev_sum_avx2(const double* v, const double* w, std::size_t n, double mu) {
    __m256d acc = _mm256_setzero_pd();
    __m256d mean = _mm256_set1_pd(mu);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + i), mean);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d), d, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double d = v[i] - mu;
        total += w[i] * d * d;
    }
    return total;
}

double exp_weighted_sum_avx2(const double* v, const double* w, std::size_t n, double rate,
                             double shift) {
    __m256d acc = _mm256_setzero_pd();
    __m256d vrate = _mm256_set1_pd(rate);
    __m256d vshift = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d arg = _mm256_fmsub_pd(vrate, _mm256_loadu_pd(v + i), vshift);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), exp4(arg), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * std::exp(rate * v[i] - shift);
    return total;
}

double max_value_avx2(const double* v, std::size_t n) {
    if (n < 4) {
        double m = v[0];
        for (std::size_t i = 1; i < n; ++i) m = v[i] > m ? v[i] : m;
        return m;
    }
    __m256d acc = _mm256_loadu_pd(v);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(v + i));
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double m = lanes[0];
    for (int j = 1; j < 4; ++j) m = lanes[j] > m ? lanes[j] : m;
    for (; i < n; ++i) m = v[i] > m ? v[i] : m;
    return m;
}

void min_inplace_avx2(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i,
                         _mm256_min_pd(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(src + i)));
    }
    for (; i < n; ++i) dst[i] = src[i] < dst[i] ? src[i] : dst[i];
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops = {
        weighted_sum_avx2,    weighted_sq_sum_avx2, weighted_sq_dev_sum_avx2,
        exp_weighted_sum_avx2, max_value_avx2,      min_inplace_avx2,
    };
    return ops;
}

}  // namespace kp::kernels::detail
