#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kp/errors.hpp"
#include "kp/kernels.hpp"

using namespace kp;

namespace {

struct KernelGuard {
    ~KernelGuard() { kernels::reset(); }
};

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = lo + (hi - lo) * u;
    }
    return v;
}

bool close_rel(double a, double b, double tol) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= tol * scale;
}

}  // namespace

TEST_CASE("kernel backend selection") {
    KernelGuard guard;
    kernels::force(kernels::Backend::scalar);
    CHECK(kernels::active() == kernels::Backend::scalar);
    if (kernels::supported(kernels::Backend::avx2)) {
        kernels::force(kernels::Backend::avx2);
        CHECK(kernels::active() == kernels::Backend::avx2);
    } else {
        CHECK_THROWS_AS(kernels::force(kernels::Backend::avx2), ConfigError);
    }
    kernels::reset();
    CHECK(kernels::supported(kernels::Backend::scalar));
}

TEST_CASE("scalar reference semantics") {
    KernelGuard guard;
    kernels::force(kernels::Backend::scalar);
    std::vector<double> v = {1.0, 2.0, 3.0};
    std::vector<double> w = {2.0, 0.5, 1.0};
    CHECK(kernels::weighted_sum(v, w) == doctest::Approx(6.0));
    CHECK(kernels::weighted_sq_sum(v, w) == doctest::Approx(2.0 + 2.0 + 9.0));
    CHECK(kernels::weighted_sq_dev_sum(v, w, 2.0) == doctest::Approx(2.0 + 0.0 + 1.0));
    CHECK(kernels::max_value(v) == 3.0);
    CHECK(kernels::weighted_sum(std::vector<double>{}, std::vector<double>{}) == 0.0);

    std::vector<double> dst = {5.0, 1.0, 7.0};
    kernels::min_inplace(dst, v);
    CHECK(dst == std::vector<double>{1.0, 1.0, 3.0});
}

TEST_CASE("avx2 kernels match the scalar reference") {
    if (!kernels::supported(kernels::Backend::avx2)) return;
    KernelGuard guard;
    std::mt19937_64 rng(20240811);
    for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(4), std::size_t(7),
                          std::size_t(64), std::size_t(1001)}) {
        std::vector<double> v = random_vec(rng, n, 0.0, 5000.0);
        std::vector<double> w = random_vec(rng, n, 1.0, 100.0);
        const double rate = -1e-3, shift = 0.0;

        kernels::force(kernels::Backend::scalar);
        const double s1 = kernels::weighted_sum(v, w);
        const double s2 = kernels::weighted_sq_sum(v, w);
        const double s3 = kernels::weighted_sq_dev_sum(v, w, 2500.0);
        const double s4 = kernels::exp_weighted_sum(v, w, rate, shift);
        const double s5 = kernels::max_value(v);
        std::vector<double> dst_s = random_vec(rng, n, 0.0, 5000.0);
        std::vector<double> dst_a = dst_s;
        kernels::min_inplace(dst_s, v);

        kernels::force(kernels::Backend::avx2);
        CHECK(close_rel(s1, kernels::weighted_sum(v, w), 1e-13));
        CHECK(close_rel(s2, kernels::weighted_sq_sum(v, w), 1e-13));
        CHECK(close_rel(s3, kernels::weighted_sq_dev_sum(v, w, 2500.0), 1e-13));
        CHECK(close_rel(s4, kernels::exp_weighted_sum(v, w, rate, shift), 1e-13));
        CHECK(s5 == kernels::max_value(v));
        kernels::min_inplace(dst_a, v);
        CHECK(dst_s == dst_a);  // min is exact in both backends
    }
}

TEST_CASE("vector exp accuracy against std::exp") {
    if (!kernels::supported(kernels::Backend::avx2)) return;
    KernelGuard guard;
    kernels::force(kernels::Backend::avx2);
    std::mt19937_64 rng(7);
    const std::vector<double> ones = {1.0, 1.0, 1.0, 1.0};
    for (int i = 0; i < 20000; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double x = -700.0 + 1400.0 * u;
        // A full lane so the vector path (not the scalar tail) is exercised.
        const std::vector<double> lane = {x, x, x, x};
        const double lane_sum = kernels::exp_weighted_sum(lane, ones, 1.0, 0.0);
        CHECK(close_rel(lane_sum / 4.0, std::exp(x), 5e-15));
    }
    // Saturation at the double range edges.
    const std::vector<double> big = {710.0, 710.0, 710.0, 710.0};
    CHECK(std::isinf(kernels::exp_weighted_sum(big, ones, 1.0, 0.0)));
    const std::vector<double> tiny = {-800.0, -800.0, -800.0, -800.0};
    CHECK(kernels::exp_weighted_sum(tiny, ones, 1.0, 0.0) == 0.0);
    // Subnormal results survive the two-step scaling.
    const std::vector<double> sub = {-744.0, -744.0, -744.0, -744.0};
    const double got = kernels::exp_weighted_sum(sub, ones, 1.0, 0.0) / 4.0;
    CHECK(close_rel(got, std::exp(-744.0), 1e-9));
}
