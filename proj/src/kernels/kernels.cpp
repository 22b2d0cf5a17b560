#include "kp/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "kp/errors.hpp"

namespace kp::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(KPFL_HAVE_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect() {
    if (const char* env = std::getenv("KP_KERNELS")) {
        std::string v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2") {
            if (!supported(Backend::avx2))
                throw ConfigError("KP_KERNELS=avx2 but this host lacks AVX2/FMA");
            return Backend::avx2;
        }
        if (!v.empty() && v != "auto")
            throw ConfigError("KP_KERNELS must be scalar, avx2, or auto (got '" + v + "')");
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<const detail::Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const detail::Ops& ops_for(Backend b) {
#if defined(KPFL_HAVE_AVX2)
    if (b == Backend::avx2) return detail::avx2_ops();
#endif
    (void)b;
    return detail::scalar_ops();
}

const detail::Ops& ops() {
    const detail::Ops* p = g_ops.load(std::memory_order_acquire);
    if (p) return *p;
    Backend b = detect();
    g_backend.store(b, std::memory_order_relaxed);
    p = &ops_for(b);
    g_ops.store(p, std::memory_order_release);
    return *p;
}

}  // namespace

Backend active() {
    ops();
    return g_backend.load(std::memory_order_relaxed);
}

bool supported(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
            return cpu_has_avx2();
    }
    return false;
}

std::string_view name(Backend b) {
    switch (b) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
    }
    return "unknown";
}

void force(Backend b) {
    if (!supported(b))
        throw ConfigError(std::string("kernel backend unavailable on this host: ") +
                          std::string(name(b)));
    g_backend.store(b, std::memory_order_relaxed);
    g_ops.store(&ops_for(b), std::memory_order_release);
}

void reset() {
    g_ops.store(nullptr, std::memory_order_release);
}

double weighted_sum(std::span<const double> v, std::span<const double> w) {
    return ops().weighted_sum(v.data(), w.data(), v.size());
}

double weighted_sq_sum(std::span<const double> v, std::span<const double> w) {
    return ops().weighted_sq_sum(v.data(), w.data(), v.size());
}

double weighted_sq_dev_sum(std::span<const double> v, std::span<const double> w, double mu) {
    return ops().weighted_sq_dev_sum(v.data(), w.data(), v.size(), mu);
}

double exp_weighted_sum(std::span<const double> v, std::span<const double> w, double rate,
                        double shift) {
    return ops().exp_weighted_sum(v.data(), w.data(), v.size(), rate, shift);
}

double max_value(std::span<const double> v) {
    return ops().max_value(v.data(), v.size());
}

void min_inplace(std::span<double> dst, std::span<const double> src) {
    ops().min_inplace(dst.data(), src.data(), dst.size());
}

}  // namespace kp::kernels
