#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops behind the metrics and the enumeration oracle.
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at runtime on capable x86-64 hosts. The two are equivalence-tested
// against each other; within one process a single backend is used throughout,
// so results stay deterministic.
//
// Selection order: KP_KERNELS environment variable ("scalar" or "avx2"),
// else CPU detection, else scalar.

namespace kp::kernels {

enum class Backend { scalar, avx2 };

Backend active();
bool supported(Backend b);
std::string_view name(Backend b);

// Overrides for tests and diagnostics. force() throws kp::ConfigError when the
// backend is not available on this host; reset() returns to auto-detection.
void force(Backend b);
void reset();

// sum_i w[i] * v[i]
double weighted_sum(std::span<const double> v, std::span<const double> w);

// sum_i w[i] * v[i]^2
double weighted_sq_sum(std::span<const double> v, std::span<const double> w);

// sum_i w[i] * (v[i] - mu)^2
double weighted_sq_dev_sum(std::span<const double> v, std::span<const double> w, double mu);

// sum_i w[i] * exp(rate * v[i] - shift)
double exp_weighted_sum(std::span<const double> v, std::span<const double> w, double rate,
                        double shift);

// max over v; v must be nonempty
double max_value(std::span<const double> v);

// dst[i] = min(dst[i], src[i])
void min_inplace(std::span<double> dst, std::span<const double> src);

}  // namespace kp::kernels
