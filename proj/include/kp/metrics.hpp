#pragma once

#include "kp/distribution.hpp"

namespace kp {

// (epsilon, alpha, kappa) with kappa = alpha * epsilon. Only the disamenity
// orientation is supported: epsilon < 0, alpha > 0, hence kappa < 0.
struct InequalityParams {
    double epsilon = 0.0;  // dimensionless
    double alpha = 0.0;    // per meter
    double kappa = 0.0;    // per meter
};

InequalityParams make_params(double alpha, double epsilon);

// alpha = sum(w z) / sum(w z^2); errors on an all-zero distribution.
double alpha(const Distribution& dist);

// -(1/kappa) * ln[(1/T) sum w e^{-kappa z}], stabilized by factoring out
// e^{-kappa * max z}. Requires kappa < 0.
double kolm_pollak_ede(const Distribution& dist, double kappa);

struct AutoEde {
    double ede = 0.0;
    InequalityParams params;
};

// Per-distribution normalization: alpha from the distribution itself,
// kappa = alpha * epsilon.
AutoEde kolm_pollak_ede_auto(const Distribution& dist, double epsilon);

// sum w e^{-kappa z}. Computed in log-sum-exp form when any exponent
// exceeds 700; errors if the result itself cannot be represented.
double linear_proxy(const Distribution& dist, double kappa);

// -(1/kappa) * ln(proxy / T); requires proxy > 0.
double ede_from_proxy(double proxy, double kappa, double total_weight);

// alpha_in * epsilon_0 / alpha_out: the inequality aversion realized by a
// solution scored with alpha_out after optimizing with alpha_in.
double epsilon_out(double alpha_in, double epsilon_0, double alpha_out);

SummaryStats summarize(const Distribution& dist, const InequalityParams& params);

}  // namespace kp
