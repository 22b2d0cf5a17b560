#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kp/instance.hpp"
#include "kp/model.hpp"
#include "kp/solvers.hpp"

namespace kp {

// Score anchors for penalty planning: the unpenalized optimum with every site
// available (k_all) and with the penalized set removed (k_rem), solved with
// the same kappa so the bracket k_all <= K* <= k_rem applies.
struct KhatAnchors {
    double k_all = 0.0;
    double k_rem = 0.0;
    double sigma_all = 0.0;  // penalty mass of the all-sites optimum
    int n_selected = 0;      // penalized sites opened by the all-sites optimum
    std::vector<std::string> open_all;
};

KhatAnchors solve_khat_anchors(const Instance& instance, const ModelRequest& request,
                               const SolverBackend& backend,
                               const std::vector<std::pair<std::string, double>>& penalized);

struct PlanOptions {
    double error_budget = 1e-3;            // meters; target linearization error
    std::optional<double> width_override;  // force a uniform grid width
    bool keep_costs = false;               // keep caller costs instead of (k_rem-k_all)/N
};

// The closing strategy: anchor at k_all, scale equal penalties to
// (k_rem - k_all) / N, and pick the tangent grid (exact when penalties are
// equal, uniform under the error budget otherwise).
PenaltyPlan recommend_plan(const Instance& instance, const ModelRequest& request,
                           const SolverBackend& backend,
                           std::vector<std::pair<std::string, double>> penalized,
                           const PlanOptions& options = {});

struct ExponentCheck {
    bool sigma_max_le_mu = false;
    bool exponent_le_abs_eps = false;  // -kappa * sigma_max <= |epsilon|
    bool per_site_ok = false;          // max c <= mu / min(k, |U|)
    double mu = 0.0;
    double sigma_max = 0.0;
    double exponent = 0.0;
};

ExponentCheck exponent_range_check(const PenaltyPlan& plan, const Distribution& alpha_dist,
                                   const InequalityParams& params);

// Measured penalty errors from the exact oracle: solves the penalized model
// with the exact exponential penalty, then prices the same optimum through
// the anchored penalty (sigma_hat) and the tangent hull (sigma_ddot).
struct PenaltyMeasurement {
    double sigma_star = 0.0;
    double k_star = 0.0;
    double delta = 0.0;      // khat - K*
    double sigma_hat = 0.0;
    double sigma_ddot = 0.0;
    double hat_error = 0.0;  // sigma_hat - sigma_star
    SolveResult result;
};

PenaltyMeasurement measure_penalty_errors(const Instance& instance, const ModelRequest& request,
                                          const SolverBackend& backend);

// Instance with the given sites removed; throws InfeasibleError when an
// origin would lose all of its distance entries.
Instance remove_sites(const Instance& instance, const std::vector<std::string>& site_ids);

}  // namespace kp
