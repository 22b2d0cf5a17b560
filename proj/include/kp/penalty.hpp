#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kp {

// Everything needed to attach distance penalties to the linear proxy model:
// the penalized set with per-site costs, the score anchor khat, and the
// tangent grid for the exponential penalty term.
struct PenaltyPlan {
    enum class KhatMode { k_all, k_rem, user };

    std::vector<std::pair<std::string, double>> penalized;  // (site id, c_s meters), id-sorted
    double khat = 0.0;                                      // meters
    KhatMode khat_mode = KhatMode::user;
    double sigma_max = 0.0;  // max achievable sum of selected penalties, meters
    double width = 0.0;      // tangent spacing w (dimensionless); 0 = irregular grid
    std::vector<double> betas;  // strictly increasing from 0, last >= -kappa*sigma_max
    bool exact_mode = false;    // equal penalties with w = -kappa*c (no linearization error)
    int selection_cap = 0;      // min(k, |U|)

    // Anchors recorded by the planner; NaN / -1 when not computed.
    double k_all = 0.0, k_rem = 0.0, sigma_all = 0.0;
    int n_selected = -1;  // penalized sites opened by the unpenalized all-sites solve
    std::vector<std::string> warnings;

    double cost_of(const std::string& site_id) const;
    bool penalizes(const std::string& site_id) const;
};

// Objective-space penalty equivalent to adding sigma meters to the score:
// T e^{-kappa khat} (e^{-kappa sigma} - 1).
double proxy_space_penalty(double khat, double sigma, double kappa, double total_weight);

// Signed error in the applied penalty caused by anchoring at khat = K* + delta:
// -(1/kappa) ln(e^{kappa sigma*} + e^{-kappa delta}(1 - e^{kappa sigma*})).
// Positive for delta > 0 (over-penalized), negative for delta < 0.
double khat_penalty_error(double delta, double sigma_star, double kappa);

struct ErrorBounds {
    double lower = 0.0;  // on |error|
    double upper = 0.0;
};
ErrorBounds khat_penalty_error_bounds(double delta, double sigma_star, double kappa);

// Bounds on sigma* - sigma_hat when khat anchors at the all-sites optimum
// (under-penalization case): the tighter value uses sigma*, the outer one
// only sigma_all.
struct UnderPenaltyBound {
    double at_sigma_star = 0.0;
    double at_sigma_all = 0.0;
};
UnderPenaltyBound under_penalty_bound(double sigma_all, double sigma_star, double kappa);

// Worst gap between e^x and its bounding tangents over a width-w interval at
// base point 0; scales by e^a on [a, a+w].
double tangent_gap(double width);

// Bound on the additional penalty error introduced by the tangent
// linearization with a uniform grid of spacing w.
struct TangentBound {
    double exact = 0.0;       // (1/kappa) ln(1 - A(w) / (1 + e^{kappa sigma*}(e^{kappa delta}-1)))
    double case_bound = 0.0;  // delta<=0 or khat=k_rem case; NaN when neither applies
};
TangentBound linearization_error_bound(double width, double delta, double sigma_star, double kappa,
                                       PenaltyPlan::KhatMode mode);

// Cumulative bound on sigma* - sigma_ddot for khat = k_all with a uniform
// grid; in exact mode the linearization term vanishes.
double combined_error_bound(double sigma_all, double sigma_star, double width, double kappa,
                            bool exact_mode);

// Uniform grid {0, w, 2w, ...} whose last point covers -kappa*sigma_max.
std::vector<double> uniform_betas(double width, double sigma_max, double kappa);

// Grid hitting every reachable value of q when all penalties equal c:
// beta_i = (-kappa c) * i for i = 0..count.
std::vector<double> exact_betas(double cost, int count, double kappa);

// Lower envelope of the tangents: max_i e^{beta_i}(1 + q - beta_i).
double piecewise_exp(const std::vector<double>& betas, double q);

}  // namespace kp
