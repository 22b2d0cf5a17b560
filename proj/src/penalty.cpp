#include "kp/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kp/errors.hpp"

namespace kp {

namespace {

void require_negative_kappa(double kappa) {
    if (!(kappa < 0.0) || !std::isfinite(kappa))
        throw ConfigError("kappa must be finite and strictly negative");
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double PenaltyPlan::cost_of(const std::string& site_id) const {
    for (const auto& [id, c] : penalized)
        if (id == site_id) return c;
    throw ConfigError("site " + site_id + " is not in the penalized set");
}

bool PenaltyPlan::penalizes(const std::string& site_id) const {
    for (const auto& [id, c] : penalized)
        if (id == site_id) return true;
    return false;
}

double proxy_space_penalty(double khat, double sigma, double kappa, double total_weight) {
    require_negative_kappa(kappa);
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (!(total_weight > 0.0)) throw ConfigError("total weight must be positive");
    const double scale_log = -kappa * khat;
    if (scale_log > 700.0)
        throw ConfigError("proxy-space penalty overflows; khat too large for this kappa");
    return total_weight * std::exp(scale_log) * std::expm1(-kappa * sigma);
}

double khat_penalty_error(double delta, double sigma_star, double kappa) {
    require_negative_kappa(kappa);
    if (!(sigma_star >= 0.0)) throw ConfigError("sigma* must be >= 0");
    // one = 1 - e^{kappa sigma*} in a cancellation-free form
    const double one_minus = -std::expm1(kappa * sigma_star);
    if (delta <= 0.0) {
        // argument = 1 + (e^{-kappa delta} - 1)(1 - e^{kappa sigma*}); exponent <= 0 here
        return -std::log1p(std::expm1(-kappa * delta) * one_minus) / kappa;
    }
    // factored form for large positive delta: delta - (1/k) ln(1 - e^{k s*}(1 - e^{k d}))
    const double inner = std::exp(kappa * sigma_star) * std::expm1(kappa * delta);
    return delta - std::log1p(inner) / kappa;
}

ErrorBounds khat_penalty_error_bounds(double delta, double sigma_star, double kappa) {
    require_negative_kappa(kappa);
    if (!(sigma_star >= 0.0)) throw ConfigError("sigma* must be >= 0");
    const double one_minus = -std::expm1(kappa * sigma_star);
    if (delta == 0.0) return {0.0, 0.0};
    if (delta > 0.0) return {delta * one_minus, delta};
    return {0.0, std::min(-delta * one_minus, sigma_star)};
}

UnderPenaltyBound under_penalty_bound(double sigma_all, double sigma_star, double kappa) {
    require_negative_kappa(kappa);
    if (!(sigma_all >= 0.0) || !(sigma_star >= 0.0))
        throw ConfigError("sigma values must be >= 0");
    UnderPenaltyBound b;
    b.at_sigma_star = sigma_all * -std::expm1(kappa * sigma_star);
    b.at_sigma_all = sigma_all * -std::expm1(kappa * sigma_all);
    return b;
}

double tangent_gap(double width) {
    if (!(width > 0.0)) throw ConfigError("tangent width must be positive");
    // t = w e^w / (e^w - 1); A = e^{t-1} - t, computed as expm1(t-1) - (t-1)
    const double t = width * std::exp(width) / std::expm1(width);
    const double u = t - 1.0;
    return std::expm1(u) - u;
}

TangentBound linearization_error_bound(double width, double delta, double sigma_star, double kappa,
                                       PenaltyPlan::KhatMode mode) {
    require_negative_kappa(kappa);
    if (!(width > 0.0 && width < 1.0))
        throw ConfigError("uniform tangent width must lie in (0, 1)");
    const double a = tangent_gap(width);
    const double denom = 1.0 + std::exp(kappa * sigma_star) * std::expm1(kappa * delta);
    if (!(a / denom < 1.0))
        throw ConfigError("tangent bound undefined: A(w)/denominator >= 1");
    TangentBound b;
    b.exact = std::log1p(-a / denom) / kappa;
    if (delta <= 0.0)
        b.case_bound = std::log1p(-a) / kappa;
    else if (mode == PenaltyPlan::KhatMode::k_rem)
        b.case_bound = std::log1p(-1.25 * a) / kappa;
    else
        b.case_bound = kNaN;
    return b;
}

double combined_error_bound(double sigma_all, double sigma_star, double width, double kappa,
                            bool exact_mode) {
    require_negative_kappa(kappa);
    const double first = sigma_all * -std::expm1(kappa * sigma_star);
    if (exact_mode) return first;
    return first + std::log1p(-tangent_gap(width)) / kappa;
}

std::vector<double> uniform_betas(double width, double sigma_max, double kappa) {
    require_negative_kappa(kappa);
    if (!(width > 0.0)) throw ConfigError("tangent width must be positive");
    if (!(sigma_max >= 0.0)) throw ConfigError("sigma_max must be >= 0");
    const double target = -kappa * sigma_max;
    std::size_t n = 1;
    if (target > 0.0) {
        n = static_cast<std::size_t>(std::ceil(target / width - 1e-12));
        if (n < 1) n = 1;
        while (width * static_cast<double>(n) < target) ++n;
    }
    std::vector<double> betas(n + 1);
    for (std::size_t i = 0; i <= n; ++i) betas[i] = width * static_cast<double>(i);
    return betas;
}

std::vector<double> exact_betas(double cost, int count, double kappa) {
    require_negative_kappa(kappa);
    if (!(cost >= 0.0)) throw ConfigError("penalty cost must be >= 0");
    if (count < 1) throw ConfigError("exact grid needs at least one selectable site");
    const double w = -kappa * cost;
    std::vector<double> betas(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i <= count; ++i) betas[static_cast<std::size_t>(i)] = w * i;
    return betas;
}

double piecewise_exp(const std::vector<double>& betas, double q) {
    if (betas.empty()) throw ConfigError("empty tangent grid");
    double best = -std::numeric_limits<double>::infinity();
    for (double b : betas) {
        const double tangent = std::exp(b) * (1.0 + (q - b));
        best = std::max(best, tangent);
    }
    return best;
}

}  // namespace kp
