#include "kp/metrics.hpp"

#include <cmath>
#include <limits>

#include "kp/csv.hpp"
#include "kp/errors.hpp"
#include "kp/kernels.hpp"

namespace kp {

namespace {

// Largest exponent fed to exp() directly; above this, sums go through
// log-sum-exp. Below the double overflow threshold with margin.
constexpr double kExpGuard = 700.0;

void require_negative_kappa(double kappa) {
    if (!(kappa < 0.0) || !std::isfinite(kappa))
        throw ConfigError("kappa must be finite and strictly negative (got " +
                          std::to_string(kappa) + ")");
}

}  // namespace

Distribution make_distribution(std::vector<double> values, std::vector<double> weights) {
    if (values.size() != weights.size())
        throw DataError("distribution values and weights differ in length");
    if (values.empty()) throw DataError("empty distribution");
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0)
            throw DataError("distribution value must be finite and >= 0 (index " +
                            std::to_string(i) + ")");
        if (!std::isfinite(weights[i]) || weights[i] < 0.0)
            throw DataError("distribution weight must be finite and >= 0 (index " +
                            std::to_string(i) + ")");
        total += weights[i];
    }
    if (!(total > 0.0)) throw DataError("distribution has zero total weight");
    Distribution d;
    d.values = std::move(values);
    d.weights = std::move(weights);
    d.total_weight = total;
    return d;
}

Distribution load_distribution_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header != std::vector<std::string>{"value_meters", "weight"})
        throw DataError(path + ": expected header 'value_meters,weight'");
    std::vector<double> values, weights;
    values.reserve(t.rows.size());
    weights.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string where = path + " row " + std::to_string(i + 1);
        values.push_back(csv::parse_double(t.rows[i][0], where + " value_meters"));
        weights.push_back(csv::parse_double(t.rows[i][1], where + " weight"));
    }
    return make_distribution(std::move(values), std::move(weights));
}

InequalityParams make_params(double alpha, double epsilon) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be finite and positive (got " + std::to_string(alpha) + ")");
    if (!(epsilon < 0.0) || !std::isfinite(epsilon))
        throw ConfigError("epsilon must be finite and strictly negative (got " +
                          std::to_string(epsilon) + ")");
    return InequalityParams{epsilon, alpha, alpha * epsilon};
}

double alpha(const Distribution& dist) {
    const double num = kernels::weighted_sum(dist.values, dist.weights);
    const double den = kernels::weighted_sq_sum(dist.values, dist.weights);
    if (!(den > 0.0))
        throw DataError("alpha undefined: all distribution values are zero");
    return num / den;
}

double kolm_pollak_ede(const Distribution& dist, double kappa) {
    require_negative_kappa(kappa);
    const double rate = -kappa;
    const double shift = rate * kernels::max_value(dist.values);
    const double sum = kernels::exp_weighted_sum(dist.values, dist.weights, rate, shift);
    // -(1/k) ln[(1/T) e^shift sum] = -(1/k) (shift + ln(sum/T))
    return -(shift + std::log(sum / dist.total_weight)) / kappa;
}

AutoEde kolm_pollak_ede_auto(const Distribution& dist, double epsilon) {
    InequalityParams params = make_params(alpha(dist), epsilon);
    return AutoEde{kolm_pollak_ede(dist, params.kappa), params};
}

double linear_proxy(const Distribution& dist, double kappa) {
    require_negative_kappa(kappa);
    const double rate = -kappa;
    const double max_arg = rate * kernels::max_value(dist.values);
    if (max_arg <= kExpGuard) {
        return kernels::exp_weighted_sum(dist.values, dist.weights, rate, 0.0);
    }
    const double sum = kernels::exp_weighted_sum(dist.values, dist.weights, rate, max_arg);
    const double log_result = max_arg + std::log(sum);
    if (log_result >= std::log(std::numeric_limits<double>::max()))
        throw ConfigError("linear proxy overflows double range; reduce |epsilon| or sparsify "
                          "distances with d_max");
    return std::exp(log_result);
}

double ede_from_proxy(double proxy, double kappa, double total_weight) {
    require_negative_kappa(kappa);
    if (!(proxy > 0.0)) throw ConfigError("proxy objective must be positive");
    if (!(total_weight > 0.0)) throw ConfigError("total weight must be positive");
    return -std::log(proxy / total_weight) / kappa;
}

double epsilon_out(double alpha_in, double epsilon_0, double alpha_out) {
    if (alpha_out == 0.0) throw ConfigError("alpha_out must be nonzero");
    if (alpha_in == 0.0) throw ConfigError("alpha_in must be nonzero");
    if (!(epsilon_0 < 0.0)) throw ConfigError("epsilon_0 must be strictly negative");
    return alpha_in * epsilon_0 / alpha_out;
}

SummaryStats summarize(const Distribution& dist, const InequalityParams& params) {
    SummaryStats s;
    const double T = dist.total_weight;
    s.mean = kernels::weighted_sum(dist.values, dist.weights) / T;
    s.max = kernels::max_value(dist.values);
    // Sample convention (divisor T-1), degenerating to 0 when T <= 1.
    const double ss = kernels::weighted_sq_dev_sum(dist.values, dist.weights, s.mean);
    s.stdev = T > 1.0 ? std::sqrt(ss / (T - 1.0)) : 0.0;
    s.kp_ede = kolm_pollak_ede(dist, params.kappa);
    return s;
}

}  // namespace kp
