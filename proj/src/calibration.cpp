#include "kp/calibration.hpp"

#include <cmath>

#include "kp/errors.hpp"

namespace kp {

namespace {

// Mode-A distribution of an integral-or-fractional assignment: each origin
// travels its assignment-weighted average distance.
Distribution assignment_distribution(const Instance& inst, const SolveResult& result) {
    std::vector<double> z(inst.origin_count(), 0.0);
    for (const AssignmentEntry& e : result.assignment) {
        const std::size_t r = inst.origin_index(e.origin);
        const std::size_t s = inst.site_index(e.site);
        z[r] += e.fraction * inst.distance(r, s);
    }
    return make_distribution(std::move(z), {inst.population_weights().begin(),
                                            inst.population_weights().end()});
}

}  // namespace

InequalityParams initial_alpha(const Instance& instance, double epsilon_0,
                               std::vector<std::string>* log) {
    Distribution seed;
    if (instance.existing_indices().empty()) {
        if (log)
            log->push_back("no existing sites; seeding alpha from nearest distances over all "
                           "sites");
        seed = nearest_assignment_distribution(instance, SiteFilter::all);
    } else {
        seed = nearest_assignment_distribution(instance, SiteFilter::existing_only);
    }
    return make_params(alpha(seed), epsilon_0);
}

CalibrationResult calibrate(const Instance& instance, ModelRequest request,
                            const SolverBackend& backend, double epsilon_0, double tol,
                            int max_iters) {
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("calibration tolerance must be positive");
    if (!(epsilon_0 < 0.0)) throw ConfigError("epsilon_0 must be strictly negative");

    CalibrationResult out;
    out.converged = false;
    InequalityParams params = initial_alpha(instance, epsilon_0, &out.log);
    if (instance.existing_indices().empty())
        out.seed_distribution = nearest_assignment_distribution(instance, SiteFilter::all);
    else
        out.seed_distribution =
            nearest_assignment_distribution(instance, SiteFilter::existing_only);

    for (int i = 1; i <= max_iters; ++i) {
        request.params = params;
        SolveResult result;
        try {
            result = solve(instance, request, backend);
        } catch (const Error& e) {
            if (i == 1) throw;  // nothing to salvage
            out.backend_error = e.what();
            return out;
        }
        Distribution dist = assignment_distribution(instance, result);
        const double alpha_out = alpha(dist);

        CalibrationRecord rec;
        rec.iteration = i;
        rec.alpha_in = params.alpha;
        rec.alpha_out = alpha_out;
        rec.epsilon_target = epsilon_0;
        rec.epsilon_realized = params.alpha * epsilon_0 / alpha_out;
        rec.kp_ede = result.kp_ede;
        rec.open_sites = result.open_sites;
        out.records.push_back(rec);
        out.final_result = result;

        if (std::abs(rec.epsilon_realized - epsilon_0) <= tol * std::abs(epsilon_0)) {
            out.converged = true;
            break;
        }
        if (i > 1 && out.records[i - 2].open_sites == result.open_sites) {
            // Same optimum as last round: alpha is a fixed point, nothing can move.
            out.converged = true;
            break;
        }
        params = make_params(alpha_out, epsilon_0);
    }
    return out;
}

}  // namespace kp
