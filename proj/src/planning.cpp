#include "kp/planning.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kp/errors.hpp"

namespace kp {

namespace {

double sum_over_open(const std::vector<std::pair<std::string, double>>& penalized,
                     const std::vector<std::string>& open) {
    std::set<std::string> open_set(open.begin(), open.end());
    double sigma = 0.0;
    for (const auto& [id, c] : penalized)
        if (open_set.count(id)) sigma += c;
    return sigma;
}

int count_over_open(const std::vector<std::pair<std::string, double>>& penalized,
                    const std::vector<std::string>& open) {
    std::set<std::string> open_set(open.begin(), open.end());
    int n = 0;
    for (const auto& [id, c] : penalized) {
        (void)c;
        if (open_set.count(id)) ++n;
    }
    return n;
}

double top_cost_sum(std::vector<double> costs, std::size_t cap) {
    std::sort(costs.rbegin(), costs.rend());
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(cap, costs.size()); ++i) s += costs[i];
    return s;
}

}  // namespace

Instance remove_sites(const Instance& instance, const std::vector<std::string>& site_ids) {
    std::set<std::string> removed(site_ids.begin(), site_ids.end());
    std::vector<Site> sites;
    for (const Site& s : instance.sites())
        if (!removed.count(s.id)) sites.push_back(s);
    if (sites.empty()) throw InfeasibleError("removing the penalized set leaves no sites");
    std::vector<std::tuple<std::string, std::string, double>> entries;
    for (std::size_t s = 0; s < instance.site_count(); ++s) {
        if (removed.count(instance.sites()[s].id)) continue;
        for (std::size_t r = 0; r < instance.origin_count(); ++r) {
            if (!instance.has_distance(r, s)) continue;
            entries.emplace_back(instance.origins()[r].id, instance.sites()[s].id,
                                 instance.distance(r, s));
        }
    }
    try {
        return build_instance(instance.origins(), sites, entries);
    } catch (const DataError& e) {
        throw InfeasibleError(std::string("reduced model infeasible: ") + e.what());
    }
}

KhatAnchors solve_khat_anchors(const Instance& instance, const ModelRequest& request,
                               const SolverBackend& backend,
                               const std::vector<std::pair<std::string, double>>& penalized) {
    if (!request.params) throw ConfigError("khat anchors require inequality params");
    std::vector<std::string> ids;
    for (const auto& [id, c] : penalized) {
        (void)c;
        ids.push_back(id);
        const std::size_t s = instance.site_index(id);
        if (instance.sites()[s].existing && !request.relocate_existing)
            throw ConfigError("penalized site " + id + " is an existing (fixed open) site");
    }

    ModelRequest unpenalized = request;
    unpenalized.kind = instance.capacitated() ? ModelKind::kpl_sd : ModelKind::kpl;
    unpenalized.penalty_plan.reset();

    // Feasibility of the reduced model: enough candidates must remain.
    const std::size_t remaining =
        candidate_sites(instance, request).size() - ids.size();
    if (remaining < static_cast<std::size_t>(request.k))
        throw InfeasibleError("removing the penalized set leaves fewer than k candidates");

    KhatAnchors anchors;
    SolveResult all = solve(instance, unpenalized, backend);
    anchors.k_all = all.kp_ede;
    anchors.open_all = all.open_sites;
    anchors.sigma_all = sum_over_open(penalized, all.open_sites);
    anchors.n_selected = count_over_open(penalized, all.open_sites);

    Instance reduced = remove_sites(instance, ids);
    SolveResult rem = solve(reduced, unpenalized, backend);
    anchors.k_rem = rem.kp_ede;
    return anchors;
}

PenaltyPlan recommend_plan(const Instance& instance, const ModelRequest& request,
                           const SolverBackend& backend,
                           std::vector<std::pair<std::string, double>> penalized,
                           const PlanOptions& options) {
    if (penalized.empty()) throw ConfigError("empty penalized set");
    if (!request.params) throw ConfigError("penalty planning requires inequality params");
    std::sort(penalized.begin(), penalized.end());
    for (std::size_t i = 1; i < penalized.size(); ++i)
        if (penalized[i].first == penalized[i - 1].first)
            throw ConfigError("duplicate penalized site " + penalized[i].first);

    const double kappa = request.params->kappa;
    KhatAnchors anchors = solve_khat_anchors(instance, request, backend, penalized);

    PenaltyPlan plan;
    plan.khat = anchors.k_all;
    plan.khat_mode = PenaltyPlan::KhatMode::k_all;
    plan.k_all = anchors.k_all;
    plan.k_rem = anchors.k_rem;
    plan.n_selected = anchors.n_selected;

    if (!options.keep_costs) {
        double c;
        if (anchors.n_selected > 0) {
            c = (anchors.k_rem - anchors.k_all) / anchors.n_selected;
        } else {
            c = anchors.k_rem - anchors.k_all;
            plan.warnings.push_back(
                "no penalized site selected by the all-sites solve (N=0); using c = k_rem - "
                "k_all");
        }
        if (c < 0.0) c = 0.0;
        for (auto& [id, cost] : penalized) {
            (void)id;
            cost = c;
        }
    }
    plan.penalized = penalized;
    plan.sigma_all = sum_over_open(plan.penalized, anchors.open_all);

    std::vector<double> costs;
    for (const auto& [id, c] : plan.penalized) {
        (void)id;
        costs.push_back(c);
    }
    plan.selection_cap =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(request.k), costs.size()));
    plan.sigma_max = top_cost_sum(costs, static_cast<std::size_t>(plan.selection_cap));

    const bool equal_costs =
        std::all_of(costs.begin(), costs.end(), [&](double c) { return c == costs.front(); });

    if (plan.selection_cap == 0) {
        plan.width = 0.0;
        plan.betas = {0.0};
        plan.exact_mode = true;
        plan.warnings.push_back("k=0 or empty selectable set: penalty is always zero");
        return plan;
    }

    if (options.width_override) {
        plan.width = *options.width_override;
        if (!(plan.width > 0.0 && plan.width < 1.0))
            throw ConfigError("tangent width must lie in (0, 1)");
        const double exact_w = -kappa * costs.front();
        plan.exact_mode = equal_costs && plan.width == exact_w;
        plan.betas = plan.exact_mode ? exact_betas(costs.front(), plan.selection_cap, kappa)
                                     : uniform_betas(plan.width, plan.sigma_max, kappa);
        return plan;
    }

    if (equal_costs && costs.front() > 0.0) {
        plan.width = -kappa * costs.front();
        plan.betas = exact_betas(costs.front(), plan.selection_cap, kappa);
        plan.exact_mode = true;
        return plan;
    }
    if (equal_costs && costs.front() == 0.0) {
        plan.width = 0.0;
        plan.betas = {0.0};
        plan.exact_mode = true;
        return plan;
    }

    // Heterogeneous costs: largest uniform width whose linearization error
    // stays inside the budget.
    if (!(options.error_budget > 0.0)) throw ConfigError("error budget must be positive");
    double lo = 1e-9, hi = 0.999;
    auto bound = [&](double w) { return std::log1p(-tangent_gap(w)) / kappa; };
    if (bound(lo) > options.error_budget)
        throw ConfigError("error budget unreachable even with width 1e-9");
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (bound(mid) <= options.error_budget)
            lo = mid;
        else
            hi = mid;
    }
    plan.width = lo;
    plan.betas = uniform_betas(plan.width, plan.sigma_max, kappa);
    plan.exact_mode = false;
    return plan;
}

ExponentCheck exponent_range_check(const PenaltyPlan& plan, const Distribution& alpha_dist,
                                   const InequalityParams& params) {
    ExponentCheck out;
    double wsum = 0.0;
    for (std::size_t i = 0; i < alpha_dist.values.size(); ++i)
        wsum += alpha_dist.values[i] * alpha_dist.weights[i];
    out.mu = wsum / alpha_dist.total_weight;
    out.sigma_max = plan.sigma_max;
    out.exponent = -params.kappa * plan.sigma_max;
    out.sigma_max_le_mu = plan.sigma_max <= out.mu;
    out.exponent_le_abs_eps = out.exponent <= std::abs(params.epsilon);
    double max_cost = 0.0;
    for (const auto& [id, c] : plan.penalized) {
        (void)id;
        max_cost = std::max(max_cost, c);
    }
    const int denom = std::max(1, plan.selection_cap);
    out.per_site_ok = max_cost <= out.mu / denom;
    return out;
}

PenaltyMeasurement measure_penalty_errors(const Instance& instance, const ModelRequest& request,
                                          const SolverBackend& backend) {
    if (request.kind != ModelKind::kpl_t)
        throw ConfigError("penalty measurement requires a kpl_t request");
    if (!request.penalty_plan) throw ConfigError("penalty measurement requires a plan");
    const PenaltyPlan& plan = *request.penalty_plan;
    const InequalityParams& params = *request.params;
    const double T = static_cast<double>(instance.total_population());

    PenaltyMeasurement m;
    m.result = brute_force_solve(instance, request, backend);

    m.sigma_star = sum_over_open(plan.penalized, m.result.open_sites);
    int selected = count_over_open(plan.penalized, m.result.open_sites);

    // Unpenalized proxy of the optimum and the associated score.
    const double proxy = T * std::exp(-params.kappa * m.result.kp_ede);
    m.k_star = m.result.kp_ede;
    m.delta = plan.khat - m.k_star;

    // q at the optimum. In exact mode q is read off the matching grid point so
    // the tangent hull and the exponential agree bit for bit.
    double q;
    if (plan.exact_mode && selected < static_cast<int>(plan.betas.size()))
        q = plan.betas[static_cast<std::size_t>(selected)];
    else
        q = -params.kappa * m.sigma_star;

    const double scale = T * std::exp(-params.kappa * plan.khat);
    // Same expression shape on both sides: in exact mode the hull evaluates to
    // exp(q) bit for bit, making sigma_hat == sigma_ddot exactly.
    const double exact_term = std::exp(q) - 1.0;                   // e^q - 1
    const double hull_term = piecewise_exp(plan.betas, q) - 1.0;   // g(q) - 1
    const double pen_exact = scale * exact_term;
    const double pen_hull = scale * hull_term;

    const double base = m.k_star;
    m.sigma_hat = ede_from_proxy(proxy + pen_exact, params.kappa, T) - base;
    m.sigma_ddot = ede_from_proxy(proxy + pen_hull, params.kappa, T) - base;
    m.hat_error = m.sigma_hat - m.sigma_star;
    return m;
}

}  // namespace kp
