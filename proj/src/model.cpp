#include "kp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "kp/errors.hpp"

namespace kp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCoeffLimit = 1e300;  // hard error above this magnitude

struct Builder {
    const Instance& inst;
    const ModelRequest& req;
    MilpModel model;
    std::vector<std::size_t> candidates;

    explicit Builder(const Instance& instance, const ModelRequest& request)
        : inst(instance), req(request) {
        model.kind = req.kind;
        model.k = req.k;
        model.params = req.params;
        candidates = candidate_sites(inst, req);
        if (req.k < 0) throw ConfigError("k must be >= 0");
        if (static_cast<std::size_t>(req.k) > candidates.size())
            throw ConfigError("k=" + std::to_string(req.k) + " exceeds candidate count " +
                              std::to_string(candidates.size()));
    }

    std::size_t add_var(std::string name, double lb, double ub, bool integral) {
        model.vars.push_back(Variable{std::move(name), lb, ub, integral});
        model.objective.push_back(0.0);
        return model.vars.size() - 1;
    }

    void add_site_vars() {
        model.x_var.resize(inst.site_count());
        for (std::size_t s = 0; s < inst.site_count(); ++s) {
            const Site& site = inst.sites()[s];
            const bool fixed_open = site.existing && !req.relocate_existing;
            model.x_var[s] =
                add_var("x_" + site.id, fixed_open ? 1.0 : 0.0, 1.0, /*integral=*/true);
        }
        model.counts.x = inst.site_count();
    }

    void add_assignment_vars(bool integral) {
        model.y_var.resize(inst.origin_count());
        for (std::size_t r = 0; r < inst.origin_count(); ++r) {
            for (std::size_t s = 0; s < inst.site_count(); ++s) {
                if (!inst.has_distance(r, s)) continue;
                const std::size_t v = add_var(
                    "y_" + inst.origins()[r].id + "_" + inst.sites()[s].id, 0.0, 1.0, integral);
                model.y_var[r].push_back({s, v});
                ++model.counts.y;
            }
        }
    }

    void add_open_count() {
        Constraint c;
        c.name = "open_count";
        for (std::size_t s : candidates) c.terms.push_back({model.x_var[s], 1.0});
        c.rel = Relation::eq;
        c.rhs = static_cast<double>(req.k);
        model.constraints.push_back(std::move(c));
    }

    void add_link_rows() {
        for (std::size_t r = 0; r < inst.origin_count(); ++r) {
            for (const auto& [s, v] : model.y_var[r]) {
                Constraint c;
                c.name = "link_" + inst.origins()[r].id + "_" + inst.sites()[s].id;
                c.terms = {{v, 1.0}, {model.x_var[s], -1.0}};
                c.rel = Relation::le;
                c.rhs = 0.0;
                model.constraints.push_back(std::move(c));
            }
        }
    }

    void add_capacity_rows() {
        std::vector<Constraint> rows(inst.site_count());
        for (std::size_t s = 0; s < inst.site_count(); ++s) {
            rows[s].name = "cap_" + inst.sites()[s].id;
            rows[s].rel = Relation::le;
            rows[s].rhs = 0.0;
        }
        for (std::size_t r = 0; r < inst.origin_count(); ++r) {
            const double p = static_cast<double>(inst.origins()[r].population);
            for (const auto& [s, v] : model.y_var[r]) rows[s].terms.push_back({v, p});
        }
        for (std::size_t s = 0; s < inst.site_count(); ++s) {
            rows[s].terms.push_back({model.x_var[s], -*inst.sites()[s].capacity});
            model.constraints.push_back(std::move(rows[s]));
        }
    }

    void add_assign_rows() {
        for (std::size_t r = 0; r < inst.origin_count(); ++r) {
            Constraint c;
            c.name = "assign_" + inst.origins()[r].id;
            for (const auto& [s, v] : model.y_var[r]) {
                (void)s;
                c.terms.push_back({v, 1.0});
            }
            c.rel = Relation::eq;
            c.rhs = 1.0;
            model.constraints.push_back(std::move(c));
        }
    }

    // Population-weighted distance coefficients (p-median).
    void set_distance_objective() {
        double lo = kInf, hi = -kInf;
        for (std::size_t r = 0; r < inst.origin_count(); ++r) {
            const double p = static_cast<double>(inst.origins()[r].population);
            for (const auto& [s, v] : model.y_var[r]) {
                const double c = p * inst.distance(r, s);
                model.objective[v] = c;
                if (c != 0.0) {
                    lo = std::min(lo, std::abs(c));
                    hi = std::max(hi, std::abs(c));
                }
            }
        }
        record_range(lo, hi);
    }

    // p_r e^{-kappa d}: evaluated in extended precision, rounded to double.
    void set_proxy_objective(double kappa) {
        const long double rate = -static_cast<long double>(kappa);
        double lo = kInf, hi = -kInf;
        for (std::size_t r = 0; r < inst.origin_count(); ++r) {
            const long double p = static_cast<long double>(inst.origins()[r].population);
            for (const auto& [s, v] : model.y_var[r]) {
                const long double c = p * std::exp(rate * static_cast<long double>(inst.distance(r, s)));
                if (!std::isfinite(static_cast<double>(c)) || c > kCoeffLimit)
                    throw ConfigError(
                        "objective coefficient overflow for origin " + inst.origins()[r].id +
                        ", site " + inst.sites()[s].id +
                        "; reduce |epsilon| or sparsify distances with d_max");
                const double cd = static_cast<double>(c);
                model.objective[v] = cd;
                lo = std::min(lo, cd);
                hi = std::max(hi, cd);
            }
        }
        record_range(lo, hi);
    }

    void record_range(double lo, double hi) {
        model.coeff_min = lo == kInf ? 0.0 : lo;
        model.coeff_max = hi == -kInf ? 0.0 : hi;
    }

    const InequalityParams& params() const {
        if (!req.params) throw ConfigError(to_string(req.kind) + " requires inequality params");
        if (!(req.params->kappa < 0.0)) throw ConfigError("kappa must be strictly negative");
        return *req.params;
    }
};

MilpModel build_pmedian_or_kpl(const Instance& inst, const ModelRequest& req) {
    Builder b(inst, req);
    if (inst.capacitated())
        throw ConfigError("capacitated instances require the split-demand model (kpl_sd)");
    b.add_site_vars();
    b.add_assignment_vars(/*integral=*/true);
    if (req.kind == ModelKind::pmedian)
        b.set_distance_objective();
    else
        b.set_proxy_objective(b.params().kappa);
    b.add_open_count();
    b.add_link_rows();
    b.add_assign_rows();
    return std::move(b.model);
}

MilpModel build_pcenter(const Instance& inst, const ModelRequest& req) {
    Builder b(inst, req);
    if (inst.capacitated())
        throw ConfigError("capacitated instances require the split-demand model (kpl_sd)");
    b.add_site_vars();
    b.add_assignment_vars(/*integral=*/true);
    const std::size_t z =
        b.add_var("max_dist", 0.0, inst.max_distance(), /*integral=*/false);
    b.model.bound_var = z;
    b.model.counts.aux = 1;
    b.model.objective[z] = 1.0;
    b.record_range(1.0, 1.0);
    b.add_open_count();
    b.add_link_rows();
    b.add_assign_rows();
    for (std::size_t r = 0; r < inst.origin_count(); ++r) {
        for (const auto& [s, v] : b.model.y_var[r]) {
            const double d = inst.distance(r, s);
            if (d == 0.0) continue;  // 0 <= z always holds
            Constraint c;
            c.name = "bound_" + inst.origins()[r].id + "_" + inst.sites()[s].id;
            c.terms = {{v, d}, {z, -1.0}};
            c.rel = Relation::le;
            c.rhs = 0.0;
            b.model.constraints.push_back(std::move(c));
        }
    }
    return std::move(b.model);
}

MilpModel build_kpl_sd(const Instance& inst, const ModelRequest& req) {
    Builder b(inst, req);
    if (!inst.capacitated())
        throw ConfigError("kpl_sd requires a capacitated instance");
    double total_capacity = 0.0;
    for (const Site& s : inst.sites()) total_capacity += *s.capacity;
    const double T = static_cast<double>(inst.total_population());
    if (total_capacity < T)
        throw InfeasibleError("total capacity " + std::to_string(total_capacity) +
                              " is below total population " + std::to_string(T));
    // Best-case open capacity: existing sites plus the k largest candidates.
    {
        double best = 0.0;
        std::vector<double> cand;
        for (std::size_t s = 0; s < inst.site_count(); ++s) {
            const double c = *inst.sites()[s].capacity;
            const bool fixed = inst.sites()[s].existing && !req.relocate_existing;
            if (fixed)
                best += c;
            else
                cand.push_back(c);
        }
        std::sort(cand.rbegin(), cand.rend());
        for (int i = 0; i < req.k && i < static_cast<int>(cand.size()); ++i) best += cand[i];
        if (best < T)
            b.model.warnings.push_back(
                "best-case open capacity " + std::to_string(best) +
                " is below total population; the model may be infeasible");
    }
    b.add_site_vars();
    b.add_assignment_vars(/*integral=*/req.binary_assignment);
    b.set_proxy_objective(b.params().kappa);
    b.add_open_count();
    b.add_capacity_rows();
    b.add_assign_rows();
    return std::move(b.model);
}

MilpModel build_kpl_t(const Instance& inst, const ModelRequest& req) {
    Builder b(inst, req);
    if (inst.capacitated())
        throw ConfigError("capacitated instances require the split-demand model (kpl_sd)");
    if (!req.penalty_plan) throw ConfigError("kpl_t requires a penalty plan");
    const PenaltyPlan& plan = *req.penalty_plan;
    const double kappa = b.params().kappa;
    const double T = static_cast<double>(inst.total_population());

    std::vector<double> costs;
    for (const auto& [id, c] : plan.penalized) {
        const std::size_t s = inst.site_index(id);
        if (inst.sites()[s].existing && !req.relocate_existing)
            throw ConfigError("penalized site " + id + " is an existing (fixed open) site");
        if (!(c >= 0.0) || !std::isfinite(c))
            throw ConfigError("penalty for site " + id + " must be >= 0");
        costs.push_back(c);
    }
    std::sort(costs.rbegin(), costs.rend());
    double sigma_max = 0.0;
    const std::size_t cap = std::min<std::size_t>(static_cast<std::size_t>(req.k), costs.size());
    for (std::size_t i = 0; i < cap; ++i) sigma_max += costs[i];

    if (plan.betas.empty()) throw ConfigError("penalty plan has no tangent points");
    if (plan.betas.front() != 0.0) throw ConfigError("tangent grid must start at 0");
    for (std::size_t i = 1; i < plan.betas.size(); ++i)
        if (!(plan.betas[i] > plan.betas[i - 1]))
            throw ConfigError("tangent grid must be strictly increasing");
    if (plan.betas.back() < -kappa * sigma_max - 1e-12)
        throw ConfigError("linearization range does not cover maximum penalty: beta_n=" +
                          std::to_string(plan.betas.back()) + " < " +
                          std::to_string(-kappa * sigma_max));

    b.add_site_vars();
    b.add_assignment_vars(/*integral=*/true);
    b.set_proxy_objective(kappa);

    const double scale_log = -kappa * plan.khat;
    if (scale_log > 700.0)
        throw ConfigError("penalty scale overflows; khat too large for this kappa");
    const double scale = T * std::exp(scale_log);

    const std::size_t v = b.add_var("pen_v", 0.0, kInf, /*integral=*/false);
    const std::size_t q = b.add_var("pen_q", 0.0, kInf, /*integral=*/false);
    b.model.v_var = v;
    b.model.q_var = q;
    b.model.counts.aux = 2;
    b.model.objective[v] = scale;
    b.model.objective_constant = -scale;
    b.model.coeff_max = std::max(b.model.coeff_max, scale);

    b.add_open_count();
    b.add_link_rows();
    b.add_assign_rows();

    Constraint qdef;
    qdef.name = "pen_arg_def";
    qdef.terms.push_back({q, 1.0});
    for (const auto& [id, c] : plan.penalized)
        qdef.terms.push_back({b.model.x_var[inst.site_index(id)], kappa * c});
    qdef.rel = Relation::eq;
    qdef.rhs = 0.0;
    b.model.constraints.push_back(std::move(qdef));

    for (std::size_t i = 0; i < plan.betas.size(); ++i) {
        const double beta = plan.betas[i];
        const double ebeta = std::exp(beta);
        Constraint c;
        c.name = "tangent_" + std::to_string(i);
        c.terms = {{v, 1.0}, {q, -ebeta}};
        c.rel = Relation::ge;
        c.rhs = ebeta * (1.0 - beta);
        b.model.constraints.push_back(std::move(c));
    }
    return std::move(b.model);
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::pmedian: return "pmedian";
        case ModelKind::pcenter: return "pcenter";
        case ModelKind::kpl: return "kpl";
        case ModelKind::kpl_sd: return "kpl_sd";
        case ModelKind::kpl_t: return "kpl_t";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "pmedian") return ModelKind::pmedian;
    if (s == "pcenter") return ModelKind::pcenter;
    if (s == "kpl") return ModelKind::kpl;
    if (s == "kpl_sd") return ModelKind::kpl_sd;
    if (s == "kpl_t") return ModelKind::kpl_t;
    throw ConfigError("unknown model kind '" + s + "'");
}

std::vector<std::size_t> candidate_sites(const Instance& instance, const ModelRequest& request) {
    if (!request.relocate_existing) return instance.candidate_indices();
    std::vector<std::size_t> all(instance.site_count());
    for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
    return all;
}

std::vector<std::size_t> always_open_sites(const Instance& instance, const ModelRequest& request) {
    if (request.relocate_existing) return {};
    return instance.existing_indices();
}

MilpModel build_model(const Instance& instance, const ModelRequest& request) {
    switch (request.kind) {
        case ModelKind::pmedian:
        case ModelKind::kpl:
            return build_pmedian_or_kpl(instance, request);
        case ModelKind::pcenter:
            return build_pcenter(instance, request);
        case ModelKind::kpl_sd:
            return build_kpl_sd(instance, request);
        case ModelKind::kpl_t:
            return build_kpl_t(instance, request);
    }
    throw ConfigError("unknown model kind");
}

Evaluation evaluate_solution(const Instance& instance, const InequalityParams& params,
                             const std::vector<std::string>& open_sites,
                             const std::vector<AssignmentEntry>& assignment, bool check_capacity) {
    std::set<std::size_t> open;
    for (const std::string& id : open_sites) open.insert(instance.site_index(id));

    const std::size_t R = instance.origin_count();
    std::vector<double> row_sum(R, 0.0), z(R, 0.0);
    std::vector<double> site_load(instance.site_count(), 0.0);
    std::vector<double> split_values, split_weights;
    bool integral = true;

    for (const AssignmentEntry& e : assignment) {
        const std::size_t r = instance.origin_index(e.origin);
        const std::size_t s = instance.site_index(e.site);
        if (e.fraction < -1e-9 || e.fraction > 1.0 + 1e-9)
            throw InfeasibleError("assignment fraction out of [0,1] for origin " + e.origin);
        if (e.fraction <= 1e-9) continue;
        if (!open.count(s))
            throw InfeasibleError("origin " + e.origin + " assigned to closed site " + e.site);
        if (!instance.has_distance(r, s))
            throw DataError("assignment uses missing distance entry (" + e.origin + ", " + e.site +
                            ")");
        const double d = instance.distance(r, s);
        const double p = static_cast<double>(instance.origins()[r].population);
        row_sum[r] += e.fraction;
        z[r] += e.fraction * d;
        site_load[s] += e.fraction * p;
        split_values.push_back(d);
        split_weights.push_back(e.fraction * p);
        if (std::abs(e.fraction - 1.0) > 1e-9) integral = false;
    }
    for (std::size_t r = 0; r < R; ++r) {
        if (std::abs(row_sum[r] - 1.0) > 1e-9)
            throw InfeasibleError("assignment row sum for origin " + instance.origins()[r].id +
                                  " is " + std::to_string(row_sum[r]) + ", expected 1");
    }
    if (check_capacity) {
        for (std::size_t s = 0; s < instance.site_count(); ++s) {
            if (!instance.sites()[s].capacity) continue;
            if (site_load[s] > *instance.sites()[s].capacity + 1e-6)
                throw InfeasibleError("capacity violated at site " + instance.sites()[s].id);
        }
    }

    std::vector<double> weights(instance.population_weights().begin(),
                                instance.population_weights().end());
    Evaluation out;
    out.integral = integral;
    out.combined = summarize(make_distribution(z, weights), params);
    out.split = summarize(make_distribution(std::move(split_values), std::move(split_weights)),
                          params);
    return out;
}

}  // namespace kp
