#include "kp/solvers.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "kp/errors.hpp"
#include "kp/export.hpp"
#include "kp/kernels.hpp"

namespace kp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

unsigned long long comb_count(std::size_t n, std::size_t k, unsigned long long limit) {
    if (k > n) return 0;
    unsigned long long c = 1;
    for (std::size_t i = 0; i < k; ++i) {
        const unsigned long long num = n - i;
        // c * num / (i+1) without overflow for the ranges we allow
        if (c > (limit * (i + 1)) / (num ? num : 1) + 1) return limit + 1;
        c = c * num / (i + 1);
        if (c > limit) return limit + 1;
    }
    return c;
}

// Lexicographic unranking of a k-subset of {0..n-1}.
void unrank_lex(std::size_t n, std::size_t k, unsigned long long rank,
                std::vector<std::size_t>& out) {
    out.resize(k);
    std::size_t next = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t v = next;; ++v) {
            const unsigned long long block =
                comb_count(n - 1 - v, k - 1 - i, std::numeric_limits<unsigned long long>::max() / 2);
            if (rank < block) {
                out[i] = v;
                next = v + 1;
                break;
            }
            rank -= block;
        }
    }
}

bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    if (k == 0) return false;
    std::size_t i = k;
    while (i-- > 0) {
        if (c[i] + 1 <= n - (k - i)) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

struct OracleSetup {
    std::vector<std::size_t> candidates;  // site indices eligible for opening
    std::vector<std::size_t> base_open;   // always-open site indices
    double rate = 0.0;                    // -kappa for KP kinds, else 0
    double shift = 0.0;                   // global exponent shift for ranking sums
    double penalty_scale_shifted = 0.0;   // T e^{-kappa khat - shift} (kpl_t)
    std::vector<double> site_penalty;     // c_s per site index, NaN when unpenalized
    bool capacitated = false;
};

OracleSetup prepare_oracle(const Instance& inst, const ModelRequest& req,
                           const SolverBackend& backend) {
    OracleSetup s;
    s.candidates = candidate_sites(inst, req);
    s.base_open = always_open_sites(inst, req);
    if (req.k < 0) throw ConfigError("k must be >= 0");
    if (static_cast<std::size_t>(req.k) > s.candidates.size())
        throw ConfigError("k=" + std::to_string(req.k) + " exceeds candidate count " +
                          std::to_string(s.candidates.size()));
    const bool kp_kind = req.kind == ModelKind::kpl || req.kind == ModelKind::kpl_sd ||
                         req.kind == ModelKind::kpl_t;
    if (kp_kind) {
        if (!req.params) throw ConfigError(to_string(req.kind) + " requires inequality params");
        if (!(req.params->kappa < 0.0)) throw ConfigError("kappa must be strictly negative");
        s.rate = -req.params->kappa;
        s.shift = s.rate * inst.max_distance();
    }
    if (req.kind == ModelKind::kpl_sd) {
        if (!inst.capacitated()) throw ConfigError("kpl_sd requires a capacitated instance");
        double total = 0.0;
        for (const Site& site : inst.sites()) total += *site.capacity;
        if (total < static_cast<double>(inst.total_population()))
            throw InfeasibleError("total capacity below total population");
        s.capacitated = true;
    } else if (inst.capacitated()) {
        throw ConfigError("capacitated instances require the split-demand model (kpl_sd)");
    }
    if (req.kind == ModelKind::kpl_t) {
        if (!req.penalty_plan) throw ConfigError("kpl_t requires a penalty plan");
        const PenaltyPlan& plan = *req.penalty_plan;
        s.site_penalty.assign(inst.site_count(), std::numeric_limits<double>::quiet_NaN());
        for (const auto& [id, c] : plan.penalized) {
            const std::size_t idx = inst.site_index(id);
            if (inst.sites()[idx].existing && !req.relocate_existing)
                throw ConfigError("penalized site " + id + " is an existing (fixed open) site");
            if (!(c >= 0.0)) throw ConfigError("penalty for site " + id + " must be >= 0");
            s.site_penalty[idx] = c;
        }
        const double scale_log = s.rate * plan.khat;
        if (scale_log > 700.0)
            throw ConfigError("penalty scale overflows; khat too large for this kappa");
        s.penalty_scale_shifted =
            static_cast<double>(inst.total_population()) * std::exp(scale_log - s.shift);
    }
    const unsigned long long count =
        comb_count(s.candidates.size(), static_cast<std::size_t>(req.k), backend.enumeration_cap);
    if (count > backend.enumeration_cap)
        throw ConfigError("enumeration cap exceeded: C(" + std::to_string(s.candidates.size()) +
                          "," + std::to_string(req.k) + ") > " +
                          std::to_string(backend.enumeration_cap));
    return s;
}

// Ranking value of one candidate subset; +inf when infeasible.
double subset_value(const Instance& inst, const ModelRequest& req, const OracleSetup& setup,
                    const std::vector<std::size_t>& subset, std::vector<double>& z_buffer) {
    const std::span<const double> w = inst.population_weights();
    if (!setup.capacitated) {
        z_buffer.assign(inst.origin_count(), kInf);
        for (std::size_t s : setup.base_open) kernels::min_inplace(z_buffer, inst.column(s));
        for (std::size_t pos : subset)
            kernels::min_inplace(z_buffer, inst.column(setup.candidates[pos]));
        switch (req.kind) {
            case ModelKind::pmedian:
                return kernels::weighted_sum(z_buffer, w);
            case ModelKind::pcenter:
                return kernels::max_value(z_buffer);
            case ModelKind::kpl:
                return kernels::exp_weighted_sum(z_buffer, w, setup.rate, setup.shift);
            case ModelKind::kpl_t: {
                const double base =
                    kernels::exp_weighted_sum(z_buffer, w, setup.rate, setup.shift);
                double sigma = 0.0;
                for (std::size_t pos : subset) {
                    const double c = setup.site_penalty[setup.candidates[pos]];
                    if (!std::isnan(c)) sigma += c;
                }
                return base + setup.penalty_scale_shifted * std::expm1(setup.rate * sigma);
            }
            default:
                throw ConfigError("unexpected model kind in uncapacitated oracle");
        }
    }
    // Capacitated: transportation pricing with shifted exponential costs.
    std::vector<std::size_t> open(setup.base_open);
    for (std::size_t pos : subset) open.push_back(setup.candidates[pos]);
    std::sort(open.begin(), open.end());
    double cap = 0.0;
    for (std::size_t s : open) cap += *inst.sites()[s].capacity;
    if (cap < static_cast<double>(inst.total_population())) return kInf;
    try {
        const double rate = setup.rate, shift = setup.shift;
        auto cost = [&](std::size_t r, std::size_t s) {
            const double d = inst.distance(r, s);
            return d == kInf ? kInf : std::exp(rate * d - shift);
        };
        const auto arcs = transportation_solve(open, inst, cost);
        double value = 0.0;
        for (const TransportArc& a : arcs) {
            value += static_cast<double>(inst.origins()[a.origin].population) * a.fraction *
                     cost(a.origin, a.site);
        }
        return value;
    } catch (const InfeasibleError&) {
        return kInf;
    }
}

struct Best {
    double value = kInf;
    std::vector<std::size_t> subset;
    bool found = false;

    void offer(double v, const std::vector<std::size_t>& s) {
        if (!std::isfinite(v)) return;
        if (!found || v < value || (v == value && s < subset)) {
            value = v;
            subset = s;
            found = true;
        }
    }
    void merge(const Best& other) {
        if (other.found) offer(other.value, other.subset);
    }
};

std::vector<std::size_t> merged_open(const Instance& inst, const OracleSetup& setup,
                                     const std::vector<std::size_t>& subset) {
    std::vector<std::size_t> open(setup.base_open);
    for (std::size_t pos : subset) open.push_back(setup.candidates[pos]);
    std::sort(open.begin(), open.end());
    (void)inst;
    return open;
}

}  // namespace

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible_gap: return "feasible-gap";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::error: return "error";
    }
    return "unknown";
}

SolveResult brute_force_solve(const Instance& inst, const ModelRequest& req,
                              const SolverBackend& backend) {
    const auto t0 = std::chrono::steady_clock::now();
    OracleSetup setup = prepare_oracle(inst, req, backend);
    const std::size_t n = setup.candidates.size();
    const std::size_t k = static_cast<std::size_t>(req.k);
    const unsigned long long total =
        comb_count(n, k, std::numeric_limits<unsigned long long>::max() / 4);

    unsigned int hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t threads = backend.threads > 0 ? static_cast<std::size_t>(backend.threads) : hw;
    threads = std::max<std::size_t>(1, std::min<std::size_t>(threads, total / 64 + 1));

    std::vector<Best> results(threads);
    auto worker = [&](std::size_t t) {
        const unsigned long long lo = total * t / threads;
        const unsigned long long hi = total * (t + 1) / threads;
        if (lo >= hi) return;
        std::vector<std::size_t> subset;
        unrank_lex(n, k, lo, subset);
        std::vector<double> z;
        Best& best = results[t];
        for (unsigned long long r = lo; r < hi; ++r) {
            best.offer(subset_value(inst, req, setup, subset, z), subset);
            if (r + 1 < hi && !next_combination(subset, n)) break;
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (std::thread& th : pool) th.join();
    }
    Best best;
    for (const Best& b : results) best.merge(b);
    if (!best.found)
        throw InfeasibleError("no feasible open set: every candidate subset leaves some origin "
                              "unreachable or exceeds capacity");

    // Rebuild the winning assignment and report unshifted quantities.
    SolveResult res;
    res.status = SolveStatus::optimal;
    res.penalty_linearized = false;
    res.counts.x = inst.site_count();
    res.counts.y = inst.entry_count();
    res.counts.aux = req.kind == ModelKind::pcenter ? 1 : (req.kind == ModelKind::kpl_t ? 2 : 0);

    const std::vector<std::size_t> open = merged_open(inst, setup, best.subset);
    for (std::size_t s : open) res.open_sites.push_back(inst.sites()[s].id);

    const std::span<const double> w = inst.population_weights();
    const double T = static_cast<double>(inst.total_population());

    if (!setup.capacitated) {
        std::vector<double> z(inst.origin_count());
        for (std::size_t r = 0; r < inst.origin_count(); ++r) {
            double bestd = kInf;
            std::size_t bests = 0;
            for (std::size_t s : open) {  // index order == id order: lexicographic tie-break
                const double d = inst.distance(r, s);
                if (d < bestd) {
                    bestd = d;
                    bests = s;
                }
            }
            z[r] = bestd;
            res.assignment.push_back({inst.origins()[r].id, inst.sites()[bests].id, 1.0});
        }
        Distribution dist = make_distribution(z, {w.begin(), w.end()});
        switch (req.kind) {
            case ModelKind::pmedian:
                res.objective = kernels::weighted_sum(dist.values, dist.weights);
                break;
            case ModelKind::pcenter:
                res.objective = kernels::max_value(dist.values);
                break;
            case ModelKind::kpl:
                res.objective = linear_proxy(dist, req.params->kappa);
                res.kp_ede = ede_from_proxy(res.objective, req.params->kappa, T);
                break;
            case ModelKind::kpl_t: {
                const double proxy = linear_proxy(dist, req.params->kappa);
                double sigma = 0.0;
                for (std::size_t pos : best.subset) {
                    const double c = setup.site_penalty[setup.candidates[pos]];
                    if (!std::isnan(c)) sigma += c;
                }
                res.objective = proxy + proxy_space_penalty(req.penalty_plan->khat, sigma,
                                                            req.params->kappa, T);
                res.kp_ede = ede_from_proxy(proxy, req.params->kappa, T);
                break;
            }
            default:
                break;
        }
        if (std::isnan(res.kp_ede) && req.params)
            res.kp_ede = kolm_pollak_ede(dist, req.params->kappa);
    } else {
        auto cost = [&](std::size_t r, std::size_t s) {
            const double d = inst.distance(r, s);
            return d == kInf ? kInf : std::exp(setup.rate * d);
        };
        const auto arcs = transportation_solve(open, inst, cost);
        std::vector<double> values, weights;
        for (const TransportArc& a : arcs) {
            res.assignment.push_back(
                {inst.origins()[a.origin].id, inst.sites()[a.site].id, a.fraction});
            values.push_back(inst.distance(a.origin, a.site));
            weights.push_back(static_cast<double>(inst.origins()[a.origin].population) *
                              a.fraction);
        }
        std::sort(res.assignment.begin(), res.assignment.end(),
                  [](const AssignmentEntry& a, const AssignmentEntry& b) {
                      return std::tie(a.origin, a.site) < std::tie(b.origin, b.site);
                  });
        Distribution dist = make_distribution(std::move(values), std::move(weights));
        res.objective = linear_proxy(dist, req.params->kappa);
        res.kp_ede = ede_from_proxy(res.objective, req.params->kappa, T);
    }
    res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<TransportArc> transportation_solve(
    std::span<const std::size_t> open_sites, const Instance& inst,
    const std::function<double(std::size_t, std::size_t)>& unit_cost) {
    const std::size_t m = inst.origin_count();
    const std::size_t n = open_sites.size();
    if (n == 0) throw InfeasibleError("no open sites");

    std::vector<double> supply(m), cap(n);
    double total_cap = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        supply[r] = static_cast<double>(inst.origins()[r].population);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& c = inst.sites()[open_sites[j]].capacity;
        cap[j] = c ? *c : kInf;
        total_cap += cap[j];
    }
    const double T = static_cast<double>(inst.total_population());
    if (total_cap < T) throw InfeasibleError("aggregate capacity shortfall");

    std::vector<double> cost(m * n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < n; ++j) cost[r * n + j] = unit_cost(r, open_sites[j]);

    // Nodes: 0 = source, 1..m origins, m+1..m+n sites, m+n+1 = sink.
    const std::size_t V = m + n + 2;
    const std::size_t SRC = 0, SNK = m + n + 1;
    std::vector<double> flow(m * n, 0.0), shipped(m, 0.0), load(n, 0.0);
    std::vector<double> pi(V, 0.0), dist(V);
    std::vector<int> parent(V);  // predecessor node; -1 unset
    std::vector<char> done(V);

    double remaining = T;
    while (remaining > 1e-12) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        dist[SRC] = 0.0;
        for (;;) {
            std::size_t u = V;
            double du = kInf;
            for (std::size_t v = 0; v < V; ++v)
                if (!done[v] && dist[v] < du) {
                    du = dist[v];
                    u = v;
                }
            if (u == V || u == SNK) break;
            done[u] = 1;
            auto relax = [&](std::size_t v, double c) {
                const double rc = std::max(c + pi[u] - pi[v], 0.0);
                if (du + rc < dist[v]) {
                    dist[v] = du + rc;
                    parent[v] = static_cast<int>(u);
                }
            };
            if (u == SRC) {
                for (std::size_t r = 0; r < m; ++r)
                    if (supply[r] - shipped[r] > 1e-12) relax(1 + r, 0.0);
            } else if (u >= 1 && u <= m) {
                const std::size_t r = u - 1;
                for (std::size_t j = 0; j < n; ++j)
                    if (cost[r * n + j] != kInf) relax(m + 1 + j, cost[r * n + j]);
            } else if (u >= m + 1 && u <= m + n) {
                const std::size_t j = u - m - 1;
                if (cap[j] - load[j] > 1e-12) relax(SNK, 0.0);
                for (std::size_t r = 0; r < m; ++r)
                    if (flow[r * n + j] > 1e-12) relax(1 + r, -cost[r * n + j]);
            }
        }
        if (dist[SNK] == kInf)
            throw InfeasibleError("transportation: no augmenting path (origin unreachable)");
        for (std::size_t v = 0; v < V; ++v)
            if (dist[v] != kInf) pi[v] += dist[v];

        // Bottleneck along the path.
        double step = remaining;
        for (std::size_t v = SNK; v != SRC;) {
            const std::size_t u = static_cast<std::size_t>(parent[v]);
            if (u == SRC) {
                step = std::min(step, supply[v - 1] - shipped[v - 1]);
            } else if (u >= 1 && u <= m && v >= m + 1 && v <= m + n) {
                // forward arc, no cap
            } else if (u >= m + 1 && u <= m + n && v >= 1 && v <= m) {
                step = std::min(step, flow[(v - 1) * n + (u - m - 1)]);
            } else if (v == SNK) {
                step = std::min(step, cap[u - m - 1] - load[u - m - 1]);
            }
            v = u;
        }
        for (std::size_t v = SNK; v != SRC;) {
            const std::size_t u = static_cast<std::size_t>(parent[v]);
            if (u == SRC) {
                shipped[v - 1] += step;
            } else if (u >= 1 && u <= m && v >= m + 1 && v <= m + n) {
                flow[(u - 1) * n + (v - m - 1)] += step;
            } else if (u >= m + 1 && u <= m + n && v >= 1 && v <= m) {
                flow[(v - 1) * n + (u - m - 1)] -= step;
            } else if (v == SNK) {
                load[u - m - 1] += step;
            }
            v = u;
        }
        remaining -= step;
    }

    std::vector<TransportArc> arcs;
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            const double f = flow[r * n + j];
            if (f > 1e-12)
                arcs.push_back({r, open_sites[j], f / supply[r]});
        }
    }
    return arcs;
}

VerifyReport verify_solution(const Instance& inst, const MilpModel& model,
                             const SolveResult& result) {
    VerifyReport report;
    auto flag = [&](const std::string& msg) { report.violations.push_back(msg); };

    std::set<std::size_t> open;
    for (const std::string& id : result.open_sites) {
        if (!inst.has_site(id)) {
            flag("open set names unknown site " + id);
            continue;
        }
        open.insert(inst.site_index(id));
    }

    std::vector<double> value(model.vars.size(), 0.0);
    std::size_t open_candidates = 0;
    for (std::size_t s = 0; s < inst.site_count(); ++s) {
        const bool is_open = open.count(s) > 0;
        value[model.x_var[s]] = is_open ? 1.0 : 0.0;
        const Variable& xv = model.vars[model.x_var[s]];
        if (xv.lb == 1.0 && !is_open) flag("existing site " + inst.sites()[s].id + " closed");
        if (xv.lb < 1.0 && is_open) ++open_candidates;
    }
    if (open_candidates != static_cast<std::size_t>(model.k))
        flag("facility count: " + std::to_string(open_candidates) + " candidate sites open, k=" +
             std::to_string(model.k));

    // Pair -> variable lookup.
    std::vector<double> row_sum(inst.origin_count(), 0.0);
    std::vector<double> load(inst.site_count(), 0.0);
    for (const AssignmentEntry& e : result.assignment) {
        std::size_t r, s;
        try {
            r = inst.origin_index(e.origin);
            s = inst.site_index(e.site);
        } catch (const DataError& err) {
            flag(err.what());
            continue;
        }
        const auto& row = model.y_var[r];
        auto it = std::find_if(row.begin(), row.end(),
                               [&](const auto& p) { return p.first == s; });
        if (it == row.end()) {
            flag("assignment (" + e.origin + ", " + e.site + ") has no retained distance entry");
            continue;
        }
        if (e.fraction < -1e-9 || e.fraction > 1.0 + 1e-9)
            flag("assignment fraction out of range for (" + e.origin + ", " + e.site + ")");
        value[it->second] = e.fraction;
        row_sum[r] += e.fraction;
        load[s] += e.fraction * static_cast<double>(inst.origins()[r].population);
        if (e.fraction > 1e-9 && !open.count(s))
            flag("origin " + e.origin + " assigned to closed site " + e.site);
        if (model.vars[it->second].integral && std::abs(e.fraction - std::round(e.fraction)) > 1e-6)
            flag("binary assignment variable has fractional value for (" + e.origin + ", " +
                 e.site + ")");
    }
    for (std::size_t r = 0; r < inst.origin_count(); ++r) {
        if (std::abs(row_sum[r] - 1.0) > 1e-9)
            flag("assignment row sum for origin " + inst.origins()[r].id + " is " +
                 std::to_string(row_sum[r]));
    }
    if (model.kind == ModelKind::kpl_sd) {
        for (std::size_t s = 0; s < inst.site_count(); ++s) {
            if (inst.sites()[s].capacity && load[s] > *inst.sites()[s].capacity + 1e-6)
                flag("capacity violated at site " + inst.sites()[s].id);
        }
    }

    // Auxiliary variable values implied by the assignment.
    if (model.bound_var) {
        double zmax = 0.0;
        for (std::size_t r = 0; r < inst.origin_count(); ++r)
            for (const auto& [s, v] : model.y_var[r]) zmax = std::max(zmax, value[v] * inst.distance(r, s));
        value[*model.bound_var] = zmax;
    }
    if (model.q_var) {
        // q is pinned by its defining equality: q = -sum(coeff_x * x).
        double q = 0.0;
        for (const Constraint& c : model.constraints) {
            if (c.name != "pen_arg_def") continue;
            for (const LinearTerm& t : c.terms)
                if (t.var != *model.q_var) q -= t.coeff * value[t.var];
            break;
        }
        value[*model.q_var] = q;
        if (model.v_var) {
            if (result.penalty_linearized) {
                double hull = -kInf;
                for (const Constraint& c : model.constraints) {
                    if (c.name.rfind("tangent_", 0) != 0) continue;
                    double qcoeff = 0.0;
                    for (const LinearTerm& t : c.terms)
                        if (t.var == *model.q_var) qcoeff = t.coeff;
                    hull = std::max(hull, c.rhs - qcoeff * q);
                }
                value[*model.v_var] = hull;
            } else {
                value[*model.v_var] = std::exp(q);
            }
        }
    }

    double obj = model.objective_constant;
    for (std::size_t i = 0; i < model.vars.size(); ++i) obj += model.objective[i] * value[i];
    report.recomputed_objective = obj;
    const double scale = std::max({1.0, std::abs(obj), std::abs(result.objective)});
    if (std::isfinite(result.objective) && std::abs(obj - result.objective) > 1e-9 * scale)
        flag("objective mismatch: reported " + std::to_string(result.objective) +
             ", recomputed " + std::to_string(obj));

    if (model.params) {
        double proxy = 0.0;
        bool kp_kind = model.kind == ModelKind::kpl || model.kind == ModelKind::kpl_sd ||
                       model.kind == ModelKind::kpl_t;
        if (kp_kind) {
            for (std::size_t r = 0; r < inst.origin_count(); ++r)
                for (const auto& [s, v] : model.y_var[r]) {
                    (void)s;
                    proxy += model.objective[v] * value[v];
                }
            report.kp_ede = ede_from_proxy(proxy, model.params->kappa,
                                           static_cast<double>(inst.total_population()));
        }
    }
    return report;
}

std::vector<std::pair<std::string, double>> parse_solution_file(const std::string& path,
                                                                double* reported_gap) {
    std::ifstream in(path);
    if (!in) throw BackendError("cannot open solution file " + path);
    std::vector<std::pair<std::string, double>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first[0] == '#') {
            std::string key;
            if (first == "#") ls >> key;
            else key = first.substr(1);
            if (key == "gap" && reported_gap) {
                double g;
                if (ls >> g) *reported_gap = g;
            }
            continue;
        }
        double v;
        if (!(ls >> v)) throw BackendError("solution file: missing value for '" + first + "'");
        out.emplace_back(first, v);
    }
    return out;
}

SolveResult external_solve(const Instance& inst, const ModelRequest& req,
                           const SolverBackend& backend) {
    const auto t0 = std::chrono::steady_clock::now();
    if (backend.command.empty()) throw ConfigError("external backend has no command configured");
    MilpModel model = build_model(inst, req);

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() /
                   ("kpfl_" + std::to_string(
                                  std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(dir);
    const std::string model_path = (dir / "model.lp").string();
    const std::string solution_path = (dir / "solution.sol").string();
    export_model(model, ModelFormat::lp, model_path);

    std::string cmd = backend.command;
    auto substitute = [&](const std::string& key, const std::string& value) {
        std::size_t pos;
        while ((pos = cmd.find(key)) != std::string::npos) cmd.replace(pos, key.size(), value);
    };
    substitute("{model}", model_path);
    substitute("{solution}", solution_path);

    const int raw = std::system(cmd.c_str());
    int code = -1;
    if (raw != -1 && WIFEXITED(raw)) code = WEXITSTATUS(raw);
    SolveStatus status;
    if (code == 0)
        status = SolveStatus::optimal;
    else if (code == 2)
        status = SolveStatus::feasible_gap;
    else {
        std::error_code ec;
        fs::remove_all(dir, ec);
        throw BackendError("external solver exited with code " + std::to_string(code));
    }

    double gap = std::numeric_limits<double>::quiet_NaN();
    auto pairs = parse_solution_file(solution_path, &gap);
    std::error_code ec;
    fs::remove_all(dir, ec);

    std::unordered_map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < model.vars.size(); ++i) by_name.emplace(model.vars[i].name, i);
    std::vector<double> value(model.vars.size(), 0.0);
    for (const auto& [name, v] : pairs) {
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw BackendError("solution names unknown column '" + name + "'");
        double x = v;
        if (model.vars[it->second].integral) {
            const double r = std::round(x);
            if (std::abs(x - r) > 1e-6)
                throw BackendError("binary variable " + name + " is not within 1e-6 of {0,1}");
            x = r;
        }
        value[it->second] = x;
    }

    SolveResult res;
    res.status = status;
    res.gap = status == SolveStatus::feasible_gap ? gap : 0.0;
    res.penalty_linearized = req.kind == ModelKind::kpl_t;
    res.counts = model.counts;
    for (std::size_t s = 0; s < inst.site_count(); ++s)
        if (value[model.x_var[s]] == 1.0) res.open_sites.push_back(inst.sites()[s].id);
    for (std::size_t r = 0; r < inst.origin_count(); ++r)
        for (const auto& [s, v] : model.y_var[r])
            if (value[v] > 1e-9)
                res.assignment.push_back({inst.origins()[r].id, inst.sites()[s].id, value[v]});

    VerifyReport report = verify_solution(inst, model, res);
    res.objective = report.recomputed_objective;
    res.kp_ede = report.kp_ede;
    // Re-run with the reported objective in place so the mismatch check is live.
    report = verify_solution(inst, model, res);
    if (!report.violations.empty())
        throw BackendError("solution verification failed: " + report.violations.front());
    res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

SolveResult solve(const Instance& inst, const ModelRequest& req, const SolverBackend& backend) {
    if (backend.kind == SolverBackend::Kind::external) return external_solve(inst, req, backend);
    return brute_force_solve(inst, req, backend);
}

}  // namespace kp
