#include "kp/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "kp/calibration.hpp"
#include "kp/csv.hpp"
#include "kp/errors.hpp"
#include "kp/export.hpp"
#include "kp/planning.hpp"
#include "kp/report.hpp"
#include "kp/synth.hpp"

namespace kp {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_val(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

Instance load_from_config(const RunConfig& config) {
    if (config.origins_path.empty() || config.sites_path.empty() ||
        config.distances_path.empty())
        throw ConfigError("instance paths (origins, sites, distances) are required");
    Instance inst = load_instance(config.origins_path, config.sites_path, config.distances_path);
    if (config.d_max) return sparsify(inst, *config.d_max);
    return inst;
}

InequalityParams params_for(const RunConfig& config, const Instance& inst, double epsilon,
                            std::vector<std::string>* log = nullptr) {
    if (config.alpha_fixed) return make_params(*config.alpha_fixed, epsilon);
    InequalityParams p = initial_alpha(inst, epsilon, log);
    return p;
}

PenaltyPlan plan_for(const RunConfig& config) {
    if (config.penalty_plan) return *config.penalty_plan;
    if (!config.penalty_plan_path.empty()) {
        std::ifstream in(config.penalty_plan_path);
        if (!in) throw DataError("cannot open penalty plan " + config.penalty_plan_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw DataError("penalty plan " + config.penalty_plan_path + ": " + e.what());
        }
        return penalty_plan_from_json(j);
    }
    throw ConfigError("kpl_t requires a penalty plan (inline or --penalty-plan PATH)");
}

std::vector<AssignmentEntry> load_assignment_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header != std::vector<std::string>{"origin_id", "site_id", "fraction"})
        throw DataError(path + ": expected header 'origin_id,site_id,fraction'");
    std::vector<AssignmentEntry> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string where = path + " row " + std::to_string(i + 1);
        out.push_back({t.rows[i][0], t.rows[i][1],
                       csv::parse_double(t.rows[i][2], where + " fraction")});
    }
    return out;
}

std::vector<double> score_epsilons(const RunConfig& config) {
    std::vector<double> eps = config.epsilons;
    if (eps.empty()) eps.push_back(config.epsilon);
    for (double e : eps)
        if (!(e < 0.0)) throw ConfigError("epsilon must be strictly negative (got " +
                                          std::to_string(e) + ")");
    return eps;
}

Distribution assignment_mode_a(const Instance& inst,
                               const std::vector<AssignmentEntry>& assignment) {
    std::vector<double> z(inst.origin_count(), 0.0), row(inst.origin_count(), 0.0);
    for (const AssignmentEntry& e : assignment) {
        const std::size_t r = inst.origin_index(e.origin);
        const std::size_t s = inst.site_index(e.site);
        if (!inst.has_distance(r, s))
            throw DataError("assignment uses missing distance entry (" + e.origin + ", " +
                            e.site + ")");
        z[r] += e.fraction * inst.distance(r, s);
        row[r] += e.fraction;
    }
    for (std::size_t r = 0; r < inst.origin_count(); ++r)
        if (std::abs(row[r] - 1.0) > 1e-9)
            throw InfeasibleError("assignment row sum for origin " + inst.origins()[r].id +
                                  " is " + std::to_string(row[r]));
    return make_distribution(std::move(z), {inst.population_weights().begin(),
                                            inst.population_weights().end()});
}

json stats_block(const Distribution& dist, const RunConfig& config, double epsilon) {
    InequalityParams params = config.alpha_fixed ? make_params(*config.alpha_fixed, epsilon)
                                                 : make_params(alpha(dist), epsilon);
    return stats_json(summarize(dist, params), params);
}

json solve_one(const Instance& inst, const RunConfig& config, ModelKind kind,
               const InequalityParams& params, const SolverBackend& backend) {
    ModelRequest req;
    req.kind = kind;
    req.k = config.k;
    req.params = params;
    req.relocate_existing = config.relocate_existing;
    req.binary_assignment = config.binary_assignment;
    if (kind == ModelKind::kpl_t) req.penalty_plan = plan_for(config);

    SolveResult result = solve(inst, req, backend);
    MilpModel model = build_model(inst, req);
    VerifyReport verify = verify_solution(inst, model, result);

    Evaluation eval = evaluate_solution(inst, params, result.open_sites, result.assignment,
                                        inst.capacitated());
    json out{{"kind", to_string(kind)},
             {"result", to_json(result)},
             {"stats", stats_json(eval.combined, params)},
             {"verify", json{{"violations", verify.violations},
                             {"recomputed_objective", verify.recomputed_objective}}},
             {"model", json{{"coeff_min", model.coeff_min},
                            {"coeff_max", model.coeff_max},
                            {"counts", json{{"x", model.counts.x},
                                            {"y", model.counts.y},
                                            {"aux", model.counts.aux}}},
                            {"warnings", model.warnings}}}};
    if (!eval.integral) out["split_stats"] = stats_json(eval.split, params);
    return out;
}

}  // namespace

SolverBackend backend_from_config(const RunConfig& config) {
    SolverBackend b;
    if (config.backend == "brute_force" || config.backend == "brute")
        b.kind = SolverBackend::Kind::brute_force;
    else if (config.backend == "external")
        b.kind = SolverBackend::Kind::external;
    else
        throw ConfigError("unknown backend '" + config.backend + "'");
    b.command = config.command;
    b.time_limit_s = config.time_limit_s;
    b.mip_gap = config.mip_gap;
    b.threads = config.threads;
    b.enumeration_cap = config.enumeration_cap;
    return b;
}

json config_to_json(const RunConfig& c) {
    json penalty{{"plan_path", c.penalty_plan_path},
                 {"plan", c.penalty_plan ? to_json(*c.penalty_plan) : json(nullptr)},
                 {"sites", c.penalized_sites},
                 {"error_budget", c.error_budget},
                 {"width", opt_json(c.width_override)},
                 {"keep_costs", c.keep_costs},
                 {"measure", c.measure_errors}};
    return json{
        {"instance", json{{"origins", c.origins_path},
                          {"sites", c.sites_path},
                          {"distances", c.distances_path}}},
        {"distribution", c.distribution_path},
        {"assignment", c.assignment_path},
        {"nearest", c.nearest},
        {"epsilons", c.epsilons},
        {"model", json{{"kind", c.kind},
                       {"k", c.k},
                       {"epsilon", c.epsilon},
                       {"alpha", opt_json(c.alpha_fixed)},
                       {"d_max", opt_json(c.d_max)},
                       {"relocate_existing", c.relocate_existing},
                       {"binary_assignment", c.binary_assignment}}},
        {"penalty", penalty},
        {"backend", json{{"kind", c.backend},
                         {"command", c.command},
                         {"time_limit_s", opt_json(c.time_limit_s)},
                         {"mip_gap", c.mip_gap},
                         {"threads", c.threads},
                         {"enumeration_cap", c.enumeration_cap}}},
        {"calibration", json{{"tol", c.tol}, {"max_iters", c.max_iters}}},
        {"synth", json{{"seed", c.seed},
                       {"origins", c.synth_origins},
                       {"sites", c.synth_sites},
                       {"existing", c.synth_existing},
                       {"penalized", c.synth_penalized},
                       {"capacitated", c.synth_capacitated},
                       {"out_dir", c.out_dir}}},
        {"format", c.format},
        {"out", c.out}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    reject_unknown_keys(j, {"instance", "distribution", "assignment", "nearest", "epsilons",
                            "model", "penalty", "backend", "calibration", "synth", "format",
                            "out"},
                        "config");
    try {
        if (j.contains("instance")) {
            const json& i = j.at("instance");
            reject_unknown_keys(i, {"origins", "sites", "distances"}, "instance");
            read_val(i, "origins", c.origins_path);
            read_val(i, "sites", c.sites_path);
            read_val(i, "distances", c.distances_path);
        }
        read_val(j, "distribution", c.distribution_path);
        read_val(j, "assignment", c.assignment_path);
        read_val(j, "nearest", c.nearest);
        read_val(j, "epsilons", c.epsilons);
        if (j.contains("model")) {
            const json& m = j.at("model");
            reject_unknown_keys(m, {"kind", "k", "epsilon", "alpha", "d_max",
                                    "relocate_existing", "binary_assignment"},
                                "model");
            read_val(m, "kind", c.kind);
            read_val(m, "k", c.k);
            read_val(m, "epsilon", c.epsilon);
            read_opt(m, "alpha", c.alpha_fixed);
            read_opt(m, "d_max", c.d_max);
            read_val(m, "relocate_existing", c.relocate_existing);
            read_val(m, "binary_assignment", c.binary_assignment);
        }
        if (j.contains("penalty")) {
            const json& p = j.at("penalty");
            reject_unknown_keys(p, {"plan_path", "plan", "sites", "error_budget", "width",
                                    "keep_costs", "measure"},
                                "penalty");
            read_val(p, "plan_path", c.penalty_plan_path);
            if (p.contains("plan") && !p.at("plan").is_null())
                c.penalty_plan = penalty_plan_from_json(p.at("plan"));
            read_val(p, "sites", c.penalized_sites);
            read_val(p, "error_budget", c.error_budget);
            read_opt(p, "width", c.width_override);
            read_val(p, "keep_costs", c.keep_costs);
            read_val(p, "measure", c.measure_errors);
        }
        if (j.contains("backend")) {
            const json& b = j.at("backend");
            reject_unknown_keys(b, {"kind", "command", "time_limit_s", "mip_gap", "threads",
                                    "enumeration_cap"},
                                "backend");
            read_val(b, "kind", c.backend);
            read_val(b, "command", c.command);
            read_opt(b, "time_limit_s", c.time_limit_s);
            read_val(b, "mip_gap", c.mip_gap);
            read_val(b, "threads", c.threads);
            read_val(b, "enumeration_cap", c.enumeration_cap);
        }
        if (j.contains("calibration")) {
            const json& k = j.at("calibration");
            reject_unknown_keys(k, {"tol", "max_iters"}, "calibration");
            read_val(k, "tol", c.tol);
            read_val(k, "max_iters", c.max_iters);
        }
        if (j.contains("synth")) {
            const json& s = j.at("synth");
            reject_unknown_keys(s, {"seed", "origins", "sites", "existing", "penalized",
                                    "capacitated", "out_dir"},
                                "synth");
            read_val(s, "seed", c.seed);
            read_val(s, "origins", c.synth_origins);
            read_val(s, "sites", c.synth_sites);
            read_val(s, "existing", c.synth_existing);
            read_val(s, "penalized", c.synth_penalized);
            read_val(s, "capacitated", c.synth_capacitated);
            read_val(s, "out_dir", c.out_dir);
        }
        read_val(j, "format", c.format);
        read_val(j, "out", c.out);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

json cmd_score(const RunConfig& config) {
    const std::vector<double> eps = score_epsilons(config);
    json blocks = json::array();

    if (!config.distribution_path.empty()) {
        Distribution dist = load_distribution_csv(config.distribution_path);
        for (double e : eps) blocks.push_back(stats_block(dist, config, e));
    } else {
        Instance inst = load_from_config(config);
        Distribution dist;
        std::optional<std::vector<AssignmentEntry>> assignment;
        if (!config.assignment_path.empty()) {
            assignment = load_assignment_csv(config.assignment_path);
            dist = assignment_mode_a(inst, *assignment);
        } else if (config.nearest == "existing") {
            dist = nearest_assignment_distribution(inst, SiteFilter::existing_only);
        } else if (config.nearest == "all" || config.nearest.empty()) {
            dist = nearest_assignment_distribution(inst, SiteFilter::all);
        } else {
            throw ConfigError("nearest must be 'existing' or 'all'");
        }
        for (double e : eps) blocks.push_back(stats_block(dist, config, e));
    }
    if (blocks.size() == 1) return blocks.front();
    return blocks;
}

json cmd_solve(const RunConfig& config) {
    Instance inst = load_from_config(config);
    SolverBackend backend = backend_from_config(config);

    json report{{"tool", tool_json()}, {"config", config_to_json(config)}};
    if (!inst.warnings().empty()) report["warnings"] = inst.warnings();

    if (config.kind == "all") {
        std::vector<std::string> log;
        InequalityParams params = params_for(config, inst, config.epsilon, &log);
        json comparison = json::array();
        for (ModelKind kind : {ModelKind::pmedian, ModelKind::pcenter, ModelKind::kpl})
            comparison.push_back(solve_one(inst, config, kind, params, backend));
        report["comparison"] = comparison;
        report["params"] =
            json{{"epsilon", params.epsilon}, {"alpha", params.alpha}, {"kappa", params.kappa}};
        if (!log.empty()) report["log"] = log;
        return report;
    }

    const ModelKind kind = model_kind_from_string(config.kind);
    std::vector<std::string> log;
    InequalityParams params = params_for(config, inst, config.epsilon, &log);
    report.update(solve_one(inst, config, kind, params, backend));
    if (!log.empty()) report["log"] = log;
    return report;
}

json cmd_calibrate(const RunConfig& config) {
    Instance inst = load_from_config(config);
    SolverBackend backend = backend_from_config(config);
    ModelRequest req;
    req.kind = config.kind == "all" ? ModelKind::kpl : model_kind_from_string(config.kind);
    if (req.kind != ModelKind::kpl && req.kind != ModelKind::kpl_sd)
        throw ConfigError("calibrate supports kpl or kpl_sd");
    req.k = config.k;
    req.relocate_existing = config.relocate_existing;
    req.binary_assignment = config.binary_assignment;

    CalibrationResult cal =
        calibrate(inst, req, backend, config.epsilon, config.tol, config.max_iters);

    json records = json::array();
    for (const CalibrationRecord& r : cal.records) records.push_back(to_json(r));
    json report{{"tool", tool_json()},
                {"config", config_to_json(config)},
                {"records", records},
                {"converged", cal.converged},
                {"seed_alpha", alpha(cal.seed_distribution)}};
    if (!cal.log.empty()) report["log"] = cal.log;
    if (!cal.backend_error.empty()) report["backend_error"] = cal.backend_error;
    if (!cal.records.empty()) {
        const CalibrationRecord& last = cal.records.back();
        InequalityParams params = make_params(last.alpha_in, config.epsilon);
        Evaluation eval = evaluate_solution(inst, params, cal.final_result.open_sites,
                                            cal.final_result.assignment, inst.capacitated());
        report["final"] = json{{"result", to_json(cal.final_result)},
                               {"stats", stats_json(eval.combined, params)}};
    }
    return report;
}

json cmd_penalty_plan(const RunConfig& config) {
    Instance inst = load_from_config(config);
    SolverBackend backend = backend_from_config(config);
    std::vector<std::string> log;
    InequalityParams params = params_for(config, inst, config.epsilon, &log);

    // Penalized set: explicit list, else every site carrying a penalty cell.
    std::vector<std::pair<std::string, double>> penalized;
    if (!config.penalized_sites.empty()) {
        for (const std::string& id : config.penalized_sites) {
            const Site& s = inst.sites()[inst.site_index(id)];
            penalized.emplace_back(id, s.penalty.value_or(0.0));
        }
    } else {
        for (const Site& s : inst.sites())
            if (s.penalty) penalized.emplace_back(s.id, *s.penalty);
    }
    if (penalized.empty()) throw ConfigError("empty penalized set");

    ModelRequest req;
    req.kind = inst.capacitated() ? ModelKind::kpl_sd : ModelKind::kpl;
    req.k = config.k;
    req.params = params;
    req.relocate_existing = config.relocate_existing;
    req.binary_assignment = config.binary_assignment;

    PlanOptions options;
    options.error_budget = config.error_budget;
    options.width_override = config.width_override;
    options.keep_costs = config.keep_costs;

    PenaltyPlan plan = recommend_plan(inst, req, backend, penalized, options);

    Distribution alpha_dist = inst.existing_indices().empty()
                                  ? nearest_assignment_distribution(inst, SiteFilter::all)
                                  : nearest_assignment_distribution(inst, SiteFilter::existing_only);
    ExponentCheck check = exponent_range_check(plan, alpha_dist, params);

    const double hat_bound = under_penalty_bound(plan.sigma_all, plan.sigma_all, params.kappa)
                                 .at_sigma_all;
    const double tangent_bound =
        plan.exact_mode ? 0.0 : std::log1p(-tangent_gap(plan.width)) / params.kappa;
    json bounds{{"hat", hat_bound},
                {"tangent", tangent_bound},
                {"combined", hat_bound + tangent_bound}};

    json report{{"tool", tool_json()},
                {"config", config_to_json(config)},
                {"params", json{{"epsilon", params.epsilon},
                                {"alpha", params.alpha},
                                {"kappa", params.kappa}}},
                {"plan", to_json(plan)},
                {"bounds", bounds},
                {"checks", to_json(check)}};
    if (!log.empty()) report["log"] = log;

    if (config.measure_errors) {
        ModelRequest penalized_req = req;
        penalized_req.kind = ModelKind::kpl_t;
        penalized_req.penalty_plan = plan;
        PenaltyMeasurement m = measure_penalty_errors(inst, penalized_req, backend);
        report["measured"] = json{{"sigma_star", m.sigma_star},
                                  {"k_star", m.k_star},
                                  {"delta", m.delta},
                                  {"sigma_hat", m.sigma_hat},
                                  {"sigma_ddot", m.sigma_ddot},
                                  {"hat_error", m.hat_error},
                                  {"under_penalty", m.sigma_star - m.sigma_hat},
                                  {"linearization", m.sigma_hat - m.sigma_ddot},
                                  {"open_sites", m.result.open_sites}};
    }
    return report;
}

json cmd_export(const RunConfig& config) {
    Instance inst = load_from_config(config);
    if (config.out.empty()) throw ConfigError("export requires --out PATH");
    const ModelKind kind = model_kind_from_string(config.kind);

    ModelRequest req;
    req.kind = kind;
    req.k = config.k;
    req.relocate_existing = config.relocate_existing;
    req.binary_assignment = config.binary_assignment;
    if (kind != ModelKind::pmedian && kind != ModelKind::pcenter)
        req.params = params_for(config, inst, config.epsilon);
    else if (config.alpha_fixed)
        req.params = make_params(*config.alpha_fixed, config.epsilon);
    if (kind == ModelKind::kpl_t) req.penalty_plan = plan_for(config);

    MilpModel model = build_model(inst, req);
    export_model(model, model_format_from_string(config.format), config.out);
    return json{{"tool", tool_json()},
                {"config", config_to_json(config)},
                {"path", config.out},
                {"format", config.format},
                {"columns", model.vars.size()},
                {"rows", model.constraints.size()},
                {"coeff_min", model.coeff_min},
                {"coeff_max", model.coeff_max},
                {"counts", json{{"x", model.counts.x},
                                {"y", model.counts.y},
                                {"aux", model.counts.aux}}}};
}

json cmd_synth(const RunConfig& config) {
    SynthSpec spec;
    spec.seed = config.seed;
    spec.origins = config.synth_origins;
    spec.sites = config.synth_sites;
    spec.existing = config.synth_existing;
    spec.penalized = config.synth_penalized;
    spec.capacitated = config.synth_capacitated;
    spec.k = config.k;
    SynthFiles files = synthesize(spec);

    namespace fs = std::filesystem;
    fs::path dir(config.out_dir.empty() ? "." : config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    auto write = [&](const char* name, const std::string& content) {
        const std::string path = (dir / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path);
        out << content;
        return path;
    };
    const std::string op = write("origins.csv", files.origins_csv);
    const std::string sp = write("sites.csv", files.sites_csv);
    const std::string dp = write("distances.csv", files.distances_csv);
    return json{{"tool", tool_json()},
                {"config", config_to_json(config)},
                {"origins", op},
                {"sites", sp},
                {"distances", dp}};
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const DataError*>(&e)) return 3;
    if (dynamic_cast<const InfeasibleError*>(&e)) return 4;
    if (dynamic_cast<const BackendError*>(&e)) return 5;
    return 1;
}

}  // namespace kp
