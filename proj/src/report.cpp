#include "kp/report.hpp"

#include <cmath>

#include "kp/errors.hpp"

namespace kp {

using nlohmann::json;

namespace {

json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

json stats_json(const SummaryStats& stats, const InequalityParams& params) {
    return json{{"mean", stats.mean},       {"max", stats.max},
                {"stdev", stats.stdev},     {"kp_ede", stats.kp_ede},
                {"epsilon", params.epsilon}, {"alpha", params.alpha},
                {"kappa", params.kappa}};
}

json to_json(const SolveResult& result) {
    json assignment = json::array();
    for (const AssignmentEntry& e : result.assignment)
        assignment.push_back(json{{"origin", e.origin}, {"site", e.site}, {"fraction", e.fraction}});
    return json{{"status", to_string(result.status)},
                {"open_sites", result.open_sites},
                {"objective", finite_or_null(result.objective)},
                {"kp_ede", finite_or_null(result.kp_ede)},
                {"gap", finite_or_null(result.gap)},
                {"runtime_s", result.runtime_s},
                {"penalty_linearized", result.penalty_linearized},
                {"counts", json{{"x", result.counts.x}, {"y", result.counts.y},
                                {"aux", result.counts.aux}}},
                {"assignment", assignment}};
}

json to_json(const CalibrationRecord& record) {
    return json{{"iteration", record.iteration},
                {"alpha_in", record.alpha_in},
                {"alpha_out", record.alpha_out},
                {"epsilon_target", record.epsilon_target},
                {"epsilon_realized", record.epsilon_realized},
                {"kp_ede", record.kp_ede},
                {"open_sites", record.open_sites}};
}

json to_json(const PenaltyPlan& plan) {
    json penalized = json::object();
    for (const auto& [id, c] : plan.penalized) penalized[id] = c;
    const char* mode = plan.khat_mode == PenaltyPlan::KhatMode::k_all
                           ? "k_all"
                           : (plan.khat_mode == PenaltyPlan::KhatMode::k_rem ? "k_rem" : "user");
    return json{{"penalized", penalized},
                {"khat", plan.khat},
                {"khat_mode", mode},
                {"sigma_max", plan.sigma_max},
                {"w", plan.width},
                {"betas", plan.betas},
                {"exact_mode", plan.exact_mode},
                {"selection_cap", plan.selection_cap},
                {"K_all", finite_or_null(plan.k_all)},
                {"K_rem", finite_or_null(plan.k_rem)},
                {"sigma_all", finite_or_null(plan.sigma_all)},
                {"N", plan.n_selected},
                {"warnings", plan.warnings}};
}

PenaltyPlan penalty_plan_from_json(const json& j) {
    PenaltyPlan plan;
    try {
        for (const auto& [id, c] : j.at("penalized").items())
            plan.penalized.emplace_back(id, c.get<double>());
        std::sort(plan.penalized.begin(), plan.penalized.end());
        plan.khat = j.at("khat").get<double>();
        const std::string mode = j.value("khat_mode", "user");
        if (mode == "k_all")
            plan.khat_mode = PenaltyPlan::KhatMode::k_all;
        else if (mode == "k_rem")
            plan.khat_mode = PenaltyPlan::KhatMode::k_rem;
        else if (mode == "user")
            plan.khat_mode = PenaltyPlan::KhatMode::user;
        else
            throw ConfigError("penalty plan: unknown khat_mode '" + mode + "'");
        plan.sigma_max = j.value("sigma_max", 0.0);
        plan.width = j.value("w", 0.0);
        plan.betas = j.value("betas", std::vector<double>{});
        plan.exact_mode = j.value("exact_mode", false);
        plan.selection_cap = j.value("selection_cap", 0);
        if (j.contains("K_all") && !j.at("K_all").is_null()) plan.k_all = j.at("K_all").get<double>();
        if (j.contains("K_rem") && !j.at("K_rem").is_null()) plan.k_rem = j.at("K_rem").get<double>();
        if (j.contains("sigma_all") && !j.at("sigma_all").is_null())
            plan.sigma_all = j.at("sigma_all").get<double>();
        plan.n_selected = j.value("N", -1);
        plan.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid penalty plan JSON: ") + e.what());
    }
    return plan;
}

json to_json(const KhatAnchors& anchors) {
    return json{{"K_all", anchors.k_all},
                {"K_rem", anchors.k_rem},
                {"sigma_all", anchors.sigma_all},
                {"N", anchors.n_selected},
                {"open_all", anchors.open_all}};
}

json to_json(const ExponentCheck& check) {
    return json{{"sigma_max_le_mu", check.sigma_max_le_mu},
                {"exponent_le_abs_eps", check.exponent_le_abs_eps},
                {"per_site_ok", check.per_site_ok},
                {"mu", check.mu},
                {"sigma_max", check.sigma_max},
                {"exponent", check.exponent}};
}

json tool_json() {
    return json{{"name", kToolName}, {"version", kToolVersion}};
}

}  // namespace kp
