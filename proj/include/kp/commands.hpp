#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "kp/penalty.hpp"
#include "kp/solvers.hpp"

namespace kp {

// One reproducible run. Serializes losslessly to/from the JSON config file;
// unknown keys are rejected so typos surface instead of silently defaulting.
struct RunConfig {
    // inputs
    std::string origins_path, sites_path, distances_path;
    std::string distribution_path;
    std::string assignment_path;  // CSV origin_id,site_id,fraction
    std::string nearest;          // "", "existing", "all"
    std::vector<double> epsilons; // score-time epsilon values; falls back to `epsilon`

    // model
    std::string kind = "kpl";  // pmedian|pcenter|kpl|kpl_sd|kpl_t|all
    int k = 1;
    double epsilon = -1.0;
    std::optional<double> alpha_fixed;  // default: seeded from nearest distances
    std::optional<double> d_max;
    bool relocate_existing = false;
    bool binary_assignment = false;

    // penalty
    std::string penalty_plan_path;
    std::optional<PenaltyPlan> penalty_plan;  // inline plan
    std::vector<std::string> penalized_sites; // overrides the sites.csv penalty column
    double error_budget = 1e-3;
    std::optional<double> width_override;
    bool keep_costs = false;
    bool measure_errors = false;

    // backend
    std::string backend = "brute_force";  // or "external"
    std::string command;
    std::optional<double> time_limit_s;
    double mip_gap = 1e-4;
    int threads = 0;
    std::size_t enumeration_cap = 2'000'000;

    // calibration
    double tol = 0.05;
    int max_iters = 2;

    // synth
    std::uint64_t seed = 0;
    int synth_origins = 40, synth_sites = 12, synth_existing = 0, synth_penalized = 0;
    bool synth_capacitated = false;
    std::string out_dir = ".";

    // export / output
    std::string format = "lp";
    std::string out;  // report or model path; empty = stdout
};

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

SolverBackend backend_from_config(const RunConfig& config);

nlohmann::json cmd_score(const RunConfig& config);
nlohmann::json cmd_solve(const RunConfig& config);
nlohmann::json cmd_calibrate(const RunConfig& config);
nlohmann::json cmd_penalty_plan(const RunConfig& config);
nlohmann::json cmd_export(const RunConfig& config);
nlohmann::json cmd_synth(const RunConfig& config);

// Exit-code contract: 2 config, 3 data, 4 infeasible, 5 backend.
int exit_code_for(const std::exception& e);

}  // namespace kp
