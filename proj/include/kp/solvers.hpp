#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kp/model.hpp"

namespace kp {

enum class SolveStatus { optimal, feasible_gap, infeasible, error };

std::string to_string(SolveStatus status);

struct SolveResult {
    std::vector<std::string> open_sites;      // id-sorted; includes fixed-open existing sites
    std::vector<AssignmentEntry> assignment;  // origin-major, site-sorted
    double objective = std::numeric_limits<double>::quiet_NaN();
    double kp_ede = std::numeric_limits<double>::quiet_NaN();  // via the proxy when applicable
    SolveStatus status = SolveStatus::error;
    double gap = 0.0;
    double runtime_s = 0.0;
    // True when the objective used the tangent hull for the penalty term (as a
    // MILP solver would); the enumeration oracle prices the penalty exactly.
    bool penalty_linearized = false;
    ModelCounts counts;
};

struct SolverBackend {
    enum class Kind { brute_force, external };
    Kind kind = Kind::brute_force;
    // External command template; {model} and {solution} are substituted.
    // Exit 0 means proven optimal, exit 2 means incumbent at a gap.
    std::string command;
    std::optional<double> time_limit_s;
    double mip_gap = 1e-4;  // default protocol; 5e-3 is the relaxed profile
    int threads = 0;        // 0 = hardware concurrency
    std::size_t enumeration_cap = 2'000'000;
};

SolveResult solve(const Instance& instance, const ModelRequest& request,
                  const SolverBackend& backend);

// Exhaustive enumeration over k-subsets of candidate sites. Uncapacitated
// kinds assign each origin to its nearest open site (optimal for p-median,
// p-center and the proxy alike); the capacitated kind prices each subset with
// the transportation subproblem. The kpl_t objective applies the penalty term
// exactly, with no linearization.
SolveResult brute_force_solve(const Instance& instance, const ModelRequest& request,
                              const SolverBackend& backend = {});

struct TransportArc {
    std::size_t origin = 0;
    std::size_t site = 0;      // instance site index
    double fraction = 0.0;     // share of the origin's population
};

// Exact minimum of sum p_r y_{rs} cost(r,s) subject to full assignment and
// site capacities, via successive shortest paths on the bipartite network.
// cost(r,s) must be >= 0; +inf marks an absent arc.
std::vector<TransportArc> transportation_solve(
    std::span<const std::size_t> open_sites, const Instance& instance,
    const std::function<double(std::size_t, std::size_t)>& unit_cost);

struct VerifyReport {
    std::vector<std::string> violations;
    double recomputed_objective = std::numeric_limits<double>::quiet_NaN();
    double kp_ede = std::numeric_limits<double>::quiet_NaN();
};

// Recomputes the objective from the assignment, checks every SolveResult
// invariant against the model, and recovers the EDE for the KP family.
VerifyReport verify_solution(const Instance& instance, const MilpModel& model,
                             const SolveResult& result);

// Exports the model, runs the configured command, parses the solution file
// (`name value` lines, '#' comments), verifies, and reports.
SolveResult external_solve(const Instance& instance, const ModelRequest& request,
                           const SolverBackend& backend);

std::vector<std::pair<std::string, double>> parse_solution_file(const std::string& path,
                                                                double* reported_gap);

}  // namespace kp
