#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kp/instance.hpp"
#include "kp/metrics.hpp"
#include "kp/penalty.hpp"

namespace kp {

enum class ModelKind { pmedian, pcenter, kpl, kpl_sd, kpl_t };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

enum class Relation { le, eq, ge };

struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = 1.0;
    bool integral = false;
};

struct LinearTerm {
    std::size_t var = 0;
    double coeff = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<LinearTerm> terms;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

struct ModelCounts {
    std::size_t x = 0, y = 0, aux = 0;
};

// Solver-neutral linear model. Variable order is deterministic: x by site id,
// then y by (origin id, site id) over retained distance entries, then
// auxiliaries. Existing sites are fixed open through their bounds.
struct MilpModel {
    ModelKind kind = ModelKind::kpl;
    int k = 0;
    std::optional<InequalityParams> params;

    std::vector<Variable> vars;
    std::vector<double> objective;  // dense, aligned with vars
    double objective_constant = 0.0;
    std::vector<Constraint> constraints;

    double coeff_min = 0.0, coeff_max = 0.0;  // range of nonzero objective coefficients
    ModelCounts counts;

    std::vector<std::size_t> x_var;  // per site index
    // per origin: (site index, var index) pairs over retained entries, site-ordered
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> y_var;
    std::optional<std::size_t> bound_var;  // p-center max-distance variable
    std::optional<std::size_t> v_var, q_var;  // penalty auxiliaries

    std::vector<std::string> warnings;
};

struct ModelRequest {
    ModelKind kind = ModelKind::kpl;
    int k = 1;
    std::optional<InequalityParams> params;   // required for kpl / kpl_sd / kpl_t
    std::optional<PenaltyPlan> penalty_plan;  // required for kpl_t
    // Polling convention: existing sites may close and count toward k.
    bool relocate_existing = false;
    // Capacity constraint with binary assignment variables (no demand splitting).
    bool binary_assignment = false;
};

MilpModel build_model(const Instance& instance, const ModelRequest& request);

// One origin-to-site assignment fraction.
struct AssignmentEntry {
    std::string origin;
    std::string site;
    double fraction = 1.0;
};

// Both readings of a (possibly fractional) assignment. For integral
// assignments the two coincide.
struct Evaluation {
    SummaryStats combined;  // each origin travels its assignment-weighted average distance
    SummaryStats split;     // population fractions travel to their own sites
    bool integral = true;
};

Evaluation evaluate_solution(const Instance& instance, const InequalityParams& params,
                             const std::vector<std::string>& open_sites,
                             const std::vector<AssignmentEntry>& assignment,
                             bool check_capacity = false);

// Candidate site indices under the request's relocation convention.
std::vector<std::size_t> candidate_sites(const Instance& instance, const ModelRequest& request);
std::vector<std::size_t> always_open_sites(const Instance& instance, const ModelRequest& request);

}  // namespace kp
