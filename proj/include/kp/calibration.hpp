#pragma once

#include <string>
#include <vector>

#include "kp/instance.hpp"
#include "kp/model.hpp"
#include "kp/solvers.hpp"

namespace kp {

struct CalibrationRecord {
    int iteration = 0;             // 1-based
    double alpha_in = 0.0;         // alpha used for this solve
    double alpha_out = 0.0;        // alpha of the optimal distribution
    double epsilon_target = 0.0;   // epsilon_0
    double epsilon_realized = 0.0; // alpha_in * epsilon_0 / alpha_out
    double kp_ede = 0.0;           // EDE of this iteration's optimum at its own kappa
    std::vector<std::string> open_sites;
};

// Seeds alpha from the nearest-assignment distribution over existing sites;
// falls back to all sites (with a log line) when none exist.
InequalityParams initial_alpha(const Instance& instance, double epsilon_0,
                               std::vector<std::string>* log = nullptr);

struct CalibrationResult {
    std::vector<CalibrationRecord> records;
    SolveResult final_result;
    Distribution seed_distribution;
    std::vector<std::string> log;
    bool converged = false;
    std::string backend_error;  // nonempty when a later iteration failed
};

// Iteration i solves with kappa_i = alpha_i * epsilon_0, recomputes alpha from
// the optimal distribution, and stops when |epsilon_realized - epsilon_0| <=
// tol * |epsilon_0|, when the open set repeats, or after max_iters. A backend
// failure after the first solve is reported with the partial records kept.
CalibrationResult calibrate(const Instance& instance, ModelRequest request,
                            const SolverBackend& backend, double epsilon_0, double tol = 0.05,
                            int max_iters = 2);

}  // namespace kp
