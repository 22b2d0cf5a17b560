#pragma once

#include <json.hpp>

#include "kp/calibration.hpp"
#include "kp/distribution.hpp"
#include "kp/metrics.hpp"
#include "kp/penalty.hpp"
#include "kp/planning.hpp"
#include "kp/solvers.hpp"

namespace kp {

inline constexpr const char* kToolName = "kpfl";
inline constexpr const char* kToolVersion = "0.1.0";

// Flat stats object: mean, max, stdev, kp_ede, epsilon, alpha, kappa.
nlohmann::json stats_json(const SummaryStats& stats, const InequalityParams& params);

nlohmann::json to_json(const SolveResult& result);
nlohmann::json to_json(const CalibrationRecord& record);
nlohmann::json to_json(const PenaltyPlan& plan);
PenaltyPlan penalty_plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KhatAnchors& anchors);
nlohmann::json to_json(const ExponentCheck& check);

nlohmann::json tool_json();

}  // namespace kp
