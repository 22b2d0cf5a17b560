#pragma once

#include <string>

#include "kp/model.hpp"

namespace kp {

enum class ModelFormat { lp, mps };

ModelFormat model_format_from_string(const std::string& s);

// Deterministic text renderings: fixed row/column order, numeric literals with
// 17 significant digits, metadata (kind, k, params, coefficient range) in
// comments. LP is the format consumed by external solvers and by parse_lp.
std::string write_lp(const MilpModel& model);
std::string write_mps(const MilpModel& model);

void export_model(const MilpModel& model, ModelFormat format, const std::string& path);

// Parses the LP subset emitted by write_lp; used for round-trip checks and by
// tooling that needs to inspect exported models.
MilpModel parse_lp(const std::string& text);

}  // namespace kp
