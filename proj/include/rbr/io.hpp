#pragma once

#include "rbr/model.hpp"
#include "rbr/rta.hpp"

#include <json.hpp>

#include <string>

namespace rbr {

/// Parses the task-set document:
///
///   { "tasks": [ {"id", "C", "T", "D"?, "phi"?, "priority"?, "critical"?,
///                 "Q"?, "lambda"?, "lambda_level"?} ],
///     "restart": {"Cr", "Tr"?} }
///
/// Numbers are decimal or "p/q" strings (JSON integers also accepted) and are
/// read exactly. D defaults to T, phi to 0, critical to true. Without explicit
/// priorities, rate-monotonic order is used and equal periods are rejected.
/// "lambda" is a priority value; "lambda_level" is a 1-based level where level
/// k means the priority of the k-th highest-priority task.
TaskSet parse_taskset(const nlohmann::json& doc);
TaskSet parse_taskset_text(const std::string& text);
TaskSet load_taskset(const std::string& path);

nlohmann::json taskset_to_json(const TaskSet& ts);
void save_taskset(const TaskSet& ts, const std::string& path);

/// Per-task rows: id, R, R_hat, O, B, K, verdict, plus job timings.
nlohmann::json report_to_json(const AnalysisReport& report);

TimeValue parse_time(const nlohmann::json& value);

} // namespace rbr
