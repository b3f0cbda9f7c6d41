#pragma once

#include <filesystem>
#include <istream>
#include <random>
#include <string>

#include <json.hpp>

#include "cprrtc/planner.hpp"

namespace cprrtc {

/// Constraint block:
///   {"kind": "plane"|"line"|"none", "normal": [..], "offset": d,
///    "point": [..], "direction": [..], "fixed_orientation": [w, x, y, z],
///    "angular_weight": w, "tau_task": t}
/// `tau_task` may be the string "inf" for the unconstrained sentinel.
ConstraintSpec parse_constraint(const nlohmann::json& node, const std::string& path = "$.constraint");
nlohmann::json constraint_to_json(const ConstraintSpec& spec);

/// Overlays the fields present in `node` onto `params`:
///   {"step_size", "width", "max_iterations", "time_budget_ms",
///    "connect_tolerance", "connect_min_progress", "extensions_per_iteration",
///    "projection": {"alpha", "max_iters", "lambda", "tau_sm"}}
void apply_planner_params(const nlohmann::json& node, PlannerParams& params, const std::string& path = "$.params");

/// Problem document. `robot` and `scene` are paths relative to `base_dir`;
/// an optional integer `densify` subdivides the scene.
PlanProblem parse_problem(const nlohmann::json& doc, const std::filesystem::path& base_dir);
PlanProblem load_problem_file(const std::string& path);

/// Moves q onto the constraint manifold with full damped least-squares
/// steps. Returns true when ||task error|| < tolerance within `max_iters`.
bool project_configuration(const ConstraintSpec& spec, const RobotModel& model, Configuration& q,
                           double tolerance, int max_iters = 200, double lambda = 1e-3);

/// Draws a collision-free, in-limits configuration satisfying the
/// constraint to a tenth of its tolerance. Throws std::runtime_error after
/// `attempts` failures.
Configuration sample_valid_configuration(const RobotModel& model, const Scene& scene,
                                         const ConstraintSpec& spec, std::mt19937_64& rng,
                                         int attempts = 20000);

}  // namespace cprrtc
