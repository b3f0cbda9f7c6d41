#include "cprrtc/problem.hpp"

#include <cmath>
#include <fstream>

#include "cprrtc/errors.hpp"
#include "json_util.hpp"

namespace cprrtc {

using detail::json;

ConstraintSpec parse_constraint(const json& node, const std::string& path) {
    using detail::as_number;
    using detail::as_vec3;
    using detail::require;

    ConstraintSpec spec;
    const json& kind = require(node, "kind", path);
    if (kind == "plane") {
        spec.position = PlaneConstraint{as_vec3(require(node, "normal", path), path + ".normal"),
                                        as_number(require(node, "offset", path), path + ".offset")};
    } else if (kind == "line") {
        spec.position = LineConstraint{as_vec3(require(node, "point", path), path + ".point"),
                                       as_vec3(require(node, "direction", path), path + ".direction")};
    } else if (kind == "none") {
        spec.position = FreePosition{};
    } else {
        throw parse_error(path + ".kind", "expected \"plane\", \"line\" or \"none\"");
    }
    if (auto it = node.find("fixed_orientation"); it != node.end() && !it->is_null()) {
        const auto wxyz = detail::as_vector(*it, path + ".fixed_orientation", 4);
        spec.fixed_orientation = Quat(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
    }
    if (auto it = node.find("angular_weight"); it != node.end())
        spec.angular_weight = as_number(*it, path + ".angular_weight");
    if (auto it = node.find("tau_task"); it != node.end()) spec.tau_task = as_number(*it, path + ".tau_task");
    validate_constraint(spec);
    return spec;
}

json constraint_to_json(const ConstraintSpec& spec) {
    json out;
    if (const auto* p = std::get_if<PlaneConstraint>(&spec.position)) {
        out["kind"] = "plane";
        out["normal"] = detail::to_array(p->normal);
        out["offset"] = p->offset;
    } else if (const auto* l = std::get_if<LineConstraint>(&spec.position)) {
        out["kind"] = "line";
        out["point"] = detail::to_array(l->point);
        out["direction"] = detail::to_array(l->direction);
    } else {
        out["kind"] = "none";
    }
    if (spec.fixed_orientation) {
        const auto& q = *spec.fixed_orientation;
        out["fixed_orientation"] = {q.w(), q.x(), q.y(), q.z()};
        out["angular_weight"] = spec.angular_weight;
    }
    if (std::isinf(spec.tau_task))
        out["tau_task"] = "inf";
    else
        out["tau_task"] = spec.tau_task;
    return out;
}

void apply_planner_params(const json& node, PlannerParams& params, const std::string& path) {
    using detail::as_integer;
    using detail::as_number;
    if (!node.is_object()) throw parse_error(path, "expected an object");
    auto positive_int = [&](const char* key) {
        const auto v = as_integer(node.at(key), path + "." + key);
        if (v < 1) throw validation_error(path.substr(2) + "." + key + ": must be >= 1");
        return static_cast<std::size_t>(v);
    };
    if (node.contains("step_size")) params.step_size = as_number(node["step_size"], path + ".step_size");
    if (node.contains("width")) params.width = positive_int("width");
    if (node.contains("max_iterations")) params.max_iterations = positive_int("max_iterations");
    if (node.contains("time_budget_ms"))
        params.time_budget_ms = as_number(node["time_budget_ms"], path + ".time_budget_ms");
    if (node.contains("connect_min_progress"))
        params.connect_min_progress = as_number(node["connect_min_progress"], path + ".connect_min_progress");
    if (node.contains("connect_tolerance"))
        params.connect_tolerance = as_number(node["connect_tolerance"], path + ".connect_tolerance");
    if (node.contains("extensions_per_iteration"))
        params.extensions_per_iteration = positive_int("extensions_per_iteration");
    if (auto it = node.find("projection"); it != node.end()) {
        const std::string pp = path + ".projection";
        const json& p = *it;
        if (!p.is_object()) throw parse_error(pp, "expected an object");
        if (p.contains("alpha")) params.projection.alpha = as_number(p["alpha"], pp + ".alpha");
        if (p.contains("max_iters"))
            params.projection.max_iters = static_cast<int>(as_integer(p["max_iters"], pp + ".max_iters"));
        if (p.contains("lambda")) params.projection.lambda = as_number(p["lambda"], pp + ".lambda");
        if (p.contains("tau_sm")) params.projection.tau_sm = as_number(p["tau_sm"], pp + ".tau_sm");
    }
    validate_planner_params(params);
}

PlanProblem parse_problem(const json& doc, const std::filesystem::path& base_dir) {
    using detail::require;
    PlanProblem problem;
    if (auto it = doc.find("id"); it != doc.end() && it->is_string()) problem.id = it->get<std::string>();
    const auto& robot = require(doc, "robot", "$");
    const auto& scene = require(doc, "scene", "$");
    if (!robot.is_string()) throw parse_error("$.robot", "expected a file path");
    if (!scene.is_string()) throw parse_error("$.scene", "expected a file path");
    problem.model = load_robot_file((base_dir / robot.get<std::string>()).string());
    problem.scene = load_scene_file((base_dir / scene.get<std::string>()).string());
    if (auto it = doc.find("densify"); it != doc.end()) {
        const auto k = detail::as_integer(*it, "$.densify");
        if (k < 1) throw validation_error("densify: must be >= 1");
        problem.scene = subdivide_scene(problem.scene, static_cast<std::size_t>(k));
    }
    problem.constraint = parse_constraint(require(doc, "constraint", "$"));
    const auto n = static_cast<long>(problem.model.dof());
    problem.start = detail::as_vector(require(doc, "start", "$"), "$.start", n);
    problem.goal = detail::as_vector(require(doc, "goal", "$"), "$.goal", n);
    if (auto it = doc.find("params"); it != doc.end()) apply_planner_params(*it, problem.params);
    return problem;
}

PlanProblem load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open problem file " + path);
    const json doc = detail::parse_document(in);
    return parse_problem(doc, std::filesystem::path(path).parent_path());
}

bool project_configuration(const ConstraintSpec& spec, const RobotModel& model, Configuration& q,
                           double tolerance, int max_iters, double lambda) {
    for (int i = 0; i < max_iters; ++i) {
        const FrameSet fs = forward_kinematics(model, q);
        const TaskError e = task_error(spec, fs.ee_pose);
        if (e.norm() < tolerance) return true;
        q -= damped_pinv_apply(task_jacobian(spec, model, fs), e, lambda);
    }
    return task_error(spec, model, q).norm() < tolerance;
}

Configuration sample_valid_configuration(const RobotModel& model, const Scene& scene,
                                         const ConstraintSpec& spec, std::mt19937_64& rng, int attempts) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Eigen::VectorXd lo = model.lower_limits();
    const Eigen::VectorXd hi = model.upper_limits();
    const double tolerance = std::isinf(spec.tau_task) ? 1.0 : 0.1 * spec.tau_task;
    for (int a = 0; a < attempts; ++a) {
        Configuration q(lo.size());
        for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
        if (spec.dim() > 0 && !std::isinf(spec.tau_task) && !project_configuration(spec, model, q, tolerance))
            continue;
        if (!model.within_limits(q)) continue;
        if (!validate_configuration(q, scene, model)) continue;
        return q;
    }
    throw std::runtime_error("no valid configuration found after " + std::to_string(attempts) + " attempts");
}

}  // namespace cprrtc
