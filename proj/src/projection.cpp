#include "cprrtc/projection.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "cprrtc/errors.hpp"

namespace cprrtc {

bool MotionSegment::operator==(const MotionSegment& other) const {
    if (waypoints.size() != other.waypoints.size()) return false;
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        if (waypoints[i].size() != other.waypoints[i].size()) return false;
        if (!(waypoints[i].array() == other.waypoints[i].array()).all()) return false;
    }
    return true;
}

MotionSegment interpolate_segment(const Configuration& a, const Configuration& b, std::size_t width) {
    if (a.size() != b.size()) throw dimension_error("interpolation endpoints differ in dimension");
    if (width < 2) throw std::invalid_argument("segment width must be >= 2");
    MotionSegment seg;
    seg.waypoints.resize(width);
    seg.waypoints.front() = a;
    const Configuration delta = b - a;
    const double last = static_cast<double>(width - 1);
    for (std::size_t k = 1; k + 1 < width; ++k)
        seg.waypoints[k] = a + (static_cast<double>(k) / last) * delta;
    seg.waypoints.back() = b;
    return seg;
}

void validate_projection_params(const ProjectionParams& p) {
    if (p.tau_sm < 0.0) throw std::invalid_argument("projection tau_sm must be >= 0 (0 = automatic)");
    if (!(p.alpha > 0.0)) throw std::invalid_argument("projection alpha must be positive");
    if (p.max_iters < 1) throw std::invalid_argument("projection max_iters must be >= 1");
    if (p.lambda < 0.0) throw std::invalid_argument("projection lambda must be >= 0");
}

double resolve_tau_sm(const ProjectionParams& params, const MotionSegment& seg) {
    if (params.tau_sm > 0.0) return params.tau_sm;
    const double gap = (seg.back() - seg.front()).norm() / static_cast<double>(seg.width() - 1);
    return std::max(1.5 * gap, 1e-9);
}

namespace {

void check_segment(const MotionSegment& seg, const RobotModel& model) {
    if (seg.width() < 2) throw std::invalid_argument("segment must have at least 2 waypoints");
    for (const auto& w : seg.waypoints) check_dimension(model, w);
}

/// Stage-one result for one waypoint.
struct WaypointUpdate {
    Configuration next;
    bool valid = false;
};

WaypointUpdate project_waypoint(const Configuration& current, const Configuration& previous,
                                const ConstraintSpec& spec, const RobotModel& model,
                                const ProjectionParams& params, double tau_sm) {
    const FrameSet fs = forward_kinematics(model, current);
    const TaskError e_task = task_error(spec, fs.ee_pose);
    const Eigen::VectorXd grad_task =
        damped_pinv_apply(task_jacobian(spec, model, fs), e_task, params.lambda);

    const Configuration j_sm = current - previous;
    const double dist = j_sm.norm();
    const double e_sm = std::max(0.0, dist - tau_sm);

    WaypointUpdate out;
    out.next = current - params.alpha * (grad_task + j_sm * e_sm);
    out.valid = dist < tau_sm && e_task.norm() < spec.tau_task;
    return out;
}

/// Shared state of one parallel projection, the analogue of the block's
/// shared memory.
struct SharedProjection {
    MotionSegment xi;
    std::vector<Configuration> xi_new;
    std::vector<char> valid;
    std::size_t prog = 0;
    bool done = false;
    bool projected = false;
    int iterations = 0;
};

void advance_prog(SharedProjection& sh, ProgressRule rule) {
    const std::size_t w = sh.xi.width();
    for (std::size_t j = sh.prog + 1; j < w; ++j) {
        if (sh.valid[j])
            sh.prog = j;
        else if (rule == ProgressRule::contiguous)
            break;
    }
}

/// Coordinator step run by exactly one worker between the two barriers.
void coordinate(SharedProjection& sh, int iteration, const ProjectionParams& params,
                ProjectionTrace* trace) {
    advance_prog(sh, params.rule);
    sh.iterations = iteration;
    if (sh.prog == sh.xi.width() - 1) {
        sh.projected = true;
        sh.done = true;
    } else {
        for (std::size_t t = sh.prog + 1; t < sh.xi.width(); ++t) sh.xi.waypoints[t] = sh.xi_new[t];
        if (iteration >= params.max_iters) sh.done = true;
    }
    if (trace) {
        trace->prog.push_back(sh.prog);
        trace->buffers.push_back(sh.xi);
    }
}

ProjectionOutcome finish(SharedProjection&& sh, const ConstraintSpec& spec, const RobotModel& model,
                         double tau_sm, bool contract_by_construction) {
    ProjectionOutcome out;
    out.iterations_used = sh.iterations;
    out.final_prog = sh.prog;
    if (!sh.projected) {
        out.status = ProjectionStatus::failed;
        return out;
    }
    bool clamped = false;
    for (auto& w : sh.xi.waypoints) {
        if (!model.within_limits(w)) {
            w = model.clamp(w);
            clamped = true;
        }
    }
    const bool ok = (contract_by_construction && !clamped) ||
                    satisfies_projection_contract(sh.xi, spec, model, tau_sm);
    out.status = ok ? ProjectionStatus::projected : ProjectionStatus::rejected;
    out.segment = std::move(sh.xi);
    return out;
}

}  // namespace

bool satisfies_projection_contract(const MotionSegment& seg, const ConstraintSpec& spec,
                                   const RobotModel& model, double tau_sm) {
    for (std::size_t t = 0; t < seg.width(); ++t) {
        const auto& q = seg.waypoints[t];
        if (!model.within_limits(q)) return false;
        if (!(task_error(spec, model, q).norm() < spec.tau_task)) return false;
        if (t > 0 && !((q - seg.waypoints[t - 1]).norm() < tau_sm)) return false;
    }
    return true;
}

ProjectionOutcome parallel_project(const MotionSegment& seg, const ConstraintSpec& spec,
                                   const RobotModel& model, const ProjectionParams& params,
                                   const ProjectionOptions& options) {
    check_segment(seg, model);
    validate_projection_params(params);
    const double tau_sm = resolve_tau_sm(params, seg);
    const std::size_t width = seg.width();

    SharedProjection sh;
    sh.xi = seg;
    sh.xi_new.resize(width);
    sh.valid.assign(width, 0);
    sh.valid[0] = 1;

    auto stage_one = [&](std::size_t t) {
        auto upd = project_waypoint(sh.xi.waypoints[t], sh.xi.waypoints[t - 1], spec, model, params, tau_sm);
        sh.xi_new[t] = std::move(upd.next);
        sh.valid[t] = upd.valid ? 1 : 0;
    };

    if (options.execution == Execution::concurrent) {
        if (!options.team) throw std::invalid_argument("concurrent projection needs a worker team");
        WorkerTeam& team = *options.team;
        team.run([&](std::size_t worker) {
            for (int i = 1;; ++i) {
                team.for_each_assigned(worker, sh.prog + 1, width, stage_one);
                team.sync();
                if (worker == 0) coordinate(sh, i, params, options.trace);
                team.sync();
                if (sh.done) break;
            }
        });
    } else {
        for (int i = 1; !sh.done; ++i) {
            for (std::size_t t = sh.prog + 1; t < width; ++t) stage_one(t);
            coordinate(sh, i, params, options.trace);
        }
    }
    return finish(std::move(sh), spec, model, tau_sm, params.rule == ProgressRule::contiguous);
}

ProjectionOutcome sequential_project(const MotionSegment& seg, const ConstraintSpec& spec,
                                     const RobotModel& model, const ProjectionParams& params) {
    check_segment(seg, model);
    validate_projection_params(params);
    const double tau_sm = resolve_tau_sm(params, seg);

    SharedProjection sh;
    sh.xi = seg;
    sh.projected = true;
    for (std::size_t t = 1; t < seg.width() && sh.projected; ++t) {
        Configuration& q = sh.xi.waypoints[t];
        bool reached = false;
        for (int k = 0; k < params.max_iters; ++k) {
            const FrameSet fs = forward_kinematics(model, q);
            const TaskError e = task_error(spec, fs.ee_pose);
            if (e.norm() < spec.tau_task) {
                reached = true;
                break;
            }
            ++sh.iterations;
            q -= params.alpha * damped_pinv_apply(task_jacobian(spec, model, fs), e, params.lambda);
        }
        if (!reached) reached = task_error(spec, model, q).norm() < spec.tau_task;
        if (!reached || !((q - sh.xi.waypoints[t - 1]).norm() < tau_sm)) {
            sh.projected = false;
            break;
        }
        sh.prog = t;
    }
    return finish(std::move(sh), spec, model, tau_sm, true);
}

Projector parse_projector(std::string_view name) {
    if (name == "parallel") return Projector::parallel;
    if (name == "naive") return Projector::naive;
    if (name == "literal-gap") return Projector::literal_gap;
    throw std::invalid_argument("unknown projector '" + std::string(name) +
                                "' (expected parallel, naive or literal-gap)");
}

std::string_view to_string(Projector p) {
    switch (p) {
        case Projector::parallel: return "parallel";
        case Projector::naive: return "naive";
        case Projector::literal_gap: return "literal-gap";
    }
    return "?";
}

std::string_view to_string(ProjectionStatus s) {
    switch (s) {
        case ProjectionStatus::projected: return "projected";
        case ProjectionStatus::failed: return "failed";
        case ProjectionStatus::rejected: return "rejected";
    }
    return "?";
}

ProjectionOutcome project_segment(Projector projector, const MotionSegment& seg,
                                  const ConstraintSpec& spec, const RobotModel& model,
                                  const ProjectionParams& params, const ProjectionOptions& options) {
    switch (projector) {
        case Projector::naive: return sequential_project(seg, spec, model, params);
        case Projector::literal_gap: {
            ProjectionParams p = params;
            p.rule = ProgressRule::literal_gap;
            return parallel_project(seg, spec, model, p, options);
        }
        case Projector::parallel: break;
    }
    ProjectionParams p = params;
    p.rule = ProgressRule::contiguous;
    return parallel_project(seg, spec, model, p, options);
}

}  // namespace cprrtc
