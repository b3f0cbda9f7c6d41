#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "cprrtc/constraints.hpp"
#include "cprrtc/kinematics.hpp"
#include "cprrtc/worker_team.hpp"

namespace cprrtc {

/// Exactly W waypoints; waypoints[0] is the fixed start.
struct MotionSegment {
    std::vector<Configuration> waypoints;

    std::size_t width() const { return waypoints.size(); }
    const Configuration& front() const { return waypoints.front(); }
    const Configuration& back() const { return waypoints.back(); }
    bool operator==(const MotionSegment& other) const;
};

/// waypoint[k] = a + (k / (W - 1)) (b - a), endpoints copied bit-exactly.
MotionSegment interpolate_segment(const Configuration& a, const Configuration& b, std::size_t width);

/// How the frozen prefix advances after each iteration.
enum class ProgressRule {
    contiguous,   // stop at the first invalid waypoint
    literal_gap,  // jump to the largest valid index, across invalid ones
};

struct ProjectionParams {
    /// Bound on consecutive waypoint distance. Zero selects 1.5x the uniform
    /// gap of the segment being projected.
    double tau_sm = 0.0;
    double alpha = 0.1;
    int max_iters = 128;
    double lambda = 1e-3;
    ProgressRule rule = ProgressRule::contiguous;
};

void validate_projection_params(const ProjectionParams& params);

/// tau_sm actually used for `seg`.
double resolve_tau_sm(const ProjectionParams& params, const MotionSegment& seg);

enum class ProjectionStatus {
    projected,
    failed,    // max_iters exhausted (parallel) or a waypoint could not be placed (sequential)
    rejected,  // converged, but the final clamp-and-revalidate check failed
};

struct ProjectionOutcome {
    ProjectionStatus status = ProjectionStatus::failed;
    MotionSegment segment;  // meaningful when projected
    int iterations_used = 0;
    std::size_t final_prog = 0;

    bool ok() const { return status == ProjectionStatus::projected; }
};

/// Buffers after every iteration, for invariant checks.
struct ProjectionTrace {
    std::vector<std::size_t> prog;
    std::vector<MotionSegment> buffers;
};

struct ProjectionOptions {
    Execution execution = Execution::deterministic;
    WorkerTeam* team = nullptr;  // required for Execution::concurrent
    ProjectionTrace* trace = nullptr;
};

/// Projects every waypoint after the frozen prefix at once. Each iteration
/// computes, per waypoint, a damped-pseudoinverse task step plus a smoothing
/// pull toward the previous waypoint, records validity at the current
/// buffer, then (after a barrier) a single coordinator advances the frozen
/// prefix and either finishes or commits the updates. Waypoint 0 never moves.
ProjectionOutcome parallel_project(const MotionSegment& seg, const ConstraintSpec& spec,
                                   const RobotModel& model, const ProjectionParams& params,
                                   const ProjectionOptions& options = {});

/// CBiRRT-style baseline: waypoints are projected one after another, each to
/// tolerance, and the segment is rejected as soon as one lands too far from
/// its predecessor.
ProjectionOutcome sequential_project(const MotionSegment& seg, const ConstraintSpec& spec,
                                     const RobotModel& model, const ProjectionParams& params);

enum class Projector { parallel, naive, literal_gap };

Projector parse_projector(std::string_view name);
std::string_view to_string(Projector p);
std::string_view to_string(ProjectionStatus s);

ProjectionOutcome project_segment(Projector projector, const MotionSegment& seg,
                                  const ConstraintSpec& spec, const RobotModel& model,
                                  const ProjectionParams& params, const ProjectionOptions& options = {});

/// Success contract re-evaluated from scratch: every waypoint within limits
/// with ||task error|| < tau_task, and consecutive distances < tau_sm.
bool satisfies_projection_contract(const MotionSegment& seg, const ConstraintSpec& spec,
                                   const RobotModel& model, double tau_sm);

}  // namespace cprrtc
