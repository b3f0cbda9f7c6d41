#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "cprrtc/geometry.hpp"
#include "cprrtc/kinematics.hpp"
#include "cprrtc/projection.hpp"
#include "cprrtc/worker_team.hpp"

namespace cprrtc {

/// Whether workers share a collision flag and stop issuing checks once any
/// teammate has found a collision.
enum class CcFlag { on, off };

CcFlag parse_cc_flag(std::string_view name);
std::string_view to_string(CcFlag f);

struct ValidationReport {
    bool valid = true;
    std::uint64_t primitive_checks_performed = 0;
    std::uint64_t primitive_checks_possible = 0;
    std::uint64_t fk_performed = 0;
    std::optional<std::size_t> first_colliding_waypoint;  // lowest detected index

    ValidationReport& operator+=(const ValidationReport& other);
};

struct ValidationOptions {
    Execution execution = Execution::deterministic;
    WorkerTeam* team = nullptr;
};

/// One logical worker per waypoint: FK, then sphere-vs-primitive checks in
/// scene order (boxes, then scene spheres; all robot spheres per primitive),
/// then self-collision pairs. With CcFlag::off every worker runs its full
/// check list. With CcFlag::on a worker stops at its own first collision and
/// every check is preceded by a read of the shared flag.
///
/// The deterministic execution advances all workers in lockstep, one check
/// per tick, and a flag raised during a tick is seen from the next tick on.
/// The verdict never depends on the flag or the execution mode; the
/// counters do.
ValidationReport validate_motion(const MotionSegment& seg, const Scene& scene, const RobotModel& model,
                                 CcFlag flag, const ValidationOptions& options = {});

/// True iff every clearance (environment and self pairs) is >= 0.
bool validate_configuration(const Configuration& q, const Scene& scene, const RobotModel& model);

/// Checks one waypoint can issue: |spheres| x |primitives| + |self pairs|.
std::uint64_t checks_per_waypoint(const Scene& scene, const RobotModel& model);

}  // namespace cprrtc
