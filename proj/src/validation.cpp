#include "cprrtc/validation.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <string>

namespace cprrtc {

CcFlag parse_cc_flag(std::string_view name) {
    if (name == "on") return CcFlag::on;
    if (name == "off") return CcFlag::off;
    throw std::invalid_argument("unknown cc-flag mode '" + std::string(name) + "' (expected on or off)");
}

std::string_view to_string(CcFlag f) { return f == CcFlag::on ? "on" : "off"; }

ValidationReport& ValidationReport::operator+=(const ValidationReport& other) {
    valid = valid && other.valid;
    primitive_checks_performed += other.primitive_checks_performed;
    primitive_checks_possible += other.primitive_checks_possible;
    fk_performed += other.fk_performed;
    if (other.first_colliding_waypoint &&
        (!first_colliding_waypoint || *other.first_colliding_waypoint < *first_colliding_waypoint))
        first_colliding_waypoint = other.first_colliding_waypoint;
    return *this;
}

std::uint64_t checks_per_waypoint(const Scene& scene, const RobotModel& model) {
    return static_cast<std::uint64_t>(model.sphere_count()) * scene.primitive_count() +
           model.self_collision_pairs.size();
}

namespace {

/// Check number `c` of a worker's fixed check order; true on collision.
bool check_collides(std::size_t c, const std::vector<Sphere>& spheres, const Scene& scene,
                    const RobotModel& model) {
    const std::size_t n_spheres = spheres.size();
    const std::size_t env = n_spheres * scene.primitive_count();
    if (c < env) {
        const std::size_t prim = c / n_spheres;
        const Sphere& s = spheres[c % n_spheres];
        if (prim < scene.boxes.size()) return sphere_aabb_clearance(s, scene.boxes[prim]) < 0.0;
        return sphere_sphere_clearance(s, scene.spheres[prim - scene.boxes.size()]) < 0.0;
    }
    const auto [a, b] = model.self_collision_pairs[c - env];
    return sphere_sphere_clearance(spheres[a], spheres[b]) < 0.0;
}

void check_waypoints(const MotionSegment& seg, const RobotModel& model) {
    if (seg.width() == 0) throw std::invalid_argument("cannot validate an empty segment");
    for (const auto& w : seg.waypoints) check_dimension(model, w);
}

ValidationReport validate_lockstep(const MotionSegment& seg, const Scene& scene, const RobotModel& model,
                                   CcFlag flag_mode, std::uint64_t per_waypoint) {
    const std::size_t width = seg.width();
    ValidationReport report;
    report.primitive_checks_possible = per_waypoint * width;

    std::vector<std::vector<Sphere>> spheres(width);
    for (std::size_t w = 0; w < width; ++w) {
        collision_spheres_world(model, forward_kinematics(model, seg.waypoints[w]), spheres[w]);
        ++report.fk_performed;
    }

    std::vector<char> active(width, 1);
    std::size_t remaining = width;
    bool flag = false;
    for (std::uint64_t c = 0; c < per_waypoint && remaining > 0; ++c) {
        if (flag_mode == CcFlag::on && flag) break;
        bool raised = false;
        for (std::size_t w = 0; w < width; ++w) {
            if (!active[w]) continue;
            ++report.primitive_checks_performed;
            if (check_collides(static_cast<std::size_t>(c), spheres[w], scene, model)) {
                if (flag_mode == CcFlag::on) {
                    active[w] = 0;
                    --remaining;
                }
                raised = true;
                report.valid = false;
                if (!report.first_colliding_waypoint) report.first_colliding_waypoint = w;
            }
        }
        flag = flag || raised;
    }
    return report;
}

ValidationReport validate_concurrent(const MotionSegment& seg, const Scene& scene, const RobotModel& model,
                                     CcFlag flag_mode, std::uint64_t per_waypoint, WorkerTeam& team) {
    const std::size_t width = seg.width();
    std::atomic<bool> flag{false};
    std::vector<ValidationReport> partial(team.size());

    team.run([&](std::size_t worker) {
        ValidationReport& mine = partial[worker];
        std::vector<Sphere> spheres;
        team.for_each_assigned(worker, 0, width, [&](std::size_t w) {
            if (flag_mode == CcFlag::on && flag.load(std::memory_order_acquire)) return;
            collision_spheres_world(model, forward_kinematics(model, seg.waypoints[w]), spheres);
            ++mine.fk_performed;
            for (std::uint64_t c = 0; c < per_waypoint; ++c) {
                if (flag_mode == CcFlag::on && flag.load(std::memory_order_acquire)) return;
                ++mine.primitive_checks_performed;
                if (check_collides(static_cast<std::size_t>(c), spheres, scene, model)) {
                    mine.valid = false;
                    if (!mine.first_colliding_waypoint || w < *mine.first_colliding_waypoint)
                        mine.first_colliding_waypoint = w;
                    if (flag_mode == CcFlag::off) continue;
                    flag.store(true, std::memory_order_release);
                    return;
                }
            }
        });
    });

    ValidationReport report;
    for (const auto& p : partial) report += p;
    // Skipped workers never see their own collisions; the verdict comes from
    // whoever raised the flag, so it matches the exhaustive result.
    report.primitive_checks_possible = per_waypoint * width;
    return report;
}

}  // namespace

ValidationReport validate_motion(const MotionSegment& seg, const Scene& scene, const RobotModel& model,
                                 CcFlag flag, const ValidationOptions& options) {
    check_waypoints(seg, model);
    const std::uint64_t per_waypoint = checks_per_waypoint(scene, model);
    if (options.execution == Execution::concurrent) {
        if (!options.team) throw std::invalid_argument("concurrent validation needs a worker team");
        return validate_concurrent(seg, scene, model, flag, per_waypoint, *options.team);
    }
    return validate_lockstep(seg, scene, model, flag, per_waypoint);
}

bool validate_configuration(const Configuration& q, const Scene& scene, const RobotModel& model) {
    check_dimension(model, q);
    const auto spheres = collision_spheres_world(model, forward_kinematics(model, q));
    for (const auto& s : spheres) {
        for (const auto& b : scene.boxes)
            if (sphere_aabb_clearance(s, b) < 0.0) return false;
        for (const auto& o : scene.spheres)
            if (sphere_sphere_clearance(s, o) < 0.0) return false;
    }
    for (const auto& [a, b] : model.self_collision_pairs)
        if (sphere_sphere_clearance(spheres[a], spheres[b]) < 0.0) return false;
    return true;
}

}  // namespace cprrtc
