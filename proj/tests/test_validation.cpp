#include <doctest.h>

#include <random>

#include "cprrtc/errors.hpp"
#include "cprrtc/validation.hpp"
#include "oracles.hpp"

using namespace cprrtc;

namespace {

RobotModel arm7() { return load_robot_file(oracle::data_path("robots/arm7.json")); }

Configuration ready() {
    Configuration q(7);
    q << 0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785;
    return q;
}

/// Collision verdict for one configuration from first principles.
bool collides(const RobotModel& m, const Scene& scene, const Configuration& q) {
    const auto spheres = collision_spheres_world(m, forward_kinematics(m, q));
    for (const auto& s : spheres) {
        for (const auto& b : scene.boxes)
            if (oracle::box_distance_by_search(s.center, b) < s.radius) return true;
        for (const auto& o : scene.spheres)
            if ((s.center - o.center).norm() < s.radius + o.radius) return true;
    }
    for (const auto& [i, j] : m.self_collision_pairs)
        if ((spheres[i].center - spheres[j].center).norm() < spheres[i].radius + spheres[j].radius) return true;
    return false;
}

Scene random_scene(std::mt19937_64& rng, int boxes) {
    Scene s;
    std::uniform_real_distribution<double> size(0.05, 0.3);
    for (int i = 0; i < boxes; ++i) {
        const Vec3 lo = oracle::random_vec(rng, -0.8, 0.8) + Vec3(0, 0, 0.4);
        s.boxes.push_back({lo, lo + Vec3(size(rng), size(rng), size(rng))});
    }
    s.spheres.push_back({oracle::random_vec(rng, -0.6, 0.6) + Vec3(0, 0, 0.5), 0.1});
    return s;
}

}  // namespace

TEST_CASE("empty scene only checks self pairs") {
    const RobotModel m = arm7();
    const auto seg = interpolate_segment(ready(), ready(), 32);
    for (CcFlag f : {CcFlag::on, CcFlag::off}) {
        const auto r = validate_motion(seg, Scene{}, m, f);
        CHECK(r.valid);
        CHECK(r.primitive_checks_possible == 32 * m.self_collision_pairs.size());
        CHECK(r.primitive_checks_performed == r.primitive_checks_possible);
        CHECK_FALSE(r.first_colliding_waypoint);
    }
}

TEST_CASE("collision at the first waypoint stops the team") {
    const RobotModel m = arm7();
    const Vec3 ee = forward_kinematics(m, ready()).ee_pose.position;
    Scene scene;
    scene.boxes.push_back({Vec3(-2, -2, 2), Vec3(-1.9, -1.9, 2.1)});
    scene.boxes.push_back({ee - Vec3::Constant(0.05), ee + Vec3::Constant(0.05)});
    scene.boxes.push_back({Vec3(2, 2, 2), Vec3(2.1, 2.1, 2.1)});
    Configuration far = ready();
    far[0] = 1.5;
    const auto seg = interpolate_segment(ready(), far, 32);
    REQUIRE(collides(m, scene, seg.waypoints[0]));
    REQUIRE_FALSE(collides(m, scene, seg.back()));

    const auto on = validate_motion(seg, scene, m, CcFlag::on);
    const auto off = validate_motion(seg, scene, m, CcFlag::off);
    CHECK_FALSE(on.valid);
    CHECK_FALSE(off.valid);
    CHECK(on.primitive_checks_performed < on.primitive_checks_possible);
    CHECK(on.primitive_checks_performed < off.primitive_checks_performed);
    CHECK(on.first_colliding_waypoint == std::optional<std::size_t>(0));
    CHECK(on.fk_performed <= off.fk_performed);
}

TEST_CASE("flag off evaluates every check of a colliding segment") {
    const RobotModel m = arm7();
    const Vec3 ee = forward_kinematics(m, ready()).ee_pose.position;
    Scene scene;
    scene.boxes.push_back({ee - Vec3::Constant(0.05), ee + Vec3::Constant(0.05)});
    scene.boxes.push_back({Vec3(2, 2, 2), Vec3(2.1, 2.1, 2.1)});
    const auto seg = interpolate_segment(ready(), ready(), 8);
    WorkerTeam team(3);
    ValidationOptions concurrent;
    concurrent.execution = Execution::concurrent;
    concurrent.team = &team;
    for (const auto& opts : {ValidationOptions{}, concurrent}) {
        const auto off = validate_motion(seg, scene, m, CcFlag::off, opts);
        CHECK_FALSE(off.valid);
        CHECK(off.primitive_checks_performed == off.primitive_checks_possible);
        CHECK(off.fk_performed == 8);
    }
}

TEST_CASE("flag mode never changes the verdict") {
    const RobotModel m = arm7();
    std::mt19937_64 rng(51);
    std::uint64_t on_total = 0, off_total = 0;
    int colliding = 0;
    for (int i = 0; i < 1000; ++i) {
        const Scene scene = random_scene(rng, 1 + i % 8);
        const Configuration a = oracle::random_configuration(m, rng);
        Configuration b = a + 0.6 * oracle::random_configuration(m, rng).normalized();
        b = m.clamp(b);
        const auto seg = interpolate_segment(a, b, 16);
        const auto on = validate_motion(seg, scene, m, CcFlag::on);
        const auto off = validate_motion(seg, scene, m, CcFlag::off);
        REQUIRE(on.valid == off.valid);
        CHECK(on.primitive_checks_performed <= off.primitive_checks_performed);
        CHECK(off.primitive_checks_performed <= off.primitive_checks_possible);
        CHECK(on.primitive_checks_possible == off.primitive_checks_possible);
        if (!on.valid) {
            ++colliding;
            on_total += on.primitive_checks_performed;
            off_total += off.primitive_checks_performed;
        }
    }
    REQUIRE(colliding >= 100);
    CHECK(on_total < off_total);
}

TEST_CASE("verdict matches a from-scratch collision oracle") {
    const RobotModel m = arm7();
    std::mt19937_64 rng(52);
    for (int i = 0; i < 300; ++i) {
        const Scene scene = random_scene(rng, 4);
        const Configuration a = oracle::random_configuration(m, rng);
        const Configuration b = m.clamp(a + 0.4 * oracle::random_configuration(m, rng).normalized());
        const auto seg = interpolate_segment(a, b, 8);
        bool expected = true;
        for (const auto& w : seg.waypoints) expected = expected && !collides(m, scene, w);
        CHECK(validate_motion(seg, scene, m, CcFlag::on).valid == expected);
    }
}

TEST_CASE("collision free segment performs every check") {
    const RobotModel m = arm7();
    Scene scene;
    for (int i = 0; i < 7; ++i) scene.boxes.push_back({Vec3(3 + i, 3, 0), Vec3(3.5 + i, 3.5, 0.5)});
    scene.spheres.push_back({Vec3(-3, 0, 0), 0.5});
    Configuration b = ready();
    b[0] = 0.5;
    const auto seg = interpolate_segment(ready(), b, 32);
    const std::uint64_t expected = 32 * (m.sphere_count() * scene.primitive_count() + m.self_collision_pairs.size());
    CHECK(checks_per_waypoint(scene, m) * 32 == expected);
    for (CcFlag f : {CcFlag::on, CcFlag::off}) {
        const auto r = validate_motion(seg, scene, m, f);
        CHECK(r.valid);
        CHECK(r.primitive_checks_possible == expected);
        CHECK(r.primitive_checks_performed == expected);
        CHECK(r.fk_performed == 32);
    }
}

TEST_CASE("single configuration check agrees with a constant segment") {
    const RobotModel m = arm7();
    std::mt19937_64 rng(53);
    int invalid = 0;
    for (int i = 0; i < 500; ++i) {
        const Scene scene = random_scene(rng, 5);
        const Configuration q = oracle::random_configuration(m, rng);
        const bool ok = validate_configuration(q, scene, m);
        CHECK(ok == validate_motion(interpolate_segment(q, q, 4), scene, m, CcFlag::on).valid);
        CHECK(ok == !collides(m, scene, q));
        invalid += !ok;
    }
    CHECK(invalid > 0);
}

TEST_CASE("sphere centre inside an obstacle is invalid") {
    const RobotModel m = arm7();
    const auto spheres = collision_spheres_world(m, forward_kinematics(m, ready()));
    const Vec3 c = spheres.back().center;
    Scene scene;
    scene.boxes.push_back({c - Vec3::Constant(0.001), c + Vec3::Constant(0.001)});
    CHECK_FALSE(validate_configuration(ready(), scene, m));
    CHECK(validate_configuration(ready(), Scene{}, m));
}

TEST_CASE("concurrent validation gives the same verdict") {
    const RobotModel m = arm7();
    std::mt19937_64 rng(54);
    WorkerTeam team(4);
    ValidationOptions opts;
    opts.execution = Execution::concurrent;
    opts.team = &team;
    for (int i = 0; i < 200; ++i) {
        const Scene scene = random_scene(rng, 6);
        const Configuration a = oracle::random_configuration(m, rng);
        const Configuration b = m.clamp(a + 0.6 * oracle::random_configuration(m, rng).normalized());
        const auto seg = interpolate_segment(a, b, 32);
        for (CcFlag f : {CcFlag::on, CcFlag::off}) {
            const auto det = validate_motion(seg, scene, m, f);
            const auto con = validate_motion(seg, scene, m, f, opts);
            CHECK(det.valid == con.valid);
            CHECK(con.primitive_checks_performed <= con.primitive_checks_possible);
            CHECK(con.primitive_checks_possible == det.primitive_checks_possible);
        }
    }
}

TEST_CASE("deterministic counters are reproducible") {
    const RobotModel m = arm7();
    std::mt19937_64 rng(55);
    const Scene scene = random_scene(rng, 6);
    const Configuration a = oracle::random_configuration(m, rng);
    const auto seg = interpolate_segment(a, m.clamp(a + 0.5 * Configuration::Ones(7)), 32);
    const auto x = validate_motion(seg, scene, m, CcFlag::on);
    const auto y = validate_motion(seg, scene, m, CcFlag::on);
    CHECK(x.primitive_checks_performed == y.primitive_checks_performed);
    CHECK(x.fk_performed == y.fk_performed);
    CHECK(x.first_colliding_waypoint == y.first_colliding_waypoint);
}

TEST_CASE("wrong waypoint length is rejected") {
    const RobotModel m = arm7();
    MotionSegment seg{{Configuration::Zero(6), Configuration::Zero(6)}};
    CHECK_THROWS_AS(validate_motion(seg, Scene{}, m, CcFlag::on), dimension_error);
}

TEST_CASE("flag names") {
    CHECK(parse_cc_flag("on") == CcFlag::on);
    CHECK(parse_cc_flag("off") == CcFlag::off);
    CHECK_THROWS(parse_cc_flag("maybe"));
}
