#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "cprrtc/errors.hpp"
#include "cprrtc/kinematics.hpp"
#include "oracles.hpp"

using namespace cprrtc;

namespace {

const char* kOneJoint = R"({
  "name": "one",
  "joints": [{"name": "j", "type": "revolute", "axis": [0, 0, 1], "limits": [-3.2, 3.2]}],
  "link_spheres": [[], [{"center": [0.5, 0, 0], "radius": 0.1}, {"center": [0, 0, 0], "radius": 0.05}]],
  "ee_link": 1,
  "ee_offset": {"xyz": [1, 0, 0]}
})";

RobotModel one_joint() {
    std::istringstream in(kOneJoint);
    return load_robot(in);
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    return nlohmann::json::parse(in, nullptr, true, true);
}

Vec3 vec(const nlohmann::json& j, const char* key, Vec3 fallback) {
    if (!j.contains(key)) return fallback;
    return Vec3(j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>());
}

/// Oracle chain straight from the robot document.
std::vector<oracle::ChainJoint> chain_from_file(const nlohmann::json& doc) {
    std::vector<oracle::ChainJoint> chain;
    for (const auto& j : doc["joints"]) {
        oracle::ChainJoint c;
        const auto origin = j.value("origin", nlohmann::json::object());
        c.xyz = vec(origin, "xyz", Vec3::Zero());
        c.rpy = vec(origin, "rpy", Vec3::Zero());
        c.axis = vec(j, "axis", Vec3::UnitZ()).normalized();
        c.prismatic = j.value("type", "revolute") == "prismatic";
        chain.push_back(c);
    }
    return chain;
}

oracle::Mat4L ee_offset_from_file(const nlohmann::json& doc) {
    const auto off = doc.value("ee_offset", nlohmann::json::object());
    const Vec3 xyz = vec(off, "xyz", Vec3::Zero());
    const Vec3 rpy = vec(off, "rpy", Vec3::Zero());
    return oracle::translation(xyz.x(), xyz.y(), xyz.z()) * oracle::rot_z(rpy.z()) * oracle::rot_y(rpy.y()) *
           oracle::rot_x(rpy.x());
}

double max_abs_diff(const Transform& t, const oracle::Mat4L& m) {
    return (t.matrix().cast<long double>() - m).cwiseAbs().maxCoeff();
}

/// Angular velocity from central differences of the rotation.
Vec3 angular_fd(const Eigen::Matrix3d& r_plus, const Eigen::Matrix3d& r_minus, double h) {
    const Eigen::AngleAxisd delta(r_plus * r_minus.transpose());
    return delta.axis() * delta.angle() / (2.0 * h);
}

}  // namespace

TEST_CASE("one joint arm at zero") {
    const RobotModel m = one_joint();
    const auto fs = forward_kinematics(m, Eigen::VectorXd::Zero(1));
    CHECK((fs.ee_pose.position - Vec3(1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("one joint arm at a quarter turn") {
    const RobotModel m = one_joint();
    const auto fs = forward_kinematics(m, Eigen::VectorXd::Constant(1, std::numbers::pi / 2));
    CHECK((fs.ee_pose.position - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("random chains match term by term composition") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (int trial = 0; trial < 50; ++trial) {
        RobotModel m;
        std::vector<oracle::ChainJoint> chain;
        for (int k = 0; k < 3; ++k) {
            oracle::ChainJoint c;
            c.xyz = oracle::random_vec(rng, -0.5, 0.5);
            c.rpy = Vec3(angle(rng), angle(rng) / 2, angle(rng));
            c.axis = oracle::random_vec(rng, -1, 1).normalized();
            c.prismatic = (trial + k) % 4 == 0;
            chain.push_back(c);
            Joint j;
            j.type = c.prismatic ? JointType::prismatic : JointType::revolute;
            j.axis = c.axis;
            j.origin = make_transform(c.xyz, c.rpy);
            j.lower = -4;
            j.upper = 4;
            m.joints.push_back(j);
        }
        m.link_spheres.assign(4, {});
        m.ee_link = 3;
        const Eigen::VectorXd q = oracle::random_configuration(m, rng);
        const auto fs = forward_kinematics(m, q);
        const auto expected = oracle::chain_frames(chain, q);
        for (std::size_t k = 0; k < 4; ++k) CHECK(max_abs_diff(fs.links[k], expected[k]) < 1e-12);
    }
}

TEST_CASE("shipped arms match the composition oracle") {
    std::mt19937_64 rng(22);
    for (const char* name : {"robots/arm7.json", "robots/arm8.json", "robots/planar2.json"}) {
        const auto path = oracle::data_path(name);
        const RobotModel m = load_robot_file(path);
        const auto doc = read_json(path);
        const auto chain = chain_from_file(doc);
        const auto offset = ee_offset_from_file(doc);
        const std::size_t ee = doc["ee_link"].get<std::size_t>();
        for (int i = 0; i < 100; ++i) {
            const Eigen::VectorXd q = oracle::random_configuration(m, rng);
            const auto frames = oracle::chain_frames(chain, q);
            CHECK(max_abs_diff(forward_kinematics(m, q).ee, frames[ee] * offset) < 1e-12);
        }
    }
}

TEST_CASE("zero configuration matches the documented pose") {
    for (const char* name : {"robots/arm7.json", "robots/arm8.json"}) {
        const auto path = oracle::data_path(name);
        std::ifstream in(path);
        std::string header, line;
        while (std::getline(in, line) && line.rfind("//", 0) == 0) header += line;
        const std::regex pattern(R"(position \[([^\]]*)\], orientation wxyz \[([^\]]*)\])");
        std::smatch match;
        REQUIRE(std::regex_search(header, match, pattern));
        auto numbers = [](const std::string& s) {
            std::vector<double> v;
            std::istringstream ss(s);
            for (std::string item; std::getline(ss, item, ',');) v.push_back(std::stod(item));
            return v;
        };
        const auto p = numbers(match[1]);
        const auto w = numbers(match[2]);
        const RobotModel m = load_robot_file(path);
        const auto pose = forward_kinematics(m, Eigen::VectorXd::Zero(m.dof())).ee_pose;
        CHECK((pose.position - Vec3(p[0], p[1], p[2])).norm() < 1e-9);
        const Quat documented(w[0], w[1], w[2], w[3]);
        CHECK(pose.orientation.angularDistance(documented) < 1e-9);
    }
}

TEST_CASE("spheres at the zero configuration follow the fixed origins") {
    const RobotModel m = load_robot_file(oracle::data_path("robots/arm7.json"));
    const auto chain = chain_from_file(read_json(oracle::data_path("robots/arm7.json")));
    const auto frames = oracle::chain_frames(chain, Eigen::VectorXd::Zero(m.dof()));
    const auto spheres = collision_spheres_world(m, forward_kinematics(m, Eigen::VectorXd::Zero(m.dof())));
    std::size_t idx = 0;
    for (std::size_t link = 0; link < m.link_spheres.size(); ++link) {
        for (const auto& ls : m.link_spheres[link]) {
            const Eigen::Matrix<long double, 4, 1> local(ls.local_center.x(), ls.local_center.y(),
                                                         ls.local_center.z(), 1.0L);
            const Eigen::Matrix<long double, 4, 1> world = frames[link] * local;
            CHECK((spheres[idx].center.cast<long double>() - world.head<3>()).norm() < 1e-12);
            CHECK(spheres[idx].radius == ls.radius);
            ++idx;
        }
    }
    CHECK(idx == spheres.size());
}

TEST_CASE("sphere at a link origin sits at the link translation") {
    const RobotModel m = one_joint();
    const auto fs = forward_kinematics(m, Eigen::VectorXd::Constant(1, 0.7));
    const auto spheres = collision_spheres_world(m, fs);
    REQUIRE(spheres.size() == 2);
    CHECK((spheres[1].center - fs.links[1].translation()).norm() == 0.0);
    CHECK((spheres[0].center - Vec3(0.5 * std::cos(0.7), 0.5 * std::sin(0.7), 0)).norm() < 1e-12);
}

TEST_CASE("sphere count is conserved and centres follow the oracle") {
    std::mt19937_64 rng(23);
    const auto path = oracle::data_path("robots/arm8.json");
    const RobotModel m = load_robot_file(path);
    const auto chain = chain_from_file(read_json(path));
    for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXd q = oracle::random_configuration(m, rng);
        const auto spheres = collision_spheres_world(m, forward_kinematics(m, q));
        REQUIRE(spheres.size() == m.sphere_count());
        const auto frames = oracle::chain_frames(chain, q);
        std::size_t idx = 0;
        for (std::size_t link = 0; link < m.link_spheres.size(); ++link) {
            for (const auto& ls : m.link_spheres[link]) {
                const Eigen::Matrix<long double, 4, 1> local(ls.local_center.x(), ls.local_center.y(),
                                                             ls.local_center.z(), 1.0L);
                const Eigen::Matrix<long double, 4, 1> world = frames[link] * local;
                CHECK((spheres[idx++].center.cast<long double>() - world.head<3>()).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("jacobian of the one joint arm") {
    const RobotModel m = one_joint();
    const auto J = geometric_jacobian(m, Eigen::VectorXd::Zero(1), Vec3(1, 0, 0));
    CHECK((J.col(0).head<3>() - Vec3(0, 1, 0)).norm() < 1e-12);
    CHECK((J.col(0).tail<3>() - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("jacobian of a prismatic joint") {
    RobotModel m;
    Joint j;
    j.type = JointType::prismatic;
    j.axis = Vec3::UnitZ();
    j.lower = 0;
    j.upper = 1;
    m.joints.push_back(j);
    m.link_spheres.assign(2, {});
    m.ee_link = 1;
    const auto J = geometric_jacobian(m, Eigen::VectorXd::Constant(1, 0.3), Vec3(0.2, 0.1, 0.3));
    CHECK((J.col(0).head<3>() - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK(J.col(0).tail<3>().norm() == 0.0);
}

TEST_CASE("jacobian matches central differences") {
    std::mt19937_64 rng(24);
    const double h = 1e-6;
    for (const char* name : {"robots/arm7.json", "robots/arm8.json"}) {
        const RobotModel m = load_robot_file(oracle::data_path(name));
        for (int i = 0; i < 50; ++i) {
            const Eigen::VectorXd q = oracle::random_configuration(m, rng);
            const auto fs = forward_kinematics(m, q);
            const auto J = geometric_jacobian(m, fs, fs.ee_pose.position);
            for (std::size_t k = 0; k < m.dof(); ++k) {
                Eigen::VectorXd qp = q, qm = q;
                qp[k] += h;
                qm[k] -= h;
                const auto fp = forward_kinematics(m, qp).ee;
                const auto fm = forward_kinematics(m, qm).ee;
                const Vec3 lin = (fp.translation() - fm.translation()) / (2 * h);
                const Vec3 ang = angular_fd(fp.rotation(), fm.rotation(), h);
                CHECK((J.col(k).head<3>() - lin).cwiseAbs().maxCoeff() < 1e-5);
                CHECK((J.col(k).tail<3>() - ang).cwiseAbs().maxCoeff() < 1e-5);
            }
        }
    }
}

TEST_CASE("link rotations stay orthonormal") {
    std::mt19937_64 rng(25);
    const RobotModel m = load_robot_file(oracle::data_path("robots/arm7.json"));
    for (int i = 0; i < 200; ++i) {
        const auto fs = forward_kinematics(m, oracle::random_configuration(m, rng));
        for (const auto& t : fs.links) {
            const Eigen::Matrix3d r = t.rotation();
            CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
            CHECK(std::abs(r.determinant() - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("forward kinematics is deterministic") {
    std::mt19937_64 rng(26);
    const RobotModel m = load_robot_file(oracle::data_path("robots/arm8.json"));
    const Eigen::VectorXd q = oracle::random_configuration(m, rng);
    const auto a = forward_kinematics(m, q);
    const auto b = forward_kinematics(m, q);
    for (std::size_t k = 0; k < a.links.size(); ++k) CHECK(a.links[k].matrix() == b.links[k].matrix());
    CHECK(a.ee.matrix() == b.ee.matrix());
}

TEST_CASE("wrong configuration length is rejected") {
    const RobotModel m = one_joint();
    CHECK_THROWS_AS(forward_kinematics(m, Eigen::VectorXd::Zero(2)), dimension_error);
}

TEST_CASE("minimal document loads") {
    const RobotModel m = one_joint();
    CHECK(m.dof() == 1);
    CHECK(m.sphere_count() == 2);
    CHECK(m.lower_limits()[0] == -3.2);
}

TEST_CASE("end effector link out of range is rejected") {
    std::string doc = kOneJoint;
    doc.replace(doc.find("\"ee_link\": 1"), 12, "\"ee_link\": 5");
    std::istringstream in(doc);
    try {
        load_robot(in);
        FAIL("expected a validation error");
    } catch (const validation_error& e) {
        CHECK(std::string(e.what()).find("ee_link") != std::string::npos);
    }
}

TEST_CASE("inverted joint limits are rejected") {
    std::string doc = kOneJoint;
    doc.replace(doc.find("[-3.2, 3.2]"), 11, "[1.0, -1.0]");
    std::istringstream in(doc);
    CHECK_THROWS_AS(load_robot(in), validation_error);
}

TEST_CASE("limits and clamping") {
    const RobotModel m = one_joint();
    CHECK(m.within_limits(Eigen::VectorXd::Constant(1, 3.2)));
    CHECK_FALSE(m.within_limits(Eigen::VectorXd::Constant(1, 3.3)));
    CHECK(m.clamp(Eigen::VectorXd::Constant(1, -9.0))[0] == -3.2);
}
