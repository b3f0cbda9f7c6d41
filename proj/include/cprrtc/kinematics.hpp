#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cprrtc/geometry.hpp"

namespace cprrtc {

/// Joint-space point. Revolute entries in radians, prismatic in meters.
using Configuration = Eigen::VectorXd;
using Transform = Eigen::Isometry3d;
using Quat = Eigen::Quaterniond;

enum class JointType { revolute, prismatic };

struct Joint {
    std::string name;
    JointType type = JointType::revolute;
    Vec3 axis = Vec3::UnitZ();               // in the joint frame, unit norm
    Transform origin = Transform::Identity();  // parent link frame -> joint frame
    double lower = 0.0;
    double upper = 0.0;
};

struct LinkSphere {
    Vec3 local_center = Vec3::Zero();
    double radius = 0.0;
};

/// Serial chain. Link 0 is the fixed base; link k+1 is moved by joint k, so
/// there are joints.size() + 1 links.
struct RobotModel {
    std::string name;
    std::vector<Joint> joints;
    std::vector<std::vector<LinkSphere>> link_spheres;  // one list per link
    std::size_t ee_link = 0;
    Transform ee_offset = Transform::Identity();  // ee_link frame -> tool point
    /// Pairs of indices into the flattened, link-major sphere list.
    std::vector<std::pair<std::size_t, std::size_t>> self_collision_pairs;

    std::size_t dof() const { return joints.size(); }
    std::size_t link_count() const { return joints.size() + 1; }
    std::size_t sphere_count() const;
    Eigen::VectorXd lower_limits() const;
    Eigen::VectorXd upper_limits() const;
    bool within_limits(const Configuration& q) const;
    Configuration clamp(const Configuration& q) const;
};

struct EePose {
    Vec3 position = Vec3::Zero();
    Quat orientation = Quat::Identity();
};

struct FrameSet {
    std::vector<Transform> links;  // world frame, size link_count()
    Transform ee = Transform::Identity();
    EePose ee_pose;
};

/// Throws dimension_error when q has the wrong length.
void check_dimension(const RobotModel& model, const Configuration& q);

FrameSet forward_kinematics(const RobotModel& model, const Configuration& q);

/// World-frame spheres in link-major order (stable across calls).
std::vector<Sphere> collision_spheres_world(const RobotModel& model, const FrameSet& frames);
void collision_spheres_world(const RobotModel& model, const FrameSet& frames,
                             std::vector<Sphere>& out);

/// 6 x dof. Rows 0-2: linear velocity of `point` (world frame), rows 3-5:
/// angular velocity, both per unit joint rate.
Eigen::Matrix<double, 6, Eigen::Dynamic> geometric_jacobian(const RobotModel& model,
                                                            const Configuration& q,
                                                            const Vec3& point);
Eigen::Matrix<double, 6, Eigen::Dynamic> geometric_jacobian(const RobotModel& model,
                                                            const FrameSet& frames,
                                                            const Vec3& point);

/// Throws validation_error on broken invariants.
void validate_robot(const RobotModel& model);

/// JSON robot document, see data/robots/*.json:
///   {"name", "joints": [{"name", "type": "revolute"|"prismatic", "axis": [..],
///     "origin": {"xyz": [..], "rpy": [..]}, "limits": [lo, hi]}],
///    "link_spheres": [[{"center": [..], "radius": r}, ...], ...],
///    "ee_link": k, "ee_offset": {"xyz", "rpy"}, "self_collision_pairs": [[i, j], ...]}
/// `link_spheres` may list fewer links than the chain has; the rest get none.
RobotModel load_robot(std::istream& in);
RobotModel load_robot_file(const std::string& path);

/// URDF-style fixed-axis roll/pitch/yaw.
Transform make_transform(const Vec3& xyz, const Vec3& rpy);

}  // namespace cprrtc
