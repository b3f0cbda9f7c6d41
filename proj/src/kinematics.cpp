#include "cprrtc/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cprrtc/errors.hpp"
#include "json_util.hpp"

namespace cprrtc {

std::size_t RobotModel::sphere_count() const {
    std::size_t n = 0;
    for (const auto& l : link_spheres) n += l.size();
    return n;
}

Eigen::VectorXd RobotModel::lower_limits() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dof()));
    for (std::size_t i = 0; i < dof(); ++i) v[static_cast<Eigen::Index>(i)] = joints[i].lower;
    return v;
}

Eigen::VectorXd RobotModel::upper_limits() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dof()));
    for (std::size_t i = 0; i < dof(); ++i) v[static_cast<Eigen::Index>(i)] = joints[i].upper;
    return v;
}

bool RobotModel::within_limits(const Configuration& q) const {
    if (static_cast<std::size_t>(q.size()) != dof()) return false;
    for (std::size_t i = 0; i < dof(); ++i) {
        const double v = q[static_cast<Eigen::Index>(i)];
        if (!(v >= joints[i].lower && v <= joints[i].upper)) return false;
    }
    return true;
}

Configuration RobotModel::clamp(const Configuration& q) const {
    Configuration out = q;
    for (std::size_t i = 0; i < dof(); ++i) {
        auto& v = out[static_cast<Eigen::Index>(i)];
        v = std::min(std::max(v, joints[i].lower), joints[i].upper);
    }
    return out;
}

void check_dimension(const RobotModel& model, const Configuration& q) {
    if (static_cast<std::size_t>(q.size()) != model.dof())
        throw dimension_error("configuration has " + std::to_string(q.size()) +
                              " entries, model has " + std::to_string(model.dof()) + " joints");
}

Transform make_transform(const Vec3& xyz, const Vec3& rpy) {
    Transform t = Transform::Identity();
    t.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
    t.translation() = xyz;
    return t;
}

namespace {

Transform joint_motion(const Joint& j, double value) {
    Transform m = Transform::Identity();
    if (j.type == JointType::revolute)
        m.linear() = Eigen::AngleAxisd(value, j.axis).toRotationMatrix();
    else
        m.translation() = j.axis * value;
    return m;
}

}  // namespace

FrameSet forward_kinematics(const RobotModel& model, const Configuration& q) {
    check_dimension(model, q);
    FrameSet fs;
    fs.links.resize(model.link_count());
    fs.links[0] = Transform::Identity();
    for (std::size_t k = 0; k < model.dof(); ++k) {
        const Joint& j = model.joints[k];
        fs.links[k + 1] = fs.links[k] * j.origin * joint_motion(j, q[static_cast<Eigen::Index>(k)]);
    }
    fs.ee = fs.links[model.ee_link] * model.ee_offset;
    fs.ee_pose.position = fs.ee.translation();
    fs.ee_pose.orientation = Quat(fs.ee.linear()).normalized();
    return fs;
}

void collision_spheres_world(const RobotModel& model, const FrameSet& frames,
                             std::vector<Sphere>& out) {
    out.clear();
    out.reserve(model.sphere_count());
    for (std::size_t l = 0; l < model.link_spheres.size(); ++l)
        for (const auto& ls : model.link_spheres[l])
            out.push_back(Sphere{frames.links[l] * ls.local_center, ls.radius});
}

std::vector<Sphere> collision_spheres_world(const RobotModel& model, const FrameSet& frames) {
    std::vector<Sphere> out;
    collision_spheres_world(model, frames, out);
    return out;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> geometric_jacobian(const RobotModel& model,
                                                            const FrameSet& frames,
                                                            const Vec3& point) {
    const auto n = static_cast<Eigen::Index>(model.dof());
    Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
    jac.setZero();
    // `point` is treated as rigidly attached to the last link.
    for (Eigen::Index k = 0; k < n; ++k) {
        const Joint& j = model.joints[static_cast<std::size_t>(k)];
        const Transform joint_frame = frames.links[static_cast<std::size_t>(k)] * j.origin;
        const Vec3 axis = joint_frame.linear() * j.axis;
        if (j.type == JointType::revolute) {
            jac.block<3, 1>(0, k) = axis.cross(point - joint_frame.translation());
            jac.block<3, 1>(3, k) = axis;
        } else {
            jac.block<3, 1>(0, k) = axis;
        }
    }
    return jac;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> geometric_jacobian(const RobotModel& model,
                                                            const Configuration& q,
                                                            const Vec3& point) {
    return geometric_jacobian(model, forward_kinematics(model, q), point);
}

void validate_robot(const RobotModel& model) {
    if (model.joints.empty()) throw validation_error("joints: at least one joint required");
    for (std::size_t i = 0; i < model.joints.size(); ++i) {
        const Joint& j = model.joints[i];
        const std::string path = "joints[" + std::to_string(i) + "]";
        if (!(j.lower < j.upper)) throw validation_error(path + ".limits: lower must be < upper");
        if (std::abs(j.axis.norm() - 1.0) > 1e-9)
            throw validation_error(path + ".axis: must be unit norm");
    }
    if (model.link_spheres.size() > model.link_count())
        throw validation_error("link_spheres: more entries than links (" +
                               std::to_string(model.link_count()) + ")");
    for (std::size_t l = 0; l < model.link_spheres.size(); ++l)
        for (std::size_t s = 0; s < model.link_spheres[l].size(); ++s) {
            const auto& ls = model.link_spheres[l][s];
            const std::string path =
                "link_spheres[" + std::to_string(l) + "][" + std::to_string(s) + "]";
            if (!(ls.radius > 0.0) || !std::isfinite(ls.radius))
                throw validation_error(path + ".radius: must be positive");
            if (!ls.local_center.allFinite()) throw validation_error(path + ".center: non-finite");
        }
    if (model.ee_link >= model.link_count())
        throw validation_error("ee_link: index " + std::to_string(model.ee_link) +
                               " out of range (links: " + std::to_string(model.link_count()) + ")");
    const std::size_t spheres = model.sphere_count();
    for (std::size_t p = 0; p < model.self_collision_pairs.size(); ++p) {
        const auto [a, b] = model.self_collision_pairs[p];
        if (a >= spheres || b >= spheres || a == b)
            throw validation_error("self_collision_pairs[" + std::to_string(p) +
                                   "]: invalid sphere index pair");
    }
}

namespace {

using detail::json;

Transform parse_origin(const json& node, const std::string& path) {
    Vec3 xyz = Vec3::Zero(), rpy = Vec3::Zero();
    if (!node.is_object()) throw parse_error(path, "expected an object");
    if (auto it = node.find("xyz"); it != node.end()) xyz = detail::as_vec3(*it, path + ".xyz");
    if (auto it = node.find("rpy"); it != node.end()) rpy = detail::as_vec3(*it, path + ".rpy");
    return make_transform(xyz, rpy);
}

}  // namespace

RobotModel load_robot(std::istream& in) {
    using detail::require;
    const json doc = detail::parse_document(in);
    if (!doc.is_object()) throw parse_error("$", "robot document must be an object");

    RobotModel model;
    if (auto it = doc.find("name"); it != doc.end() && it->is_string()) model.name = it->get<std::string>();

    const json& joints = require(doc, "joints", "$");
    if (!joints.is_array()) throw parse_error("$.joints", "expected an array");
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const std::string path = "$.joints[" + std::to_string(i) + "]";
        const json& jn = joints[i];
        Joint j;
        if (auto it = jn.find("name"); it != jn.end() && it->is_string()) j.name = it->get<std::string>();
        const json& type = require(jn, "type", path);
        if (type == "revolute")
            j.type = JointType::revolute;
        else if (type == "prismatic")
            j.type = JointType::prismatic;
        else
            throw parse_error(path + ".type", "expected \"revolute\" or \"prismatic\"");
        j.axis = detail::as_vec3(require(jn, "axis", path), path + ".axis");
        if (auto it = jn.find("origin"); it != jn.end()) j.origin = parse_origin(*it, path + ".origin");
        const auto lim = detail::as_vector(require(jn, "limits", path), path + ".limits", 2);
        j.lower = lim[0];
        j.upper = lim[1];
        model.joints.push_back(j);
    }

    if (auto it = doc.find("link_spheres"); it != doc.end()) {
        if (!it->is_array()) throw parse_error("$.link_spheres", "expected an array");
        for (std::size_t l = 0; l < it->size(); ++l) {
            const std::string lpath = "$.link_spheres[" + std::to_string(l) + "]";
            const json& list = (*it)[l];
            if (!list.is_array()) throw parse_error(lpath, "expected an array");
            std::vector<LinkSphere> spheres;
            for (std::size_t s = 0; s < list.size(); ++s) {
                const std::string spath = lpath + "[" + std::to_string(s) + "]";
                spheres.push_back(LinkSphere{
                    detail::as_vec3(require(list[s], "center", spath), spath + ".center"),
                    detail::as_number(require(list[s], "radius", spath), spath + ".radius")});
            }
            model.link_spheres.push_back(std::move(spheres));
        }
    }
    {
        const auto ee = detail::as_integer(require(doc, "ee_link", "$"), "$.ee_link");
        if (ee < 0) throw validation_error("ee_link: index must be non-negative");
        model.ee_link = static_cast<std::size_t>(ee);
    }
    if (auto it = doc.find("ee_offset"); it != doc.end()) model.ee_offset = parse_origin(*it, "$.ee_offset");
    if (auto it = doc.find("self_collision_pairs"); it != doc.end()) {
        if (!it->is_array()) throw parse_error("$.self_collision_pairs", "expected an array");
        for (std::size_t p = 0; p < it->size(); ++p) {
            const std::string path = "$.self_collision_pairs[" + std::to_string(p) + "]";
            const json& pair = (*it)[p];
            if (!pair.is_array() || pair.size() != 2) throw parse_error(path, "expected [i, j]");
            const auto a = detail::as_integer(pair[0], path + "[0]");
            const auto b = detail::as_integer(pair[1], path + "[1]");
            if (a < 0 || b < 0) throw validation_error(path.substr(2) + ": negative sphere index");
            model.self_collision_pairs.emplace_back(static_cast<std::size_t>(a),
                                                    static_cast<std::size_t>(b));
        }
    }
    model.link_spheres.resize(std::max(model.link_spheres.size(), model.link_count()));
    validate_robot(model);
    return model;
}

RobotModel load_robot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open robot file " + path);
    return load_robot(in);
}

}  // namespace cprrtc
