#include "cprrtc/constraints.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "cprrtc/errors.hpp"

namespace cprrtc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int position_dim(const PositionConstraint& p) {
    return std::visit(overloaded{[](const FreePosition&) { return 0; },
                                 [](const PlaneConstraint&) { return 1; },
                                 [](const LineConstraint&) { return 2; }},
                      p);
}

Eigen::Matrix3d skew(const Vec3& v) {
    Eigen::Matrix3d m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

}  // namespace

int ConstraintSpec::dim() const { return position_dim(position) + (fixed_orientation ? 3 : 0); }

ConstraintSpec ConstraintSpec::unconstrained() {
    ConstraintSpec spec;
    spec.tau_task = std::numeric_limits<double>::infinity();
    return spec;
}

void validate_constraint(const ConstraintSpec& spec) {
    if (!(spec.tau_task > 0.0)) throw validation_error("constraint.tau_task: must be positive");
    if (const auto* plane = std::get_if<PlaneConstraint>(&spec.position)) {
        if (std::abs(plane->normal.norm() - 1.0) > 1e-9)
            throw validation_error("constraint.normal: must be unit norm");
        if (!std::isfinite(plane->offset)) throw validation_error("constraint.offset: non-finite");
    }
    if (const auto* line = std::get_if<LineConstraint>(&spec.position)) {
        if (std::abs(line->direction.norm() - 1.0) > 1e-9)
            throw validation_error("constraint.direction: must be unit norm");
        if (!line->point.allFinite()) throw validation_error("constraint.point: non-finite");
    }
    if (spec.fixed_orientation) {
        if (std::abs(spec.fixed_orientation->norm() - 1.0) > 1e-9)
            throw validation_error("constraint.fixed_orientation: must be a unit quaternion");
        if (!(spec.angular_weight > 0.0)) throw validation_error("constraint.angular_weight: must be positive");
    }
}

std::pair<Vec3, Vec3> line_normal_basis(const Vec3& dir) {
    const Vec3 direction = dir.normalized();
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (std::abs(direction[a]) < std::abs(direction[axis])) axis = a;
    const Vec3 seed = Vec3::Unit(axis);
    const Vec3 u = (seed - seed.dot(direction) * direction).normalized();
    const Vec3 v = direction.cross(u);
    return {u, v};
}

Vec3 rotation_log(const Quat& q_in) {
    Quat q = q_in;
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    const Vec3 v = q.vec();
    const double s = v.norm();
    if (s < 1e-12) return 2.0 * v / q.w();  // first-order, exact to roundoff here
    const double angle = 2.0 * std::atan2(s, q.w());
    return v * (angle / s);
}

Eigen::Matrix3d so3_left_jacobian_inverse(const Vec3& phi) {
    const double theta = phi.norm();
    const Eigen::Matrix3d k = skew(phi);
    double c;
    if (theta < 1e-5)
        c = 1.0 / 12.0 + theta * theta / 720.0;
    else
        c = 1.0 / (theta * theta) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
    return Eigen::Matrix3d::Identity() - 0.5 * k + c * k * k;
}

TaskError task_error(const ConstraintSpec& spec, const EePose& ee) {
    TaskError e(spec.dim());
    int row = 0;
    std::visit(overloaded{[](const FreePosition&) {},
                          [&](const PlaneConstraint& c) { e[row++] = c.normal.dot(ee.position) - c.offset; },
                          [&](const LineConstraint& c) {
                              const auto [u, v] = line_normal_basis(c.direction);
                              const Vec3 d = ee.position - c.point;
                              e[row++] = u.dot(d);
                              e[row++] = v.dot(d);
                          }},
               spec.position);
    if (spec.fixed_orientation) {
        const Quat rel = spec.fixed_orientation->conjugate() * ee.orientation;
        e.segment<3>(row) = spec.angular_weight * rotation_log(rel);
    }
    return e;
}

TaskError task_error(const ConstraintSpec& spec, const RobotModel& model, const Configuration& q) {
    return task_error(spec, forward_kinematics(model, q).ee_pose);
}

TaskJacobian task_jacobian(const ConstraintSpec& spec, const RobotModel& model, const FrameSet& frames) {
    const auto n = static_cast<Eigen::Index>(model.dof());
    TaskJacobian out(spec.dim(), n);
    if (spec.dim() == 0) return out;
    const auto full = geometric_jacobian(model, frames, frames.ee_pose.position);
    const auto linear = full.topRows<3>();
    int row = 0;
    std::visit(overloaded{[](const FreePosition&) {},
                          [&](const PlaneConstraint& c) { out.row(row++) = c.normal.transpose() * linear; },
                          [&](const LineConstraint& c) {
                              const auto [u, v] = line_normal_basis(c.direction);
                              out.row(row++) = u.transpose() * linear;
                              out.row(row++) = v.transpose() * linear;
                          }},
               spec.position);
    if (spec.fixed_orientation) {
        const Quat rel = spec.fixed_orientation->conjugate() * frames.ee_pose.orientation;
        const Vec3 phi = rotation_log(rel);
        // d(log(R_f^T R))/dt = Jl^-1(phi) R_f^T omega; reduces to omega near the target.
        const Eigen::Matrix3d map =
            so3_left_jacobian_inverse(phi) * spec.fixed_orientation->toRotationMatrix().transpose();
        out.middleRows(row, 3) = spec.angular_weight * map * full.bottomRows<3>();
    }
    return out;
}

TaskJacobian task_jacobian(const ConstraintSpec& spec, const RobotModel& model, const Configuration& q) {
    return task_jacobian(spec, model, forward_kinematics(model, q));
}

Eigen::VectorXd damped_pinv_apply(const Eigen::MatrixXd& jac, const Eigen::VectorXd& e, double lambda) {
    if (jac.rows() != e.size())
        throw dimension_error("jacobian has " + std::to_string(jac.rows()) + " rows, error has " +
                              std::to_string(e.size()) + " entries");
    if (lambda < 0.0) throw std::invalid_argument("damping must be non-negative");
    if (jac.rows() == 0) return Eigen::VectorXd::Zero(jac.cols());

    Eigen::MatrixXd gram = jac * jac.transpose();
    if (lambda > 0.0) {
        gram.diagonal().array() += lambda * lambda;
        return jac.transpose() * gram.llt().solve(e);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) throw singular_system_error("J J^T is singular and no damping was given");
    return jac.transpose() * lu.solve(e);
}

}  // namespace cprrtc
