#pragma once

#include <limits>
#include <optional>
#include <variant>

#include <Eigen/Core>

#include "cprrtc/kinematics.hpp"

namespace cprrtc {

/// End effector restricted to the plane normal . p = offset.
struct PlaneConstraint {
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;
};

/// End effector restricted to the line through `point` along `direction`.
struct LineConstraint {
    Vec3 point = Vec3::Zero();
    Vec3 direction = Vec3::UnitX();
};

/// No positional restriction.
struct FreePosition {};

using PositionConstraint = std::variant<FreePosition, PlaneConstraint, LineConstraint>;

struct ConstraintSpec {
    PositionConstraint position = FreePosition{};
    std::optional<Quat> fixed_orientation;
    double angular_weight = 0.5;  // m / rad
    double tau_task = 1e-3;       // bound on ||task error||

    /// Position rows plus three orientation rows when orientation is locked.
    int dim() const;
    bool is_unconstrained() const { return tau_task == std::numeric_limits<double>::infinity(); }

    /// Always satisfied: projection becomes the identity.
    static ConstraintSpec unconstrained();
};

void validate_constraint(const ConstraintSpec& spec);

using TaskError = Eigen::VectorXd;
using TaskJacobian = Eigen::MatrixXd;

/// Orthonormal pair spanning the plane normal to `direction`, from
/// Gram-Schmidt on the coordinate axis where |direction| is smallest
/// (lowest index on ties).
std::pair<Vec3, Vec3> line_normal_basis(const Vec3& direction);

/// Rotation vector (axis * angle, angle in [0, pi]) of a unit quaternion.
Vec3 rotation_log(const Quat& q);

/// Maps angular velocity expressed in the base of log to d(log)/dt:
/// inverse left Jacobian of SO(3) at `phi`.
Eigen::Matrix3d so3_left_jacobian_inverse(const Vec3& phi);

TaskError task_error(const ConstraintSpec& spec, const EePose& ee);
TaskError task_error(const ConstraintSpec& spec, const RobotModel& model, const Configuration& q);

/// Exact derivative of task_error with respect to q.
TaskJacobian task_jacobian(const ConstraintSpec& spec, const RobotModel& model, const Configuration& q);
TaskJacobian task_jacobian(const ConstraintSpec& spec, const RobotModel& model, const FrameSet& frames);

/// J^T (J J^T + lambda^2 I)^-1 e. With lambda == 0 a rank-deficient J J^T
/// throws singular_system_error.
Eigen::VectorXd damped_pinv_apply(const Eigen::MatrixXd& jac, const Eigen::VectorXd& e, double lambda);

}  // namespace cprrtc
