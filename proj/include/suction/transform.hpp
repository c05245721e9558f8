#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace suction {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Wrench stacked as (force, torque).
using Wrench = Vec6;

inline constexpr double kGravity = 9.81;

Mat3 skew(const Vec3& v);

/// Rotation from Lie-algebra coordinates (axis * angle).
Mat3 so3_exp(const Vec3& omega);

/// Rigid transform x -> R x + t.
class RigidTransform {
public:
    RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
    RigidTransform(const Mat3& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }
    /// exp of a twist-like perturbation: rotation from so3_exp(rot), translation added directly.
    static RigidTransform from_perturbation(const Vec3& translation, const Vec3& rotation);

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }
    Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }

    RigidTransform inverse() const;
    RigidTransform operator*(const RigidTransform& rhs) const;

    bool is_valid(double tol = 1e-9) const;

private:
    Mat3 rotation_;
    Vec3 translation_;
};

/// Maps wrenches expressed in a frame at pose (R, t) into the parent frame:
/// [[R, 0], [[t]x R, R]].
class AdjointMap {
public:
    explicit AdjointMap(const RigidTransform& pose);

    const Mat6& matrix() const { return matrix_; }
    Wrench apply(const Wrench& w) const { return matrix_ * w; }
    /// Inverse map (parent frame -> pose frame).
    Wrench apply_inverse(const Wrench& w) const;

private:
    Mat6 matrix_;
    RigidTransform pose_;
};

/// Wrench of force `force` applied at `point`, about the origin.
Wrench wrench_at(const Vec3& force, const Vec3& point);

}  // namespace suction
