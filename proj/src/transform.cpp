#include "suction/transform.hpp"

#include <cmath>

namespace suction {

Mat3 skew(const Vec3& v)
{
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return m;
}

Mat3 so3_exp(const Vec3& omega)
{
    const double angle = omega.norm();
    if (angle < 1e-12) {
        return Mat3::Identity() + skew(omega);
    }
    return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation)
{
}

RigidTransform RigidTransform::from_perturbation(const Vec3& translation, const Vec3& rotation)
{
    return {so3_exp(rotation), translation};
}

RigidTransform RigidTransform::inverse() const
{
    const Mat3 rt = rotation_.transpose();
    return {rt, -(rt * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const
{
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

bool RigidTransform::is_valid(double tol) const
{
    const Mat3 err = rotation_.transpose() * rotation_ - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() <= tol && std::abs(rotation_.determinant() - 1.0) <= tol;
}

AdjointMap::AdjointMap(const RigidTransform& pose) : pose_(pose)
{
    const Mat3& r = pose.rotation();
    matrix_.setZero();
    matrix_.topLeftCorner<3, 3>() = r;
    matrix_.bottomLeftCorner<3, 3>() = skew(pose.translation()) * r;
    matrix_.bottomRightCorner<3, 3>() = r;
}

Wrench AdjointMap::apply_inverse(const Wrench& w) const
{
    const Mat3 rt = pose_.rotation().transpose();
    const Vec3 f = w.head<3>();
    const Vec3 tau = w.tail<3>() - pose_.translation().cross(f);
    Wrench out;
    out << rt * f, rt * tau;
    return out;
}

Wrench wrench_at(const Vec3& force, const Vec3& point)
{
    Wrench w;
    w << force, point.cross(force);
    return w;
}

}  // namespace suction
