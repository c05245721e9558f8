#pragma once

#include <Eigen/Core>
#include <string_view>

#include "suction/qp.hpp"
#include "suction/transform.hpp"

namespace suction {

/// Contact frame at p with z along the inward approach v and x from the
/// projection of world x (world y when |v.x| > 0.99).
RigidTransform contact_frame(const Vec3& p, const Vec3& v);

enum class ContactKind { Ring, SoftFinger };

std::string_view to_string(ContactKind k);
ContactKind contact_kind_from_string(std::string_view s);

struct RingContactModel {
    double radius = 0.0075;
    double mu = 0.5;
    double kappa = 0.005;
    double vacuum = 250.0;

    void validate() const;
};

/// The 11 half-spaces over alpha = (fx, fy, fz, tx, ty, tz): six friction
/// (prism inscribed in the limit-surface ellipsoid), four material, one suction.
LinearConstraints ring_constraints(const RingContactModel& model);

/// Columns of the 6x6 identity.
Eigen::MatrixXd ring_basis();

struct SoftFingerModel {
    double mu = 0.5;
    double gamma = 0.005;

    void validate() const;
};

enum class NormalBranch { Push, Pull };

/// Constraints over alpha = (fx, fy, fz, tz) on one sign branch of fz:
/// 8-facet pyramid inscribed in the friction cone and |tz| <= gamma |fz|.
LinearConstraints soft_finger_constraints(double mu, double gamma, NormalBranch branch);

/// Columns: x force, y force, z force, z torque.
Eigen::MatrixXd soft_finger_basis();

/// G = A W for a contact at `pose` (contact frame in the object frame).
struct GraspMap {
    Eigen::Matrix<double, 6, Eigen::Dynamic> G;
    Mat6 A;
    Eigen::MatrixXd W;

    GraspMap(const RigidTransform& pose, const Eigen::MatrixXd& basis);
};

struct ResistanceSettings {
    /// Torques are divided by this length before measuring the residual.
    double torque_scale = 0.0075;
    double tolerance = 1e-10;
    QpSettings qp;
};

struct ResistanceResult {
    double epsilon = 0.0;
    Eigen::VectorXd alpha;
    bool resists = false;
    bool converged = true;
};

/// min over alpha in F of ||G alpha + w||^2, the residual measured in the
/// contact frame with torques scaled by 1/torque_scale.
ResistanceResult wrench_resistance(const GraspMap& map, const LinearConstraints& constraints,
                                   const Wrench& w, const ResistanceSettings& settings = {});

/// Contact-model dispatch used by higher-level modules.
struct ContactModel {
    ContactKind kind = ContactKind::Ring;
    RingContactModel ring;
    SoftFingerModel soft;
    ResistanceSettings settings;

    /// `w` is the object-frame wrench about the object origin; `pose` is the contact frame.
    ResistanceResult resist(const RigidTransform& pose, const Wrench& w) const;
    /// Same with a different friction coefficient.
    ResistanceResult resist(const RigidTransform& pose, const Wrench& w, double mu) const;
};

/// Gravity wrench (m g, c x m g) about the object origin.
Wrench gravity_wrench(const Vec3& com, const Vec3& gravity_direction, double mass);

}  // namespace suction
