#include "suction/contact.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace suction {

RigidTransform contact_frame(const Vec3& p, const Vec3& v)
{
    const Vec3 z = v.normalized();
    Vec3 ref = std::abs(z.x()) > 0.99 ? Vec3::UnitY() : Vec3::UnitX();
    const Vec3 x = (ref - ref.dot(z) * z).normalized();
    const Vec3 y = z.cross(x);
    Mat3 R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    return {R, p};
}

std::string_view to_string(ContactKind k)
{
    return k == ContactKind::Ring ? "ring" : "soft_finger";
}

ContactKind contact_kind_from_string(std::string_view s)
{
    if (s == "ring") return ContactKind::Ring;
    if (s == "soft_finger") return ContactKind::SoftFinger;
    throw std::invalid_argument("unknown contact model '" + std::string(s) + "'");
}

void RingContactModel::validate() const
{
    if (!(radius > 0.0)) throw std::invalid_argument("contact radius must be positive");
    if (!(vacuum > 0.0)) throw std::invalid_argument("contact.vacuum_force_n must be positive");
    if (!(mu >= 0.0)) throw std::invalid_argument("contact.mu must be non-negative");
    if (!(kappa >= 0.0)) throw std::invalid_argument("contact.kappa must be non-negative");
}

LinearConstraints ring_constraints(const RingContactModel& m)
{
    m.validate();
    const double s3 = std::sqrt(3.0);
    const double s2 = std::sqrt(2.0);
    const double r = m.radius;
    const double material = std::numbers::pi * r * m.kappa;
    LinearConstraints out;
    out.L = Eigen::MatrixXd::Zero(11, 6);
    out.c = Eigen::VectorXd::Zero(11);
    int row = 0;
    auto add = [&](std::initializer_list<std::pair<int, double>> terms, double bound) {
        for (const auto& [col, coef] : terms) out.L(row, col) = coef;
        out.c(row) = bound;
        ++row;
    };
    for (const double sgn : {1.0, -1.0}) {
        add({{0, sgn * s3}, {2, -m.mu}}, m.mu * m.vacuum);
        add({{1, sgn * s3}, {2, -m.mu}}, m.mu * m.vacuum);
        add({{5, sgn * s3}, {2, -r * m.mu}}, r * m.mu * m.vacuum);
    }
    for (const double sgn : {1.0, -1.0}) {
        add({{3, sgn * s2}}, material);
        add({{4, sgn * s2}}, material);
    }
    add({{2, -1.0}}, m.vacuum);
    return out;
}

Eigen::MatrixXd ring_basis()
{
    return Eigen::MatrixXd::Identity(6, 6);
}

void SoftFingerModel::validate() const
{
    if (!(mu >= 0.0)) throw std::invalid_argument("soft finger mu must be non-negative");
    if (!(gamma >= 0.0)) throw std::invalid_argument("contact.gamma must be non-negative");
}

LinearConstraints soft_finger_constraints(double mu, double gamma, NormalBranch branch)
{
    // |fz| = s * fz on the branch.
    const double s = branch == NormalBranch::Push ? 1.0 : -1.0;
    const double bound = mu * std::cos(std::numbers::pi / 8.0);
    LinearConstraints out;
    out.L = Eigen::MatrixXd::Zero(11, 4);
    out.c = Eigen::VectorXd::Zero(11);
    for (int k = 0; k < 8; ++k) {
        const double a = k * std::numbers::pi / 4.0;
        out.L(k, 0) = std::cos(a);
        out.L(k, 1) = std::sin(a);
        out.L(k, 2) = -s * bound;
    }
    out.L(8, 3) = 1.0;
    out.L(8, 2) = -s * gamma;
    out.L(9, 3) = -1.0;
    out.L(9, 2) = -s * gamma;
    out.L(10, 2) = -s;
    return out;
}

Eigen::MatrixXd soft_finger_basis()
{
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(6, 4);
    W(0, 0) = 1.0;
    W(1, 1) = 1.0;
    W(2, 2) = 1.0;
    W(5, 3) = 1.0;
    return W;
}

GraspMap::GraspMap(const RigidTransform& pose, const Eigen::MatrixXd& basis)
    : A(AdjointMap(pose).matrix()), W(basis)
{
    if (basis.rows() != 6) throw std::invalid_argument("wrench basis must have 6 rows");
    G = A * W;
}

ResistanceResult wrench_resistance(const GraspMap& map, const LinearConstraints& constraints,
                                   const Wrench& w, const ResistanceSettings& settings)
{
    Vec6 scale = Vec6::Ones();
    scale.tail<3>().setConstant(1.0 / settings.torque_scale);
    // Contact-frame residual: A^-1 (G alpha + w) = W alpha + A^-1 w.
    const Wrench local = map.A.fullPivLu().solve(w);
    const Eigen::MatrixXd M = scale.asDiagonal() * map.W;
    const Eigen::VectorXd b = scale.cwiseProduct(local);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(map.W.cols());

    const QpResult qp = solve_least_squares_qp(M, b, constraints, x0, settings.qp);
    ResistanceResult out;
    out.alpha = qp.x;
    out.epsilon = qp.objective;
    out.converged = qp.converged;
    out.resists = qp.converged && out.epsilon <= settings.tolerance;
    return out;
}

ResistanceResult ContactModel::resist(const RigidTransform& pose, const Wrench& w) const
{
    return resist(pose, w, kind == ContactKind::Ring ? ring.mu : soft.mu);
}

ResistanceResult ContactModel::resist(const RigidTransform& pose, const Wrench& w, double mu) const
{
    if (kind == ContactKind::Ring) {
        RingContactModel m = ring;
        m.mu = mu;
        return wrench_resistance(GraspMap(pose, ring_basis()), ring_constraints(m), w, settings);
    }
    const GraspMap map(pose, soft_finger_basis());
    ResistanceResult best;
    best.epsilon = std::numeric_limits<double>::infinity();
    for (const auto branch : {NormalBranch::Push, NormalBranch::Pull}) {
        ResistanceResult r = wrench_resistance(map, soft_finger_constraints(mu, soft.gamma, branch), w, settings);
        if (r.epsilon < best.epsilon) best = std::move(r);
    }
    return best;
}

Wrench gravity_wrench(const Vec3& com, const Vec3& gravity_direction, double mass)
{
    return wrench_at(mass * kGravity * gravity_direction.normalized(), com);
}

}  // namespace suction
