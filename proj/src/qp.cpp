#include "suction/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <limits>
#include <stdexcept>

namespace suction {

bool LinearConstraints::satisfied(const Eigen::VectorXd& x, double tol) const
{
    return violation(x) <= tol;
}

double LinearConstraints::violation(const Eigen::VectorXd& x) const
{
    if (L.rows() == 0) return 0.0;
    return std::max(0.0, (L * x - c).maxCoeff());
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& L, const std::vector<int>& idx)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), L.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = L.row(idx[k]);
    }
    return out;
}

// Minimizer of 1/2 p'Hp + g'p over {p : A p = 0}.
Eigen::VectorXd equality_step(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& A)
{
    const Eigen::Index n = H.rows();
    Eigen::MatrixXd Z;
    if (A.rows() == 0) {
        Z = Eigen::MatrixXd::Identity(n, n);
    } else {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-12);
        Z = lu.kernel();
        if (Z.cols() == 1 && Z.norm() == 0.0) {
            return Eigen::VectorXd::Zero(n);
        }
        // Orthonormal basis of the null space.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
        Z = qr.householderQ() * Eigen::MatrixXd::Identity(n, Z.cols());
    }
    const Eigen::MatrixXd Hz = Z.transpose() * H * Z;
    const Eigen::VectorXd gz = Z.transpose() * g;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hz);
    Eigen::VectorXd y;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        ldlt.vectorD().minCoeff() > 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
        y = -ldlt.solve(gz);
    } else {
        y = -Hz.completeOrthogonalDecomposition().solve(gz);
    }
    return Z * y;
}

}  // namespace

QpResult solve_least_squares_qp(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                                const LinearConstraints& constraints, const Eigen::VectorXd& x0,
                                const QpSettings& settings)
{
    const Eigen::Index n = M.cols();
    if (x0.size() != n || constraints.L.cols() != n || constraints.L.rows() != constraints.c.size()) {
        throw std::invalid_argument("qp: dimension mismatch");
    }
    if (!constraints.satisfied(x0, 1e-9)) {
        throw std::invalid_argument("qp: starting point is infeasible");
    }
    const Eigen::MatrixXd H = M.transpose() * M;
    const Eigen::VectorXd q = M.transpose() * b;
    const Eigen::MatrixXd& L = constraints.L;
    const Eigen::VectorXd& c = constraints.c;
    const int m = static_cast<int>(L.rows());

    const double scale = std::max({1.0, H.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff()});
    const double tol = settings.kkt_tolerance * scale;

    QpResult result;
    Eigen::VectorXd x = x0;
    std::vector<int>& active = result.active;
    std::vector<char> in_active(static_cast<std::size_t>(m), 0);

    for (int it = 0; it < settings.max_iterations; ++it) {
        result.iterations = it + 1;
        const Eigen::VectorXd grad = H * x + q;
        const Eigen::MatrixXd A = rows_of(L, active);
        const Eigen::VectorXd p = equality_step(H, grad, A);

        if (p.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
            if (active.empty()) {
                result.converged = true;
                break;
            }
            // grad + A' lambda = 0
            const Eigen::VectorXd lambda =
                A.transpose().completeOrthogonalDecomposition().solve(-grad);
            Eigen::Index worst = 0;
            const double most_negative = lambda.minCoeff(&worst);
            if (most_negative >= -tol) {
                result.converged = true;
                break;
            }
            in_active[static_cast<std::size_t>(active[static_cast<std::size_t>(worst)])] = 0;
            active.erase(active.begin() + worst);
            continue;
        }

        double step = 1.0;
        int blocking = -1;
        for (int i = 0; i < m; ++i) {
            if (in_active[static_cast<std::size_t>(i)]) continue;
            const double ap = L.row(i).dot(p);
            if (ap <= 1e-15 * p.norm() * L.row(i).norm()) continue;
            const double t = std::max(0.0, (c(i) - L.row(i).dot(x)) / ap);
            if (t < step) {
                step = t;
                blocking = i;
            }
        }
        x += step * p;
        if (blocking >= 0) {
            active.push_back(blocking);
            in_active[static_cast<std::size_t>(blocking)] = 1;
        }
    }
    result.x = x;
    result.objective = (M * x + b).squaredNorm();
    return result;
}

}  // namespace suction
