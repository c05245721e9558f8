#pragma once

#include <Eigen/Core>
#include <vector>

namespace suction {

/// Linear inequality system L x <= c.
struct LinearConstraints {
    Eigen::MatrixXd L;
    Eigen::VectorXd c;

    bool satisfied(const Eigen::VectorXd& x, double tol) const;
    /// Largest violation max_i (L_i x - c_i), clamped at 0.
    double violation(const Eigen::VectorXd& x) const;
};

struct QpSettings {
    int max_iterations = 200;
    double kkt_tolerance = 1e-10;
};

struct QpResult {
    Eigen::VectorXd x;
    double objective = 0.0;   // ||M x + b||^2
    int iterations = 0;
    bool converged = false;
    std::vector<int> active;
};

/// Minimizes ||M x + b||^2 subject to L x <= c with a primal active-set
/// method. `x0` must be feasible; M should have full column rank.
QpResult solve_least_squares_qp(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                                const LinearConstraints& constraints, const Eigen::VectorXd& x0,
                                const QpSettings& settings = {});

}  // namespace suction
