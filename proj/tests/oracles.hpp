#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

/// Euclidean projection onto the ring-contact constraint set over
/// (fx, fy, fz, tx, ty, tz). tx, ty are clipped; the remaining block is a
/// one-dimensional convex search over the normal force s = fz + V >= 0.
inline Eigen::VectorXd project_ring(const Eigen::VectorXd& a, double mu, double r, double kappa, double V)
{
    Eigen::VectorXd out = a;
    const double mat = M_PI * r * kappa / std::sqrt(2.0);
    out(3) = std::clamp(a(3), -mat, mat);
    out(4) = std::clamp(a(4), -mat, mat);

    const double x[3] = {std::abs(a(0)), std::abs(a(1)), std::abs(a(5))};
    const double c[3] = {mu / std::sqrt(3.0), mu / std::sqrt(3.0), r * mu / std::sqrt(3.0)};
    const double s0 = a(2) + V;

    // g(s) = (s - s0)^2 + sum_i max(x_i - c_i s, 0)^2 on s >= 0, piecewise quadratic.
    std::vector<double> breaks = {0.0};
    for (int i = 0; i < 3; ++i) {
        if (c[i] > 0.0) breaks.push_back(x[i] / c[i]);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.push_back(std::numeric_limits<double>::infinity());
    auto g = [&](double s) {
        double v = (s - s0) * (s - s0);
        for (int i = 0; i < 3; ++i) {
            const double e = std::max(x[i] - c[i] * s, 0.0);
            v += e * e;
        }
        return v;
    };
    double best_s = 0.0;
    double best = g(0.0);
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = breaks[k];
        const double hi = breaks[k + 1];
        if (hi <= lo) continue;
        const double mid = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 1.0;
        // Active clipping terms are those with x_i - c_i s > 0 inside the interval.
        double A = 1.0;
        double B = s0;
        for (int i = 0; i < 3; ++i) {
            if (x[i] - c[i] * mid > 0.0) {
                A += c[i] * c[i];
                B += c[i] * x[i];
            }
        }
        const double s = std::clamp(B / A, lo, std::isfinite(hi) ? hi : std::max(lo, B / A));
        const double v = g(s);
        if (v < best) {
            best = v;
            best_s = s;
        }
    }
    out(2) = best_s - V;
    const int idx[3] = {0, 1, 5};
    for (int i = 0; i < 3; ++i) {
        const double lim = c[i] * best_s;
        out(idx[i]) = std::clamp(a(idx[i]), -lim, lim);
    }
    return out;
}

/// Accelerated projected gradient on ||M a + b||^2 with a given projection.
template <typename Project>
double projected_gradient(const Eigen::MatrixXd& M, const Eigen::VectorXd& b, Project project, int iterations,
                          Eigen::VectorXd* argmin = nullptr)
{
    const Eigen::MatrixXd H = M.transpose() * M;
    const double L = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().maxCoeff();
    Eigen::VectorXd x = project(Eigen::VectorXd::Zero(M.cols()));
    Eigen::VectorXd y = x;
    double t = 1.0;
    double best = (M * x + b).squaredNorm();
    Eigen::VectorXd best_x = x;
    for (int k = 0; k < iterations; ++k) {
        const Eigen::VectorXd grad = 2.0 * M.transpose() * (M * y + b);
        const Eigen::VectorXd next = project(y - grad / L);
        const double f = (M * next + b).squaredNorm();
        if (f < best) {
            best = f;
            best_x = next;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        // Restart momentum when the objective goes up.
        if (f > (M * x + b).squaredNorm()) {
            y = x;
            t = 1.0;
            continue;
        }
        y = next + ((t - 1.0) / t_next) * (next - x);
        x = next;
        t = t_next;
    }
    if (argmin != nullptr) *argmin = best_x;
    return best;
}

/// Exhaustive active-set enumeration for min ||M x + b||^2 s.t. L x <= c (small problems).
inline double enumerate_active_sets(const Eigen::MatrixXd& M, const Eigen::VectorXd& b, const Eigen::MatrixXd& Lm,
                                    const Eigen::VectorXd& c)
{
    const int n = static_cast<int>(M.cols());
    const int m = static_cast<int>(Lm.rows());
    const Eigen::MatrixXd H = M.transpose() * M;
    const Eigen::VectorXd q = M.transpose() * b;
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        const int k = __builtin_popcount(mask);
        if (k > n) continue;
        Eigen::MatrixXd A(k, n);
        Eigen::VectorXd rhs(k);
        int row = 0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) {
                A.row(row) = Lm.row(i);
                rhs(row) = c(i);
                ++row;
            }
        }
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
        K.topLeftCorner(n, n) = H;
        K.topRightCorner(n, k) = A.transpose();
        K.bottomLeftCorner(k, n) = A;
        Eigen::VectorXd r(n + k);
        r << -q, rhs;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(r);
        const Eigen::VectorXd x = sol.head(n);
        if (((Lm * x - c).array() > 1e-9).any()) continue;
        if (k > 0 && (sol.tail(k).array() < -1e-9).any()) continue;
        best = std::min(best, (M * x + b).squaredNorm());
    }
    return best;
}

/// Asymptotic Kolmogorov-Smirnov p-value for statistic D over n samples.
inline double ks_pvalue(double D, std::size_t n)
{
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * D;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// One-sample KS statistic against U(lo, hi).
inline double ks_uniform(std::vector<double> xs, double lo, double hi)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double D = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = std::clamp((xs[i] - lo) / (hi - lo), 0.0, 1.0);
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    return D;
}

/// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

/// Spearman correlation (Pearson on average ranks); NaN when either side is constant.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
