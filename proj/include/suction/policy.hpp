#pragma once

#include <Eigen/Core>
#include <vector>

#include "suction/metrics.hpp"
#include "suction/rng.hpp"
#include "suction/sensor.hpp"

namespace suction {

struct CandidateConstraints {
    /// Maximum angle between the approach direction and world -z.
    double max_approach_angle = 0.7853981633974483;
    /// Workspace box used to segment the observed points from the table.
    Vec3 workspace_min = Vec3(-0.25, -0.25, 0.002);
    Vec3 workspace_max = Vec3(0.25, 0.25, 0.5);
    /// Normal estimation window (pixels, odd).
    int normal_window = 5;

    bool admits(const Vec3& approach) const;
};

struct Candidate {
    SuctionGrasp grasp;
    double quality = 0.0;
    Eigen::Vector2d pixel = Eigen::Vector2d::Constant(-1.0);
};

/// Observed surface points with inward approach normals that satisfy the constraints.
struct SurfacePool {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    std::vector<Eigen::Vector2d> pixels;
    /// Every segmented point, including those rejected by the cone gate.
    std::vector<Vec3> segment;

    bool empty() const { return points.empty(); }
    /// Index of the admissible point nearest to q.
    int nearest(const Vec3& q) const;
};

/// Segments the depth image by the workspace box, estimates normals from
/// k x k window plane fits and keeps points inside the approach cone.
/// Throws std::runtime_error when the segment is empty.
SurfacePool surface_pool_from_depth(const DepthImage& img, const Camera& camera,
                                    const CandidateConstraints& constraints);

/// Uniform draws (without replacement while possible) from the pool.
std::vector<Candidate> sample_candidates(const SurfacePool& pool, int count, Rng& rng);

/// Diagonal-floored Gaussian mixture fit by EM.
class GaussianMixture {
public:
    static constexpr double kCovarianceFloor = 1e-6;

    /// Rows of `data` are samples.
    void fit(const Eigen::MatrixXd& data, int components, Rng& rng, int em_iterations = 25);
    Eigen::VectorXd sample(Rng& rng) const;

    int components() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& means() const { return means_; }
    const std::vector<Eigen::MatrixXd>& covariances() const { return covs_; }

private:
    std::vector<double> weights_;
    std::vector<Eigen::VectorXd> means_;
    std::vector<Eigen::MatrixXd> covs_;
    std::vector<Eigen::MatrixXd> chol_;
};

/// (point, polar angle, azimuth) of the approach direction.
Eigen::VectorXd grasp_parameters(const SuctionGrasp& g);
SuctionGrasp grasp_from_parameters(const Eigen::VectorXd& x);

struct CemSettings {
    int iterations = 3;
    int candidates = 100;
    double elite_fraction = 0.25;
    int components = 3;
    int workers = 1;
};

struct CemResult {
    Candidate best;
    /// Incumbent quality after the initial batch and after each iteration.
    std::vector<double> incumbent;
    int evaluations = 0;
};

/// Cross-entropy search: score, keep the elite fraction by rank, fit a GMM,
/// resample and re-anchor onto the pool, repeat. Returns the best grasp seen.
CemResult cem_plan(const SurfacePool& pool, std::vector<Candidate> initial, const QualityFn& quality,
                   const CandidateConstraints& constraints, const CemSettings& settings, Rng& rng);

}  // namespace suction
