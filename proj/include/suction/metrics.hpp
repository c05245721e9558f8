#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "suction/grasp.hpp"
#include "suction/mesh.hpp"
#include "suction/robustness.hpp"

namespace suction {

inline constexpr double kMetricEta = 1e-12;

struct PlaneFit {
    Vec3 centroid = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    double sse = 0.0;   // sum of squared point-to-plane distances
    int count = 0;
};

/// Least-squares plane through the points (smallest eigenvector of the scatter matrix).
PlaneFit fit_plane(std::span<const Vec3> points);

/// Points whose distance from the approach axis is at most `radius` and whose
/// offset along it is within `radius` of the target.
std::vector<Vec3> disc_points(std::span<const Vec3> cloud, const SuctionGrasp& grasp, double radius);

/// Surface points inside the disc found by casting a grid x grid pattern of
/// rays along the approach direction.
std::vector<Vec3> mesh_disc_points(const Mesh& mesh, const SuctionGrasp& grasp, double radius, int grid = 16);

/// 1 / (SSE + eta); 0 with fewer than three points.
double planarity_score(std::span<const Vec3> disc);
/// 1 / (|p - centroid| + eta).
double centroid_score(const Vec3& point, const Vec3& centroid);
/// centroid_score when SSE <= threshold_per_point * N, else 0.
double planarity_centroid_score(std::span<const Vec3> disc, const Vec3& point, const Vec3& centroid,
                                double threshold_per_point);
/// 1 / (1 + s) for a finite max strain s, else 0.
double spring_stretch_score(double max_strain);

enum class MetricKind {
    Planarity,
    Centroid,
    PlanarityCentroid,
    PC3D,
    SpringStretch,
    WrenchResistance,
    RobustWrenchResistance,
};

std::string_view to_string(MetricKind k);
MetricKind metric_kind_from_string(std::string_view s);

struct MetricParams {
    double disc_radius = 0.0075;
    double planarity_threshold = 1e-6;   // m^2 per point
    int mesh_disc_grid = 16;
    std::uint64_t seed = 0;              // robust wrench resistance trials
};

/// Quality function: higher is better for every kind.
using QualityFn = std::function<double(const SuctionGrasp&)>;

/// Metrics on an observed point cloud (planarity, centroid, planarity_centroid).
QualityFn make_cloud_metric(MetricKind kind, std::vector<Vec3> cloud, const MetricParams& params);

/// Metrics on a known mesh; `options` and `spec` are used by the physics metrics.
/// The referenced objects must outlive the returned function.
QualityFn make_mesh_metric(MetricKind kind, const Mesh& mesh, const EvaluationOptions& options,
                           const PerturbationSpec& spec, const Vec3& gravity_direction, const MetricParams& params);

}  // namespace suction
