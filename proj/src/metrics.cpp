#include "suction/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "suction/contact.hpp"

namespace suction {

PlaneFit fit_plane(std::span<const Vec3> points)
{
    PlaneFit fit;
    fit.count = static_cast<int>(points.size());
    if (points.empty()) return fit;
    for (const auto& p : points) fit.centroid += p;
    fit.centroid /= static_cast<double>(points.size());
    Mat3 scatter = Mat3::Zero();
    for (const auto& p : points) {
        const Vec3 d = p - fit.centroid;
        scatter += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    fit.normal = eig.eigenvectors().col(0);
    fit.sse = 0.0;
    for (const auto& p : points) {
        const double d = (p - fit.centroid).dot(fit.normal);
        fit.sse += d * d;
    }
    return fit;
}

std::vector<Vec3> disc_points(std::span<const Vec3> cloud, const SuctionGrasp& grasp, double radius)
{
    const Vec3 v = grasp.approach.normalized();
    std::vector<Vec3> out;
    for (const auto& q : cloud) {
        const Vec3 d = q - grasp.point;
        const double axial = d.dot(v);
        if (std::abs(axial) <= radius && (d - axial * v).norm() <= radius) out.push_back(q);
    }
    return out;
}

std::vector<Vec3> mesh_disc_points(const Mesh& mesh, const SuctionGrasp& grasp, double radius, int grid)
{
    const RigidTransform frame = contact_frame(grasp.point, grasp.approach);
    const Vec3 x = frame.rotation().col(0);
    const Vec3 y = frame.rotation().col(1);
    const Vec3 v = frame.rotation().col(2);
    const double standoff = mesh.bounds().diagonal() + (grasp.point - mesh.bounds().center()).norm();
    std::vector<Vec3> out;
    for (int iy = 0; iy < grid; ++iy) {
        for (int ix = 0; ix < grid; ++ix) {
            const double a = radius * (-1.0 + (2.0 * ix + 1.0) / grid);
            const double b = radius * (-1.0 + (2.0 * iy + 1.0) / grid);
            if (a * a + b * b > radius * radius) continue;
            const Vec3 start = grasp.point + a * x + b * y - standoff * v;
            if (const auto hit = ray_intersect(mesh, start, v)) {
                if (std::abs((hit->point - grasp.point).dot(v)) <= radius) out.push_back(hit->point);
            }
        }
    }
    return out;
}

double planarity_score(std::span<const Vec3> disc)
{
    if (disc.size() < 3) return 0.0;
    return 1.0 / (fit_plane(disc).sse + kMetricEta);
}

double centroid_score(const Vec3& point, const Vec3& centroid)
{
    return 1.0 / ((point - centroid).norm() + kMetricEta);
}

double planarity_centroid_score(std::span<const Vec3> disc, const Vec3& point, const Vec3& centroid,
                                double threshold_per_point)
{
    if (disc.size() < 3) return 0.0;
    const PlaneFit fit = fit_plane(disc);
    if (fit.sse > threshold_per_point * fit.count) return 0.0;
    return centroid_score(point, centroid);
}

double spring_stretch_score(double max_strain)
{
    return std::isfinite(max_strain) ? 1.0 / (1.0 + max_strain) : 0.0;
}

std::string_view to_string(MetricKind k)
{
    switch (k) {
    case MetricKind::Planarity: return "planarity";
    case MetricKind::Centroid: return "centroid";
    case MetricKind::PlanarityCentroid: return "planarity_centroid";
    case MetricKind::PC3D: return "pc3d";
    case MetricKind::SpringStretch: return "spring_stretch";
    case MetricKind::WrenchResistance: return "wrench_resistance";
    case MetricKind::RobustWrenchResistance: return "robust_wrench_resistance";
    }
    return "unknown";
}

MetricKind metric_kind_from_string(std::string_view s)
{
    if (s == "planarity") return MetricKind::Planarity;
    if (s == "centroid") return MetricKind::Centroid;
    if (s == "planarity_centroid" || s == "pc") return MetricKind::PlanarityCentroid;
    if (s == "pc3d") return MetricKind::PC3D;
    if (s == "spring_stretch" || s == "ss") return MetricKind::SpringStretch;
    if (s == "wrench_resistance" || s == "wr") return MetricKind::WrenchResistance;
    if (s == "robust_wrench_resistance" || s == "rwr") return MetricKind::RobustWrenchResistance;
    throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

QualityFn make_cloud_metric(MetricKind kind, std::vector<Vec3> cloud, const MetricParams& params)
{
    if (cloud.empty()) throw std::invalid_argument("point cloud is empty");
    auto pts = std::make_shared<const std::vector<Vec3>>(std::move(cloud));
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : *pts) centroid += p;
    centroid /= static_cast<double>(pts->size());
    switch (kind) {
    case MetricKind::Planarity:
        return [pts, params](const SuctionGrasp& g) {
            return planarity_score(disc_points(*pts, g, params.disc_radius));
        };
    case MetricKind::Centroid:
        return [centroid](const SuctionGrasp& g) { return centroid_score(g.point, centroid); };
    case MetricKind::PlanarityCentroid:
        return [pts, centroid, params](const SuctionGrasp& g) {
            return planarity_centroid_score(disc_points(*pts, g, params.disc_radius), g.point, centroid,
                                            params.planarity_threshold);
        };
    default:
        throw std::invalid_argument("metric '" + std::string(to_string(kind)) + "' needs a mesh");
    }
}

QualityFn make_mesh_metric(MetricKind kind, const Mesh& mesh, const EvaluationOptions& options,
                           const PerturbationSpec& spec, const Vec3& gravity_direction, const MetricParams& params)
{
    const Mesh* m = &mesh;
    const GraspScene scene{m, gravity_direction};
    switch (kind) {
    case MetricKind::Planarity:
        return [m, params](const SuctionGrasp& g) {
            return planarity_score(mesh_disc_points(*m, g, params.disc_radius, params.mesh_disc_grid));
        };
    case MetricKind::Centroid:
        return [m](const SuctionGrasp& g) { return centroid_score(g.point, m->center_of_mass()); };
    case MetricKind::PlanarityCentroid:
    case MetricKind::PC3D:
        return [m, params](const SuctionGrasp& g) {
            return planarity_centroid_score(mesh_disc_points(*m, g, params.disc_radius, params.mesh_disc_grid),
                                            g.point, m->center_of_mass(), params.planarity_threshold);
        };
    case MetricKind::SpringStretch:
        return [m, &options](const SuctionGrasp& g) {
            return spring_stretch_score(spring_stretch_metric(options.cup, g, *m, options.seal));
        };
    case MetricKind::WrenchResistance:
        return [scene, &options, &spec](const SuctionGrasp& g) {
            return wrench_resistance_metric(options, scene, g, spec) ? 1.0 : 0.0;
        };
    case MetricKind::RobustWrenchResistance:
        return [scene, &options, &spec, params](const SuctionGrasp& g) {
            return robust_wrench_resistance(options, scene, g, spec, params.seed).lambda;
        };
    }
    throw std::invalid_argument("unknown metric");
}

}  // namespace suction
