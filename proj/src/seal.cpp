#include "suction/seal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace suction {

void CupModel::validate() const
{
    if (n < 3) throw std::invalid_argument("cup.n must be at least 3");
    if (!(radius > 0.0)) throw std::invalid_argument("cup.radius must be positive");
    if (!(height > 0.0)) throw std::invalid_argument("cup.height must be positive");
    if (!(strain_limit > 0.0 && strain_limit < 1.0)) {
        throw std::invalid_argument("cup.strain_limit must lie in (0, 1)");
    }
}

double CupModel::perimeter_rest_length() const
{
    return 2.0 * radius * std::sin(std::numbers::pi / n);
}

double CupModel::cone_rest_length() const
{
    return std::hypot(radius, height);
}

double CupModel::flexion_rest_length() const
{
    return 2.0 * radius * std::sin(2.0 * std::numbers::pi / n);
}

std::string_view to_string(SealFailure f)
{
    switch (f) {
    case SealFailure::None: return "none";
    case SealFailure::Collision: return "collision";
    case SealFailure::Hole: return "hole";
    case SealFailure::VertexMiss: return "vertex_miss";
    case SealFailure::StrainExceeded: return "strain_exceeded";
    }
    return "unknown";
}

std::vector<double> CupState::strains() const
{
    std::vector<double> out;
    out.reserve(perimeter_rest.size() + cone_rest.size() + flexion_rest.size());
    auto push = [&](const std::vector<double>& rest, const std::vector<double>& cur) {
        for (std::size_t i = 0; i < rest.size(); ++i) {
            out.push_back(std::abs(cur[i] - rest[i]) / rest[i]);
        }
    };
    push(perimeter_rest, perimeter_current);
    push(cone_rest, cone_current);
    push(flexion_rest, flexion_current);
    return out;
}

namespace {

void refresh_lengths(CupState& s)
{
    const int n = static_cast<int>(s.base.size());
    for (int i = 0; i < n; ++i) {
        s.cone_current[i] = (s.base[i] - s.apex).norm();
        s.flexion_current[i] = (s.base[(i + 2) % n] - s.base[i]).norm();
        double len = 0.0;
        const auto& path = s.perimeter_paths[i];
        for (std::size_t k = 1; k < path.size(); ++k) {
            len += (path[k] - path[k - 1]).norm();
        }
        s.perimeter_current[i] = len;
    }
}

bool inside_ring(const std::vector<Eigen::Vector2d>& ring, const Eigen::Vector2d& q)
{
    const int n = static_cast<int>(ring.size());
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d e = ring[(i + 1) % n] - ring[i];
        const Eigen::Vector2d d = q - ring[i];
        if (e.x() * d.y() - e.y() * d.x() <= 0.0) {
            return false;
        }
    }
    return true;
}

}  // namespace

CupState init_cup(const CupModel& cup, const SuctionGrasp& grasp, const Mesh& mesh,
                  const SealSettings& settings)
{
    cup.validate();
    CupState s;
    s.axis = grasp.approach.normalized();
    Vec3 ref = settings.reference_axis - settings.reference_axis.dot(s.axis) * s.axis;
    if (ref.norm() < 1e-6) {
        ref = Vec3::UnitY() - s.axis.y() * s.axis;
    }
    s.ring_x = ref.normalized();
    s.ring_y = s.axis.cross(s.ring_x);

    const double extent = mesh.bounds().diagonal();
    const double standoff = extent + 2.0 * cup.height + cup.radius;
    s.apex = grasp.point - standoff * s.axis;
    s.base_center = s.apex + cup.height * s.axis;

    const int n = cup.n;
    for (int i = 0; i < n; ++i) {
        const double a = settings.ring_rotation + 2.0 * std::numbers::pi * i / n;
        s.base.push_back(s.base_center + cup.radius * (std::cos(a) * s.ring_x + std::sin(a) * s.ring_y));
    }
    for (int i = 0; i < n; ++i) {
        s.perimeter_paths.push_back({s.base[i], s.base[(i + 1) % n]});
    }
    s.perimeter_rest.assign(n, cup.perimeter_rest_length());
    s.cone_rest.assign(n, cup.cone_rest_length());
    s.flexion_rest.assign(n, cup.flexion_rest_length());
    s.perimeter_current.assign(n, 0.0);
    s.cone_current.assign(n, 0.0);
    s.flexion_current.assign(n, 0.0);
    refresh_lengths(s);
    return s;
}

ProjectionResult project_perimeter(const CupState& state, const Mesh& mesh, const SealSettings& settings)
{
    ProjectionResult result{state, SealFailure::None};
    CupState& s = result.state;
    const int n = static_cast<int>(s.base.size());
    const Vec3 dir = s.axis;

    // Offset every ray origin back by the same amount so already-projected
    // states project to themselves.
    const double back = mesh.bounds().diagonal() + (s.base_center - s.apex).norm() +
                        std::abs((s.base_center - mesh.bounds().center()).dot(dir));
    auto drop = [&](const Vec3& q) -> std::optional<Vec3> {
        const Vec3 lateral = q - (q - s.base_center).dot(dir) * dir;
        const auto hit = ray_intersect(mesh, lateral - back * dir, dir);
        if (!hit) return std::nullopt;
        return hit->point;
    };

    // A miss surrounded by surface in every lateral direction is a hole,
    // otherwise the ring runs off an edge.
    const double ring_radius = (state.base[0] - state.base_center).norm();
    const double reach = mesh.bounds().diagonal() + 2.0 * ring_radius;
    auto classify_miss = [&](const Vec3& q) {
        const double step = 0.25 * ring_radius;
        for (int k = 0; k < 8; ++k) {
            const double a = std::numbers::pi * k / 4.0;
            const Vec3 d = std::cos(a) * s.ring_x + std::sin(a) * s.ring_y;
            bool enclosed = false;
            for (double t = step; t <= reach; t += step) {
                if (drop(q + t * d)) {
                    enclosed = true;
                    break;
                }
            }
            if (!enclosed) return SealFailure::VertexMiss;
        }
        return SealFailure::Hole;
    };

    const std::vector<Vec3> flat(s.base.begin(), s.base.end());
    for (int i = 0; i < n; ++i) {
        const auto hit = drop(flat[i]);
        if (!hit) {
            result.failure = classify_miss(flat[i]);
            return result;
        }
        s.base[i] = *hit;
    }
    const int m = std::max(settings.samples_per_spring, 0);
    for (int i = 0; i < n; ++i) {
        const Vec3& a = flat[i];
        const Vec3& b = flat[(i + 1) % n];
        auto& path = s.perimeter_paths[i];
        path.clear();
        path.push_back(s.base[i]);
        for (int k = 1; k <= m; ++k) {
            const Vec3 q = a + (b - a) * (static_cast<double>(k) / (m + 1));
            const auto hit = drop(q);
            if (!hit) {
                result.failure = classify_miss(q);
                return result;
            }
            path.push_back(*hit);
        }
        path.push_back(s.base[(i + 1) % n]);
    }

    // Interior grid inside the ring polygon.
    std::vector<Eigen::Vector2d> ring;
    for (const auto& v : flat) {
        const Vec3 d = v - s.base_center;
        ring.emplace_back(d.dot(s.ring_x), d.dot(s.ring_y));
    }
    const double radius = ring.front().norm();
    const int g = std::max(settings.hole_grid, 1);
    for (int iy = 0; iy < g; ++iy) {
        for (int ix = 0; ix < g; ++ix) {
            const Eigen::Vector2d q(radius * (-1.0 + (2.0 * ix + 1.0) / g),
                                    radius * (-1.0 + (2.0 * iy + 1.0) / g));
            if (!inside_ring(ring, q)) continue;
            if (!drop(s.base_center + q.x() * s.ring_x + q.y() * s.ring_y)) {
                result.failure = SealFailure::Hole;
                return result;
            }
        }
    }
    refresh_lengths(s);
    return result;
}

double apex_distance(const std::vector<Vec3>& base, const SuctionGrasp& grasp, double height)
{
    double mean = 0.0;
    for (const auto& v : base) {
        mean += (v - grasp.point).dot(grasp.approach);
    }
    mean /= static_cast<double>(base.size());
    return std::min(mean - height, 0.0);
}

CupState place_apex(const CupState& state, const SuctionGrasp& grasp, const CupModel& cup)
{
    CupState s = state;
    s.apex = grasp.point + apex_distance(s.base, grasp, cup.height) * grasp.approach;
    refresh_lengths(s);
    return s;
}

bool cone_collides(const CupState& undeformed, const CupState& contact, const Mesh& mesh,
                   const SealSettings& settings)
{
    static constexpr double kBary[4][3] = {
        {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
        {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
        {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
    };
    const Vec3 dir = undeformed.axis;
    const int n = static_cast<int>(undeformed.base.size());
    const int steps = std::max(settings.collision_steps, 1);
    const double tol = 1e-9;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        for (const auto& w : kBary) {
            const Vec3 start = w[0] * undeformed.apex + w[1] * undeformed.base[i] + w[2] * undeformed.base[j];
            const Vec3 end = w[0] * contact.apex + w[1] * contact.base[i] + w[2] * contact.base[j];
            const double travel = (end - start).dot(dir);
            // Every vertex moves along the axis, so the sample keeps its lateral position.
            const auto hit = ray_intersect(mesh, start, dir);
            if (!hit) continue;
            for (int k = 1; k <= steps; ++k) {
                if (travel * k / steps > hit->distance + tol) {
                    return true;
                }
            }
        }
    }
    return false;
}

SealResult check_seal(const CupModel& cup, const SuctionGrasp& grasp, const Mesh& mesh,
                      const SealSettings& settings)
{
    SealResult result;
    const SuctionGrasp g{grasp.point, grasp.approach.normalized()};
    const CupState initial = init_cup(cup, g, mesh, settings);
    auto projected = project_perimeter(initial, mesh, settings);
    if (!projected.ok()) {
        result.failure = projected.failure;
        result.max_strain = std::numeric_limits<double>::infinity();
        return result;
    }
    CupState contact = place_apex(projected.state, g, cup);
    result.per_spring_strains = contact.strains();
    result.max_strain = *std::max_element(result.per_spring_strains.begin(), result.per_spring_strains.end());
    if (cone_collides(initial, contact, mesh, settings)) {
        result.failure = SealFailure::Collision;
    } else if (result.max_strain > cup.strain_limit) {
        result.failure = SealFailure::StrainExceeded;
    }
    result.feasible = result.failure == SealFailure::None;
    result.contact_state = std::move(contact);
    return result;
}

double spring_stretch_metric(const CupModel& cup, const SuctionGrasp& grasp, const Mesh& mesh,
                             const SealSettings& settings)
{
    const SealResult r = check_seal(cup, grasp, mesh, settings);
    if (r.failure == SealFailure::None || r.failure == SealFailure::StrainExceeded) {
        return r.max_strain;
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace suction
