#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "suction/mesh.hpp"

namespace suction {

struct HullError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Convex hull of a point set with coplanar triangles merged into facets.
class ConvexHull {
public:
    struct Facet {
        Vec3 normal;            // outward unit normal
        double offset = 0.0;    // normal . x = offset on the plane
        std::vector<int> triangles;
        std::vector<int> neighbors;  // adjacent facet ids
    };

    /// Throws HullError when the points are (nearly) coplanar.
    explicit ConvexHull(std::span<const Vec3> points);

    const std::vector<Vec3>& points() const { return points_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Facet>& facets() const { return facets_; }

    /// Facet id owning each hull triangle.
    int facet_of(int triangle) const { return facet_of_[triangle]; }
    /// Facet across the undirected edge (a, b) of the given facet, or -1.
    int facet_across(int facet, int a, int b) const;

    /// Solid angle subtended by a facet as seen from `from`.
    double solid_angle(int facet, const Vec3& from) const;

    /// Whether the orthogonal projection of `point` onto the facet plane falls inside it.
    bool projects_inside(int facet, const Vec3& point, double tol = 1e-12) const;

private:
    std::vector<Vec3> points_;
    std::vector<Triangle> triangles_;
    std::vector<int> facet_of_;
    std::vector<Facet> facets_;
};

struct StablePose {
    RigidTransform transform;  // object frame -> table frame (table is z = 0)
    int support_facet = -1;
    Vec3 facet_normal;         // outward normal of the support facet, object frame
    double probability = 0.0;
};

/// Resting poses on a horizontal table. Facets whose interior contains the
/// centre-of-mass projection are stable; an unstable facet's solid angle is
/// credited to the facet it topples onto. Sorted by descending probability.
std::vector<StablePose> stable_poses(const Mesh& mesh);

/// Rotation taking `normal` to -z (minimal rotation).
Mat3 rotation_to_down(const Vec3& normal);

}  // namespace suction
