#pragma once

#include <optional>
#include <span>
#include <vector>

#include "suction/mesh.hpp"

namespace suction {

/// Bounding-volume hierarchy over triangles: median split on the longest
/// axis of the centroid bounds, at most kLeafSize triangles per leaf.
class Bvh {
public:
    static constexpr int kLeafSize = 4;

    Bvh(std::span<const Vec3> vertices, std::span<const Triangle> triangles);

    std::optional<RayHit> intersect(const Vec3& origin, const Vec3& direction,
                                    double min_distance = 1e-9) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        AlignedBox box;
        int left = -1;   // child index, or -1 for a leaf
        int right = -1;
        int first = 0;   // leaf range into order_
        int count = 0;
    };

    int build(int first, int count, std::vector<Vec3>& centroids);

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/// Moller-Trumbore; returns the ray parameter or nothing.
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& direction,
                                         const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace suction
