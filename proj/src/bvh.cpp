#include "suction/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace suction {

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& direction,
                                         const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = direction.cross(e2);
    const double det = e1.dot(pvec);
    if (std::abs(det) < 1e-300) {
        return std::nullopt;
    }
    const double inv = 1.0 / det;
    const Vec3 tvec = origin - a;
    // Barycentric slack closes cracks along shared edges.
    constexpr double kSlack = 1e-10;
    const double u = tvec.dot(pvec) * inv;
    if (u < -kSlack || u > 1.0 + kSlack) {
        return std::nullopt;
    }
    const Vec3 qvec = tvec.cross(e1);
    const double v = direction.dot(qvec) * inv;
    if (v < -kSlack || u + v > 1.0 + kSlack) {
        return std::nullopt;
    }
    return e2.dot(qvec) * inv;
}

namespace {

bool slab_test(const AlignedBox& box, const Vec3& origin, const Vec3& inv_dir, double t_max)
{
    double t0 = 0.0;
    double t1 = t_max;
    for (int k = 0; k < 3; ++k) {
        double near = (box.min[k] - origin[k]) * inv_dir[k];
        double far = (box.max[k] - origin[k]) * inv_dir[k];
        if (std::isnan(near) || std::isnan(far)) {
            // origin on the slab plane with a parallel ray
            if (origin[k] < box.min[k] || origin[k] > box.max[k]) {
                return false;
            }
            continue;
        }
        if (near > far) {
            std::swap(near, far);
        }
        // Conservative rounding so boxes never reject grazing rays.
        far *= 1.0 + 1e-12;
        t0 = std::max(t0, near);
        t1 = std::min(t1, far);
        if (t0 > t1) {
            return false;
        }
    }
    return true;
}

}  // namespace

Bvh::Bvh(std::span<const Vec3> vertices, std::span<const Triangle> triangles)
    : vertices_(vertices.begin(), vertices.end()), triangles_(triangles.begin(), triangles.end())
{
    const int n = static_cast<int>(triangles_.size());
    order_.resize(n);
    std::vector<Vec3> centroids(n);
    for (int i = 0; i < n; ++i) {
        order_[i] = i;
        const auto& t = triangles_[i];
        centroids[i] = (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
    }
    if (n > 0) {
        nodes_.reserve(2 * (n / kLeafSize + 1));
        build(0, n, centroids);
    }
}

int Bvh::build(int first, int count, std::vector<Vec3>& centroids)
{
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    AlignedBox box;
    AlignedBox centroid_box;
    for (int i = first; i < first + count; ++i) {
        const auto& t = triangles_[order_[i]];
        for (int c = 0; c < 3; ++c) {
            box.extend(vertices_[t[c]]);
        }
        centroid_box.extend(centroids[order_[i]]);
    }
    nodes_[index].box = box;
    if (count <= kLeafSize) {
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }
    int axis = 0;
    centroid_box.extent().maxCoeff(&axis);
    const int half = count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + first + half,
                     order_.begin() + first + count, [&](int a, int b) {
                         if (centroids[a][axis] != centroids[b][axis]) {
                             return centroids[a][axis] < centroids[b][axis];
                         }
                         return a < b;
                     });
    const int left = build(first, half, centroids);
    const int right = build(first + half, count - half, centroids);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

std::optional<RayHit> Bvh::intersect(const Vec3& origin, const Vec3& direction,
                                     double min_distance) const
{
    if (nodes_.empty()) {
        return std::nullopt;
    }
    const Vec3 inv_dir = direction.cwiseInverse();
    double best = std::numeric_limits<double>::infinity();
    int best_tri = -1;

    std::array<int, 64> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!slab_test(node.box, origin, inv_dir, best)) {
            continue;
        }
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const auto& t = triangles_[order_[i]];
                const auto hit = intersect_triangle(origin, direction, vertices_[t[0]],
                                                    vertices_[t[1]], vertices_[t[2]]);
                if (hit && *hit > min_distance && *hit < best) {
                    best = *hit;
                    best_tri = order_[i];
                }
            }
            continue;
        }
        stack[top++] = node.left;
        stack[top++] = node.right;
    }
    if (best_tri < 0) {
        return std::nullopt;
    }
    return RayHit{origin + best * direction, best_tri, best};
}

}  // namespace suction
