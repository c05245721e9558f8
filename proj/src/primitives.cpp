#include "suction/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace suction::primitives {

Mesh box(const Vec3& extents, const Vec3& center)
{
    const Vec3 h = extents / 2.0;
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) {
        v.emplace_back(center.x() + ((i & 1) ? h.x() : -h.x()),
                       center.y() + ((i & 2) ? h.y() : -h.y()),
                       center.z() + ((i & 4) ? h.z() : -h.z()));
    }
    const std::vector<Triangle> t = {
        {0, 2, 1}, {1, 2, 3},  // -z
        {4, 5, 6}, {5, 7, 6},  // +z
        {0, 1, 4}, {1, 5, 4},  // -y
        {2, 6, 3}, {3, 6, 7},  // +y
        {0, 4, 2}, {2, 4, 6},  // -x
        {1, 3, 5}, {3, 7, 5},  // +x
    };
    return Mesh(std::move(v), t);
}

Mesh cylinder(double radius, double height, int segments)
{
    std::vector<Eigen::Vector2d> ring;
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * std::numbers::pi * i / segments;
        ring.emplace_back(radius * std::cos(a), radius * std::sin(a));
    }
    return extrude(ring, height);
}

Mesh icosphere(double radius, int subdivisions, const Vec3& center)
{
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& p : v) {
        p.normalize();
    }
    std::vector<Triangle> t = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) {
                return it->second;
            }
            v.push_back((v[a] + v[b]).normalized());
            const int idx = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Triangle> next;
        for (const auto& f : t) {
            const int a = mid(f[0], f[1]);
            const int b = mid(f[1], f[2]);
            const int c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        t = std::move(next);
    }
    for (auto& p : v) {
        p = center + radius * p;
    }
    return Mesh(std::move(v), std::move(t));
}

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

bool inside_triangle(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                     const Eigen::Vector2d& c)
{
    return cross2(b - a, p - a) >= 0.0 && cross2(c - b, p - b) >= 0.0 && cross2(a - c, p - c) >= 0.0;
}

// Ear clipping for a simple counter-clockwise polygon.
std::vector<Triangle> triangulate(const std::vector<Eigen::Vector2d>& poly)
{
    std::vector<int> idx(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        idx[i] = static_cast<int>(i);
    }
    std::vector<Triangle> out;
    int guard = 0;
    while (idx.size() > 3) {
        const int n = static_cast<int>(idx.size());
        bool clipped = false;
        for (int i = 0; i < n; ++i) {
            const int a = idx[(i + n - 1) % n];
            const int b = idx[i];
            const int c = idx[(i + 1) % n];
            if (cross2(poly[b] - poly[a], poly[c] - poly[b]) <= 0.0) {
                continue;
            }
            bool ear = true;
            for (int k : idx) {
                if (k != a && k != b && k != c && inside_triangle(poly[k], poly[a], poly[b], poly[c])) {
                    ear = false;
                    break;
                }
            }
            if (ear) {
                out.push_back({a, b, c});
                idx.erase(idx.begin() + i);
                clipped = true;
                break;
            }
        }
        if (!clipped || ++guard > 100000) {
            throw std::invalid_argument("extrude: polygon is not simple and counter-clockwise");
        }
    }
    out.push_back({idx[0], idx[1], idx[2]});
    return out;
}

}  // namespace

Mesh extrude(const std::vector<Eigen::Vector2d>& polygon, double height)
{
    const int n = static_cast<int>(polygon.size());
    std::vector<Vec3> v;
    for (const auto& p : polygon) {
        v.emplace_back(p.x(), p.y(), 0.0);
    }
    for (const auto& p : polygon) {
        v.emplace_back(p.x(), p.y(), height);
    }
    std::vector<Triangle> t;
    for (const auto& f : triangulate(polygon)) {
        t.push_back({f[0], f[2], f[1]});              // bottom faces down
        t.push_back({f[0] + n, f[1] + n, f[2] + n});  // top faces up
    }
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        t.push_back({i, j, j + n});
        t.push_back({i, j + n, i + n});
    }
    return Mesh(std::move(v), std::move(t));
}

Mesh plate_with_hole(double side, double thickness, double hole_radius, int segments)
{
    // Rings of matching angular samples: inner circle and the outer square.
    std::vector<Vec3> v;
    const double h = side / 2.0;
    for (int layer = 0; layer < 2; ++layer) {
        const double z = layer == 0 ? -thickness : 0.0;
        for (int i = 0; i < segments; ++i) {
            const double a = 2.0 * std::numbers::pi * i / segments;
            v.emplace_back(hole_radius * std::cos(a), hole_radius * std::sin(a), z);
        }
        for (int i = 0; i < segments; ++i) {
            const double a = 2.0 * std::numbers::pi * i / segments;
            const double c = std::cos(a);
            const double s = std::sin(a);
            const double k = h / std::max(std::abs(c), std::abs(s));
            v.emplace_back(k * c, k * s, z);
        }
    }
    // Square corners must be present for a flat outer boundary.
    const int n = segments;
    auto inner = [&](int layer, int i) { return layer * 2 * n + (i % n); };
    auto outer = [&](int layer, int i) { return layer * 2 * n + n + (i % n); };
    std::vector<Triangle> t;
    for (int i = 0; i < n; ++i) {
        // top (z = 0), normal +z
        t.push_back({inner(1, i), outer(1, i), outer(1, i + 1)});
        t.push_back({inner(1, i), outer(1, i + 1), inner(1, i + 1)});
        // bottom, normal -z
        t.push_back({inner(0, i), outer(0, i + 1), outer(0, i)});
        t.push_back({inner(0, i), inner(0, i + 1), outer(0, i + 1)});
        // outer wall, normal outward
        t.push_back({outer(0, i), outer(0, i + 1), outer(1, i + 1)});
        t.push_back({outer(0, i), outer(1, i + 1), outer(1, i)});
        // hole wall, normal toward the axis
        t.push_back({inner(0, i), inner(1, i + 1), inner(0, i + 1)});
        t.push_back({inner(0, i), inner(1, i), inner(1, i + 1)});
    }
    return Mesh(std::move(v), std::move(t));
}

Mesh step_plate(double side, double thickness, double step_height, double step_x)
{
    // L-shaped profile in the xz-plane extruded along y.
    const double h = side / 2.0;
    const std::vector<Eigen::Vector2d> profile = {
        {-h, -thickness}, {h, -thickness}, {h, step_height}, {step_x, step_height}, {step_x, 0.0},
        {-h, 0.0},
    };
    Mesh m = extrude(profile, side);
    // Map (x, z_profile, y_extrusion) -> (x, y, z): rotate the extrusion axis onto -y... then center.
    Mat3 r;
    r << 1, 0, 0,
         0, 0, -1,
         0, 1, 0;
    return m.transformed(RigidTransform(r, Vec3(0.0, h, 0.0)));
}

Mesh tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
    return Mesh({a, b, c, d}, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}});
}

}  // namespace suction::primitives
