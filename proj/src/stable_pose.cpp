#include "suction/stable_pose.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

namespace suction {

namespace {

struct HullFace {
    Triangle v;
    Vec3 normal;
    double offset;
    bool alive = true;
};

HullFace make_face(const std::vector<Vec3>& p, int a, int b, int c)
{
    HullFace f;
    f.v = {a, b, c};
    f.normal = (p[b] - p[a]).cross(p[c] - p[a]).normalized();
    f.offset = f.normal.dot(p[a]);
    return f;
}

int find_root(std::vector<int>& parent, int i)
{
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

}  // namespace

ConvexHull::ConvexHull(std::span<const Vec3> input)
{
    // Deduplicate exactly-equal points.
    std::vector<Vec3> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
        return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 4) {
        throw HullError("convex hull needs at least 4 distinct points");
    }
    AlignedBox box;
    for (const auto& p : pts) {
        box.extend(p);
    }
    const double scale = std::max(box.diagonal(), 1e-300);
    const double eps = 1e-10 * scale;

    // Initial tetrahedron from extreme points.
    int i0 = 0;
    int i1 = 0;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        if (pts[i].x() < pts[i0].x()) i0 = i;
        if (pts[i].x() > pts[i1].x()) i1 = i;
    }
    if (i0 == i1) {
        i1 = (i0 + 1) % static_cast<int>(pts.size());
    }
    const Vec3 axis = (pts[i1] - pts[i0]).normalized();
    int i2 = -1;
    double best = eps;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        const Vec3 d = pts[i] - pts[i0];
        const double dist = (d - d.dot(axis) * axis).norm();
        if (dist > best) {
            best = dist;
            i2 = i;
        }
    }
    if (i2 < 0) {
        throw HullError("points are collinear");
    }
    const Vec3 plane_n = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
    int i3 = -1;
    best = 1e-7 * scale;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        const double dist = std::abs(plane_n.dot(pts[i] - pts[i0]));
        if (dist > best) {
            best = dist;
            i3 = i;
        }
    }
    if (i3 < 0) {
        throw HullError("points are coplanar");
    }

    std::vector<HullFace> faces;
    const Vec3 inner = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    auto add_face = [&](int a, int b, int c) {
        HullFace f = make_face(pts, a, b, c);
        if (f.normal.dot(inner) - f.offset > 0.0) {
            f = make_face(pts, a, c, b);
        }
        faces.push_back(f);
    };
    add_face(i0, i1, i2);
    add_face(i0, i1, i3);
    add_face(i0, i2, i3);
    add_face(i1, i2, i3);

    for (int pi = 0; pi < static_cast<int>(pts.size()); ++pi) {
        if (pi == i0 || pi == i1 || pi == i2 || pi == i3) {
            continue;
        }
        const Vec3& p = pts[pi];
        std::vector<int> visible;
        for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
            if (faces[f].alive && faces[f].normal.dot(p) - faces[f].offset > eps) {
                visible.push_back(f);
            }
        }
        if (visible.empty()) {
            continue;
        }
        std::set<std::pair<int, int>> edges;
        for (int f : visible) {
            for (int k = 0; k < 3; ++k) {
                edges.emplace(faces[f].v[k], faces[f].v[(k + 1) % 3]);
            }
        }
        for (int f : visible) {
            faces[f].alive = false;
        }
        for (const auto& [a, b] : edges) {
            if (!edges.count({b, a})) {
                faces.push_back(make_face(pts, a, b, pi));
            }
        }
    }

    // Compact: keep only referenced points.
    std::map<int, int> remap;
    for (const auto& f : faces) {
        if (!f.alive) continue;
        Triangle t{};
        for (int k = 0; k < 3; ++k) {
            auto [it, inserted] = remap.try_emplace(f.v[k], static_cast<int>(points_.size()));
            if (inserted) {
                points_.push_back(pts[f.v[k]]);
            }
            t[k] = it->second;
        }
        triangles_.push_back(t);
    }

    // Merge coplanar neighbours into facets.
    const int nt = static_cast<int>(triangles_.size());
    std::vector<Vec3> normals(nt);
    std::vector<double> offsets(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = triangles_[t];
        normals[t] = (points_[tri[1]] - points_[tri[0]]).cross(points_[tri[2]] - points_[tri[0]]).normalized();
        offsets[t] = normals[t].dot(points_[tri[0]]);
    }
    std::map<std::pair<int, int>, int> edge_owner;
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            edge_owner[{triangles_[t][k], triangles_[t][(k + 1) % 3]}] = t;
        }
    }
    std::vector<int> parent(nt);
    std::iota(parent.begin(), parent.end(), 0);
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            const auto it = edge_owner.find({triangles_[t][(k + 1) % 3], triangles_[t][k]});
            if (it == edge_owner.end()) continue;
            const int o = it->second;
            if (normals[t].dot(normals[o]) > 1.0 - 1e-9 && std::abs(offsets[t] - offsets[o]) < 1e-9 * scale) {
                parent[find_root(parent, t)] = find_root(parent, o);
            }
        }
    }
    std::map<int, int> facet_index;
    facet_of_.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const int root = find_root(parent, t);
        auto [it, inserted] = facet_index.try_emplace(root, static_cast<int>(facets_.size()));
        if (inserted) {
            facets_.emplace_back();
        }
        facet_of_[t] = it->second;
        facets_[it->second].triangles.push_back(t);
    }
    for (auto& facet : facets_) {
        Vec3 n = Vec3::Zero();
        for (int t : facet.triangles) {
            const auto& tri = triangles_[t];
            n += (points_[tri[1]] - points_[tri[0]]).cross(points_[tri[2]] - points_[tri[0]]);
        }
        facet.normal = n.normalized();
        double off = 0.0;
        for (int t : facet.triangles) {
            for (int k = 0; k < 3; ++k) {
                off += facet.normal.dot(points_[triangles_[t][k]]);
            }
        }
        facet.offset = off / (3.0 * static_cast<double>(facet.triangles.size()));
    }
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            const auto it = edge_owner.find({triangles_[t][(k + 1) % 3], triangles_[t][k]});
            if (it == edge_owner.end()) continue;
            const int a = facet_of_[t];
            const int b = facet_of_[it->second];
            auto& nb = facets_[a].neighbors;
            if (a != b && std::find(nb.begin(), nb.end(), b) == nb.end()) {
                nb.push_back(b);
            }
        }
    }
}

int ConvexHull::facet_across(int facet, int a, int b) const
{
    for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
        if (facet_of_[t] == facet) continue;
        const auto& tri = triangles_[t];
        for (int k = 0; k < 3; ++k) {
            const int u = tri[k];
            const int v = tri[(k + 1) % 3];
            if ((u == a && v == b) || (u == b && v == a)) {
                return facet_of_[t];
            }
        }
    }
    return -1;
}

double ConvexHull::solid_angle(int facet, const Vec3& from) const
{
    double total = 0.0;
    for (int t : facets_[facet].triangles) {
        const auto& tri = triangles_[t];
        const Vec3 a = points_[tri[0]] - from;
        const Vec3 b = points_[tri[1]] - from;
        const Vec3 c = points_[tri[2]] - from;
        const double la = a.norm();
        const double lb = b.norm();
        const double lc = c.norm();
        const double num = a.dot(b.cross(c));
        const double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
        total += 2.0 * std::atan2(std::abs(num), den);
    }
    return total;
}

bool ConvexHull::projects_inside(int facet, const Vec3& point, double tol) const
{
    const Facet& f = facets_[facet];
    const Vec3 q = point - (f.normal.dot(point) - f.offset) * f.normal;
    for (int t : f.triangles) {
        const auto& tri = triangles_[t];
        bool inside = true;
        for (int k = 0; k < 3 && inside; ++k) {
            const Vec3& a = points_[tri[k]];
            const Vec3& b = points_[tri[(k + 1) % 3]];
            const Vec3 edge = b - a;
            inside = f.normal.dot(edge.cross(q - a)) >= -tol * edge.norm();
        }
        if (inside) {
            return true;
        }
    }
    return false;
}

Mat3 rotation_to_down(const Vec3& normal)
{
    const Vec3 down(0.0, 0.0, -1.0);
    const Vec3 n = normal.normalized();
    if (n.dot(down) < -1.0 + 1e-12) {
        return Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()).toRotationMatrix();
    }
    return Eigen::Quaterniond::FromTwoVectors(n, down).toRotationMatrix();
}

namespace {

// Facet that an unstable facet topples onto: across the boundary edge nearest
// to the centre-of-mass projection among edges that have it on their outer side.
int topple_target(const ConvexHull& hull, int facet, const Vec3& com)
{
    const auto& f = hull.facets()[facet];
    const Vec3 q = com - (f.normal.dot(com) - f.offset) * f.normal;
    std::set<std::pair<int, int>> directed;
    for (int t : f.triangles) {
        const auto& tri = hull.triangles()[t];
        for (int k = 0; k < 3; ++k) {
            directed.emplace(tri[k], tri[(k + 1) % 3]);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    int target = -1;
    for (const auto& [a, b] : directed) {
        if (directed.count({b, a})) continue;  // interior edge
        const Vec3& pa = hull.points()[a];
        const Vec3& pb = hull.points()[b];
        const Vec3 edge = pb - pa;
        const double side = f.normal.dot(edge.cross(q - pa));
        if (side >= 0.0) continue;
        const double s = std::clamp((q - pa).dot(edge) / edge.squaredNorm(), 0.0, 1.0);
        const double dist = (q - (pa + s * edge)).norm();
        if (dist < best) {
            best = dist;
            target = hull.facet_across(facet, a, b);
        }
    }
    return target;
}

}  // namespace

std::vector<StablePose> stable_poses(const Mesh& mesh)
{
    if (!mesh.watertight()) {
        throw HullError("stable_poses requires a watertight mesh");
    }
    const ConvexHull hull(mesh.vertices());
    const Vec3 com = mesh.center_of_mass();
    const int nf = static_cast<int>(hull.facets().size());
    const double scale = mesh.bounds().diagonal();

    std::vector<bool> stable(nf);
    for (int f = 0; f < nf; ++f) {
        stable[f] = hull.projects_inside(f, com, 1e-12 * scale);
    }
    std::vector<double> mass(nf, 0.0);
    for (int f = 0; f < nf; ++f) {
        int cur = f;
        for (int step = 0; step < nf && !stable[cur]; ++step) {
            const int next = topple_target(hull, cur, com);
            if (next < 0) break;
            cur = next;
        }
        if (stable[cur]) {
            mass[cur] += hull.solid_angle(f, com);
        }
    }
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);

    std::vector<StablePose> out;
    for (int f = 0; f < nf; ++f) {
        if (!stable[f] || mass[f] <= 0.0) continue;
        const Mat3 r = rotation_to_down(hull.facets()[f].normal);
        double min_z = std::numeric_limits<double>::infinity();
        for (const auto& v : mesh.vertices()) {
            min_z = std::min(min_z, (r * v).z());
        }
        const Vec3 c = r * com;
        StablePose pose;
        pose.transform = RigidTransform(r, Vec3(-c.x(), -c.y(), -min_z));
        pose.support_facet = f;
        pose.facet_normal = hull.facets()[f].normal;
        pose.probability = mass[f] / total;
        out.push_back(pose);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const StablePose& a, const StablePose& b) { return a.probability > b.probability; });
    return out;
}

}  // namespace suction
