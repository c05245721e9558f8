#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "suction/bvh.hpp"
#include "suction/mesh.hpp"
#include "suction/primitives.hpp"
#include "suction/rng.hpp"
#include "suction/stable_pose.hpp"
#include "suction/transform.hpp"

using namespace suction;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& contents)
{
    const fs::path dir = fs::temp_directory_path() / "suction_geometry_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << contents;
    return p;
}

const char* kUnitCubeObj = R"(v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
)";

std::optional<RayHit> brute_force(const Mesh& m, const Vec3& o, const Vec3& d)
{
    std::optional<RayHit> best;
    for (int t = 0; t < static_cast<int>(m.triangles().size()); ++t) {
        const auto s = intersect_triangle(o, d, m.vertex(t, 0), m.vertex(t, 1), m.vertex(t, 2));
        if (s && *s > 1e-9 && (!best || *s < best->distance)) {
            best = RayHit{o + *s * d, t, *s};
        }
    }
    return best;
}

Vec3 random_unit(Rng& rng)
{
    std::normal_distribution<double> n;
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

RigidTransform random_pose(Rng& rng)
{
    std::normal_distribution<double> n;
    return RigidTransform(so3_exp(Vec3(n(rng), n(rng), n(rng))), Vec3(n(rng), n(rng), n(rng)));
}

}  // namespace

TEST_CASE("unit cube OBJ loads with centred COM")
{
    const Mesh m = load_mesh(temp_file("cube.obj", kUnitCubeObj));
    CHECK(m.vertices().size() == 8);
    CHECK(m.triangles().size() == 12);
    CHECK(m.watertight());
    CHECK((m.center_of_mass() - Vec3(0.5, 0.5, 0.5)).norm() < 1e-12);
    CHECK(m.volume() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single triangle is not watertight")
{
    const Mesh m = load_mesh(temp_file("tri.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"));
    CHECK_FALSE(m.watertight());
}

TEST_CASE("tetrahedron COM is the vertex average")
{
    const Mesh m = primitives::tetrahedron(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1));
    CHECK((m.center_of_mass() - Vec3(0.25, 0.25, 0.25)).norm() < 1e-12);
    CHECK(m.volume() == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("inverted winding is flipped outward")
{
    std::string flipped;
    std::istringstream in(kUnitCubeObj);
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("f ", 0) == 0) {
            int a, b, c;
            std::sscanf(line.c_str(), "f %d %d %d", &a, &b, &c);
            line = "f " + std::to_string(a) + " " + std::to_string(c) + " " + std::to_string(b);
        }
        flipped += line + "\n";
    }
    const Mesh m = load_mesh(temp_file("flipped.obj", flipped));
    CHECK(m.volume() > 0.0);
    for (int t = 0; t < 12; ++t) {
        const Vec3 c = (m.vertex(t, 0) + m.vertex(t, 1) + m.vertex(t, 2)) / 3.0;
        CHECK(m.face_normal(t).dot(c - m.center_of_mass()) > 0.0);
    }
}

TEST_CASE("degenerate triangles are removed and counted")
{
    const std::string obj = std::string(kUnitCubeObj) + "f 1 1 2\n";
    const Mesh m = load_mesh(temp_file("degenerate.obj", obj));
    CHECK(m.degenerate_removed() == 1);
    CHECK(m.triangles().size() == 12);
}

TEST_CASE("malformed OBJ reports an error")
{
    CHECK_THROWS_AS(load_mesh(temp_file("bad.obj", "v 0 0 0\nf 1 2 3\n")), MeshLoadError);
    CHECK_THROWS_AS(load_mesh(temp_file("bad2.obj", "v 0 zero 0\n")), MeshLoadError);
    CHECK_THROWS(load_mesh("/nonexistent/file.obj"));
}

TEST_CASE("STL and OBJ round trip")
{
    const Mesh m = primitives::icosphere(0.03, 2);
    const fs::path dir = fs::temp_directory_path() / "suction_geometry_test";
    fs::create_directories(dir);
    save_stl(m, dir / "s.stl");
    save_obj(m, dir / "s.obj");
    const Mesh a = load_mesh(dir / "s.stl");
    const Mesh b = load_mesh(dir / "s.obj");
    CHECK(a.triangles().size() == m.triangles().size());
    CHECK(b.triangles().size() == m.triangles().size());
    CHECK(a.watertight());
    CHECK(b.volume() == doctest::Approx(m.volume()).epsilon(1e-9));
    CHECK((a.center_of_mass() - m.center_of_mass()).norm() < 1e-6);
}

TEST_CASE("load scale multiplies coordinates")
{
    const Mesh m = load_mesh(temp_file("cube_scaled.obj", kUnitCubeObj), 0.05);
    CHECK(m.bounds().extent().isApprox(Vec3::Constant(0.05), 1e-12));
}

TEST_CASE("axis-aligned ray hits the cube top")
{
    const Mesh m = load_mesh(temp_file("cube2.obj", kUnitCubeObj));
    const auto hit = ray_intersect(m, Vec3(0.5, 0.5, 2), Vec3(0, 0, -1));
    REQUIRE(hit);
    CHECK((hit->point - Vec3(0.5, 0.5, 1)).norm() < 1e-12);
    CHECK(hit->distance == doctest::Approx(1.0));
    CHECK_FALSE(ray_intersect(m, Vec3(-1, 0.5, 2), Vec3(1, 0, 0)));
}

TEST_CASE("BVH matches brute force on random rays")
{
    Rng rng(7);
    const std::vector<Mesh> meshes = {
        primitives::icosphere(0.05, 3),
        primitives::box(Vec3(0.1, 0.02, 0.05)),
        primitives::plate_with_hole(0.1, 0.01, 0.02),
        primitives::step_plate(0.1, 0.01, 0.005, 0.01),
        primitives::cylinder(0.03, 0.08, 40),
    };
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (const auto& m : meshes) {
        int hits = 0;
        for (int i = 0; i < 1000; ++i) {
            const Vec3 o(u(rng), u(rng), u(rng));
            const Vec3 target = m.center_of_mass() + 0.5 * Vec3(u(rng), u(rng), u(rng));
            const Vec3 d = (target - o).normalized();
            const auto a = ray_intersect(m, o, d);
            const auto b = brute_force(m, o, d);
            REQUIRE(a.has_value() == b.has_value());
            if (a) {
                ++hits;
                CHECK(a->distance == doctest::Approx(b->distance).epsilon(1e-12));
                CHECK((a->point - b->point).norm() < 1e-12);
            }
        }
        CHECK(hits > 100);
    }
}

TEST_CASE("surface samples are area uniform with inward normals")
{
    const Mesh m = primitives::box(Vec3(1, 1, 1));
    Rng rng(11);
    const auto samples = sample_surface(m, 60000, rng);
    REQUIRE(samples.size() == 60000);
    std::map<int, int> per_face;
    for (const auto& s : samples) {
        const Vec3 n = -s.inward_normal;
        int axis;
        n.cwiseAbs().maxCoeff(&axis);
        per_face[axis * 2 + (n(axis) > 0 ? 1 : 0)]++;
        CHECK(s.inward_normal.dot(m.center_of_mass() - s.point) > 0.0);
    }
    REQUIRE(per_face.size() == 6);
    const double sigma = std::sqrt(60000 * (1.0 / 6.0) * (5.0 / 6.0));
    for (const auto& [face, count] : per_face) {
        CHECK(std::abs(count - 10000) <= 3.0 * sigma);
    }
}

TEST_CASE("single sample on a triangle lies inside it")
{
    const Mesh m({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {Triangle{0, 1, 2}});
    Rng rng(3);
    const auto s = sample_surface(m, 1, rng);
    REQUIRE(s.size() == 1);
    CHECK(s[0].point.z() == doctest::Approx(0.0));
    CHECK(s[0].point.x() >= 0.0);
    CHECK(s[0].point.y() >= 0.0);
    CHECK(s[0].point.x() + s[0].point.y() <= 1.0 + 1e-12);
}

TEST_CASE("rigid transform validity and composition")
{
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const RigidTransform a = random_pose(rng);
        const RigidTransform b = random_pose(rng);
        CHECK(a.is_valid());
        CHECK((a.rotation().transpose() * a.rotation() - Mat3::Identity()).norm() < 1e-12);
        CHECK(a.rotation().determinant() == doctest::Approx(1.0).epsilon(1e-12));
        const Vec3 x(0.3, -0.2, 0.7);
        CHECK(((a * b).apply(x) - a.apply(b.apply(x))).norm() < 1e-12);
        CHECK((a.inverse().apply(a.apply(x)) - x).norm() < 1e-12);
    }
    CHECK(so3_exp(Vec3::Zero()).isApprox(Mat3::Identity()));
}

TEST_CASE("adjoint equals the directly transformed force-torque pair")
{
    Rng rng(9);
    std::normal_distribution<double> n;
    for (int i = 0; i < 200; ++i) {
        const RigidTransform g = random_pose(rng);
        const Vec3 f(n(rng), n(rng), n(rng));
        const Vec3 tau(n(rng), n(rng), n(rng));
        Wrench w;
        w << f, tau;
        const Vec3 f_parent = g.rotation() * f;
        const Vec3 tau_parent = g.rotation() * tau + g.translation().cross(f_parent);
        Wrench expected;
        expected << f_parent, tau_parent;
        const AdjointMap ad(g);
        CHECK((ad.apply(w) - expected).norm() < 1e-10);
        CHECK((ad.apply_inverse(ad.apply(w)) - w).norm() < 1e-10);
        CHECK(ad.matrix().topRightCorner<3, 3>().norm() == 0.0);
        Wrench pure_force;
        pure_force << f, Vec3::Zero();
        CHECK((ad.apply(pure_force).head<3>() - f_parent).norm() < 1e-12);
    }
}

namespace {

void check_pose_invariants(const Mesh& mesh, const std::vector<StablePose>& poses)
{
    double total = 0.0;
    for (const auto& p : poses) {
        total += p.probability;
        CHECK(p.transform.is_valid());
        const Mesh posed = mesh.transformed(p.transform);
        CHECK(std::abs(posed.bounds().min.z()) < 1e-9);
        // Facet normal points down and COM projects inside the support region.
        CHECK((p.transform.apply_direction(p.facet_normal) - Vec3(0, 0, -1)).norm() < 1e-9);
        const Vec3 com = posed.center_of_mass();
        std::vector<Eigen::Vector2d> support;
        for (const auto& v : posed.vertices()) {
            if (std::abs(v.z()) < 1e-9) support.emplace_back(v.x(), v.y());
        }
        REQUIRE(support.size() >= 3);
        // COM inside the convex hull of the contact points (angular sweep test).
        const Eigen::Vector2d c(com.x(), com.y());
        double min_side = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < support.size(); ++i) {
            for (std::size_t j = 0; j < support.size(); ++j) {
                if (i == j) continue;
                const Eigen::Vector2d e = support[j] - support[i];
                bool all_left = true;
                for (const auto& q : support) {
                    const Eigen::Vector2d d = q - support[i];
                    if (e.x() * d.y() - e.y() * d.x() < -1e-12) all_left = false;
                }
                if (all_left && e.norm() > 0) {
                    const Eigen::Vector2d d = c - support[i];
                    min_side = std::min(min_side, (e.x() * d.y() - e.y() * d.x()) / e.norm());
                }
            }
        }
        CHECK(min_side > 0.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

/// Monte Carlo settling for a convex prism extruded along z: a random drop
/// direction from the COM picks the first facet, side facets then roll over
/// polygon vertices until the COM projection lies on the resting edge.
std::map<int, double> prism_settle_oracle(const std::vector<Eigen::Vector2d>& poly, double height, int draws,
                                          Rng& rng)
{
    const int k = static_cast<int>(poly.size());
    Eigen::Vector2d c2 = Eigen::Vector2d::Zero();
    double area = 0.0;
    for (int i = 0; i < k; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % k];
        const double cr = a.x() * b.y() - b.x() * a.y();
        area += cr / 2.0;
        c2 += (a + b) * cr / 6.0;
    }
    c2 /= area;
    const Vec3 com(c2.x(), c2.y(), height / 2.0);
    std::map<int, double> counts;  // 0..k-1 sides, k bottom, k+1 top
    for (int n = 0; n < draws; ++n) {
        const Vec3 d = random_unit(rng);
        // Ray from COM: which face does it leave through?
        double best = std::numeric_limits<double>::infinity();
        int face = -1;
        if (d.z() < 0) {
            best = (0.0 - com.z()) / d.z();
            face = k;
        } else if (d.z() > 0) {
            best = (height - com.z()) / d.z();
            face = k + 1;
        }
        for (int i = 0; i < k; ++i) {
            const Eigen::Vector2d e = poly[(i + 1) % k] - poly[i];
            const Eigen::Vector2d outward(e.y(), -e.x());
            const double den = outward.x() * d.x() + outward.y() * d.y();
            if (den <= 0) continue;
            const double t = outward.dot(poly[i] - c2) / den;
            if (t < best) {
                best = t;
                face = i;
            }
        }
        if (face < k) {
            // Roll: while the COM projects past an end vertex of the edge, tip over it.
            for (int guard = 0; guard < 4 * k; ++guard) {
                const Eigen::Vector2d a = poly[face];
                const Eigen::Vector2d b = poly[(face + 1) % k];
                const double s = (c2 - a).dot(b - a) / (b - a).squaredNorm();
                if (s < 0.0) {
                    face = (face + k - 1) % k;
                } else if (s > 1.0) {
                    face = (face + 1) % k;
                } else {
                    break;
                }
            }
        }
        counts[face] += 1.0 / draws;
    }
    return counts;
}

}  // namespace

TEST_CASE("unit cube has six equiprobable poses")
{
    const Mesh m = primitives::box(Vec3(1, 1, 1), Vec3(0.5, 0.5, 0.5));
    const auto poses = stable_poses(m);
    REQUIRE(poses.size() == 6);
    for (const auto& p : poses) CHECK(p.probability == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    check_pose_invariants(m, poses);
}

TEST_CASE("tall box favours the side facets and matches the settling oracle")
{
    const Mesh m = primitives::box(Vec3(0.01, 0.01, 0.1));
    const auto poses = stable_poses(m);
    REQUIRE(poses.size() == 6);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(poses[i].facet_normal.z()) < 1e-9);
    for (int i = 4; i < 6; ++i) CHECK(std::abs(poses[i].facet_normal.z()) == doctest::Approx(1.0));
    CHECK(poses[3].probability > poses[4].probability);
    check_pose_invariants(m, poses);

    const std::vector<Eigen::Vector2d> square = {{-0.005, -0.005}, {0.005, -0.005}, {0.005, 0.005}, {-0.005, 0.005}};
    Rng rng(21);
    const auto oracle = prism_settle_oracle(square, 0.1, 40000, rng);
    const double end_oracle = oracle.at(4) + oracle.at(5);
    const double end_pose = poses[4].probability + poses[5].probability;
    CHECK(std::abs(end_pose - end_oracle) < 0.01);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(poses[i].probability - oracle.at(i)) < 0.015);
}

TEST_CASE("leaning prism topples onto neighbours as the oracle predicts")
{
    const std::vector<Eigen::Vector2d> poly = {{0.0, 0.0}, {0.02, 0.0}, {0.08, 0.06}, {0.06, 0.06}};
    const double height = 0.03;
    const Mesh m = primitives::extrude(poly, height);
    const auto poses = stable_poses(m);
    check_pose_invariants(m, poses);
    Rng rng(33);
    const auto oracle = prism_settle_oracle(poly, height, 60000, rng);
    const int k = static_cast<int>(poly.size());
    for (const auto& [face, prob] : oracle) {
        Vec3 normal;
        if (face == k) {
            normal = Vec3(0, 0, -1);
        } else if (face == k + 1) {
            normal = Vec3(0, 0, 1);
        } else {
            const Eigen::Vector2d e = poly[(face + 1) % k] - poly[face];
            normal = Vec3(e.y(), -e.x(), 0).normalized();
        }
        double found = 0.0;
        for (const auto& p : poses) {
            if ((p.facet_normal - normal).norm() < 1e-6) found = p.probability;
        }
        CHECK(std::abs(found - prob) < 0.015);
    }
    // The short base edge cannot hold the COM.
    for (const auto& p : poses) CHECK((p.facet_normal - Vec3(0, -1, 0)).norm() > 1e-6);
}

TEST_CASE("icosphere facets are all stable and near uniform")
{
    const Mesh m = primitives::icosphere(0.05, 2);
    const auto poses = stable_poses(m);
    CHECK(poses.size() == m.triangles().size());
    double lo = 1.0, hi = 0.0;
    for (const auto& p : poses) {
        lo = std::min(lo, p.probability);
        hi = std::max(hi, p.probability);
    }
    const double uniform = 1.0 / static_cast<double>(poses.size());
    CHECK(lo > 0.6 * uniform);
    CHECK(hi < 1.6 * uniform);
    check_pose_invariants(m, poses);
}

TEST_CASE("stable poses of a random convex point cloud hull")
{
    Rng rng(41);
    std::vector<Vec3> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(0.05 * random_unit(rng));
    const ConvexHull hull(pts);
    for (const auto& f : hull.facets()) {
        for (const auto& p : pts) CHECK(f.normal.dot(p) <= f.offset + 1e-12);
    }
    double total = 0.0;
    for (int f = 0; f < static_cast<int>(hull.facets().size()); ++f) total += hull.solid_angle(f, Vec3::Zero());
    CHECK(total == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-9));
    CHECK_THROWS_AS(ConvexHull(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)}),
                    HullError);
}

TEST_CASE("rays through shared edges do not slip between triangles")
{
    Rng rng(45);
    std::normal_distribution<double> n;
    const Mesh cyl = primitives::cylinder(0.02, 0.05, 32);
    for (int k = 0; k < 200; ++k) {
        const RigidTransform t(so3_exp(Vec3(n(rng), n(rng), n(rng))), 0.1 * Vec3(n(rng), n(rng), n(rng)));
        const Mesh m = cyl.transformed(t);
        // Seam vertex of segment k at mid height, approached from outside along -radial.
        const double a = 2.0 * std::numbers::pi * (k % 32) / 32.0;
        const Vec3 target(0.02 * std::cos(a), 0.02 * std::sin(a), 0.025);
        const Vec3 dir = t.apply_direction(-Vec3(std::cos(a), std::sin(a), 0.0));
        const auto hit = ray_intersect(m, t.apply(target) - 0.5 * dir, dir);
        REQUIRE(hit);
        CHECK(hit->distance == doctest::Approx(0.5).epsilon(1e-9));
    }
}
