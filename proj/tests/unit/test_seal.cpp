#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "suction/primitives.hpp"
#include "suction/rng.hpp"
#include "suction/seal.hpp"

using namespace suction;

namespace {

const CupModel kCup{};

Mesh plate(double side = 0.2, double thickness = 0.02)
{
    return primitives::box(Vec3(side, side, thickness), Vec3(0, 0, -thickness / 2));
}

Vec3 random_unit(Rng& rng)
{
    std::normal_distribution<double> n;
    return Vec3(n(rng), n(rng), n(rng)).normalized();
}

SealSettings settings_for(const RigidTransform& t, const Vec3& reference)
{
    SealSettings s;
    s.reference_axis = t.apply_direction(reference);
    return s;
}

}  // namespace

TEST_CASE("undeformed cup is a regular octagon at rest")
{
    const Mesh m = plate();
    const SuctionGrasp g{Vec3::Zero(), Vec3(0, 0, -1)};
    const CupState s = init_cup(kCup, g, m);
    REQUIRE(s.base.size() == 8);
    for (const auto& v : s.base) {
        CHECK((v - s.base_center).norm() == doctest::Approx(0.0075).epsilon(1e-12));
        CHECK(std::abs((v - s.base_center).dot(g.approach)) < 1e-15);
    }
    for (double e : s.strains()) CHECK(e < 1e-12);
    CHECK(kCup.perimeter_rest_length() == doctest::Approx(5.740e-3).epsilon(1e-3));
    CHECK(kCup.perimeter_rest_length() == doctest::Approx(2 * 0.0075 * std::sin(std::numbers::pi / 8)));
    CHECK((s.base[0] - s.base_center).normalized().isApprox(Vec3::UnitX(), 1e-12));
    // The apex clears the object.
    CHECK((s.apex - g.point).norm() > m.bounds().diagonal() + kCup.height);
}

TEST_CASE("cup model validation")
{
    CHECK_THROWS(CupModel{2, 0.0075, 0.01, 0.1}.validate());
    CHECK_THROWS(CupModel{8, 0.0, 0.01, 0.1}.validate());
    CHECK_THROWS(CupModel{8, 0.0075, -1.0, 0.1}.validate());
    CHECK_THROWS(CupModel{8, 0.0075, 0.01, 1.0}.validate());
    CHECK_NOTHROW(kCup.validate());
}

TEST_CASE("flat plate seals with zero strain and cone at rest")
{
    const Mesh m = plate();
    const SuctionGrasp g{Vec3(0.01, -0.02, 0.0), Vec3(0, 0, -1)};
    const SealResult r = check_seal(kCup, g, m);
    CHECK(r.feasible);
    CHECK(r.failure == SealFailure::None);
    CHECK(r.max_strain < 1e-6);
    REQUIRE(r.contact_state);
    for (double len : r.contact_state->cone_current) CHECK(len == doctest::Approx(kCup.cone_rest_length()).epsilon(1e-12));
    CHECK(spring_stretch_metric(kCup, g, m) < 1e-12);
}

TEST_CASE("through-hole of radius 2r is a hole failure")
{
    const Mesh m = primitives::plate_with_hole(0.1, 0.01, 2 * kCup.radius);
    const SealResult r = check_seal(kCup, SuctionGrasp{Vec3::Zero(), Vec3(0, 0, -1)}, m);
    CHECK_FALSE(r.feasible);
    CHECK(r.failure == SealFailure::Hole);
    CHECK(std::isinf(spring_stretch_metric(kCup, SuctionGrasp{Vec3::Zero(), Vec3(0, 0, -1)}, m)));
}

TEST_CASE("small hole inside the ring is a hole failure")
{
    const Mesh m = primitives::plate_with_hole(0.1, 0.01, 0.5 * kCup.radius);
    const SealResult r = check_seal(kCup, SuctionGrasp{Vec3(0.003, 0, 0), Vec3(0, 0, -1)}, m);
    CHECK(r.failure == SealFailure::Hole);
}

TEST_CASE("grasp on the rim misses vertices")
{
    const Mesh m = plate(0.2);
    const SealResult r = check_seal(kCup, SuctionGrasp{Vec3(0.1, 0.0, 0.0), Vec3(0, 0, -1)}, m);
    CHECK_FALSE(r.feasible);
    CHECK(r.failure == SealFailure::VertexMiss);
}

TEST_CASE("45 degree incline stretches chords by the projection factor")
{
    const double a = std::numbers::pi / 4;
    const RigidTransform tilt(so3_exp(Vec3(0, a, 0)), Vec3::Zero());
    const Mesh m = plate().transformed(tilt);
    const Vec3 n = tilt.apply_direction(Vec3::UnitZ());
    const SuctionGrasp g{Vec3::Zero(), Vec3(0, 0, -1)};
    const CupState init = init_cup(kCup, g, m);
    const auto proj = project_perimeter(init, m);
    REQUIRE(proj.ok());
    for (int i = 0; i < kCup.n; ++i) {
        const Vec3 d = init.base[(i + 1) % kCup.n] - init.base[i];
        // Vertical offset that keeps the chord on the plane n . x = 0.
        const double dz = -(n.x() * d.x() + n.y() * d.y()) / n.z();
        const double expected = std::sqrt(d.squaredNorm() + dz * dz);
        CHECK(proj.state.perimeter_current[i] == doctest::Approx(expected).epsilon(1e-9));
        CHECK(std::abs(proj.state.base[i].dot(n)) < 1e-12);
    }
}

TEST_CASE("step crossing the ring exceeds the strain limit, matching the polyline oracle")
{
    const double step_h = 0.25 * kCup.height;
    const Mesh m = primitives::step_plate(0.1, 0.01, step_h, 0.0);
    const SuctionGrasp g{Vec3(-0.001, 0.0, 0.0), Vec3(0, 0, -1)};
    const SealSettings settings;
    const SealResult r = check_seal(kCup, g, m, settings);
    CHECK(r.failure == SealFailure::StrainExceeded);
    CHECK(r.max_strain > 0.10);
    CHECK(spring_stretch_metric(kCup, g, m) > 0.10);
    CHECK(spring_stretch_metric(kCup, g, m) == spring_stretch_metric(kCup, g, m));

    // Oracle: heights from the step function, straight sampling of each chord.
    const CupState init = init_cup(kCup, g, m, settings);
    auto surface = [&](const Vec3& q) { return Vec3(q.x(), q.y(), q.x() >= 0.0 ? step_h : 0.0); };
    const int n = kCup.n;
    const int samples = settings.samples_per_spring;
    std::vector<Vec3> base(n);
    std::vector<double> strains;
    for (int i = 0; i < n; ++i) base[i] = surface(init.base[i]);
    for (int i = 0; i < n; ++i) {
        const Vec3 a = init.base[i];
        const Vec3 b = init.base[(i + 1) % n];
        Vec3 prev = base[i];
        double len = 0.0;
        for (int k = 1; k <= samples + 1; ++k) {
            const Vec3 q = k == samples + 1 ? base[(i + 1) % n] : surface(a + (b - a) * (double(k) / (samples + 1)));
            len += (q - prev).norm();
            prev = q;
        }
        strains.push_back(std::abs(len - kCup.perimeter_rest_length()) / kCup.perimeter_rest_length());
    }
    double mean = 0.0;
    for (const auto& v : base) mean += (v - g.point).dot(g.approach);
    mean /= n;
    const Vec3 apex = g.point + std::min(mean - kCup.height, 0.0) * g.approach;
    for (int i = 0; i < n; ++i) {
        strains.push_back(std::abs((base[i] - apex).norm() - kCup.cone_rest_length()) / kCup.cone_rest_length());
    }
    for (int i = 0; i < n; ++i) {
        strains.push_back(std::abs((base[(i + 2) % n] - base[i]).norm() - kCup.flexion_rest_length()) /
                          kCup.flexion_rest_length());
    }
    REQUIRE(r.per_spring_strains.size() == strains.size());
    for (std::size_t i = 0; i < strains.size(); ++i) {
        CHECK(r.per_spring_strains[i] == doctest::Approx(strains[i]).epsilon(1e-9).scale(1.0));
        CHECK(std::abs(r.per_spring_strains[i] - strains[i]) < 1e-9);
    }
    CHECK(std::abs(r.max_strain - *std::max_element(strains.begin(), strains.end())) < 1e-12);
}

TEST_CASE("apex distance follows the closed form on random configurations")
{
    Rng rng(17);
    std::uniform_real_distribution<double> u(-0.03, 0.03);
    for (int trial = 0; trial < 100; ++trial) {
        const SuctionGrasp g{Vec3(u(rng), u(rng), u(rng)), random_unit(rng)};
        std::vector<Vec3> base;
        const int n = 3 + trial % 30;
        for (int i = 0; i < n; ++i) base.emplace_back(u(rng), u(rng), u(rng));
        const double h = 0.001 + std::abs(u(rng));
        double sum = 0.0;
        for (const auto& v : base) sum += (v - g.point).dot(g.approach);
        const double expected = std::min(sum / n - h, 0.0);
        CHECK(apex_distance(base, g, h) == expected);
    }
    const SuctionGrasp g{Vec3::Zero(), Vec3(0, 0, -1)};
    const std::vector<Vec3> flat = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0)};
    CHECK(apex_distance(flat, g, 0.01) == doctest::Approx(-0.01));
    const std::vector<Vec3> deep = {Vec3(0, 0, -0.02), Vec3(1, 0, -0.02), Vec3(0, 1, -0.02)};
    CHECK(apex_distance(deep, g, 0.01) == 0.0);
}

TEST_CASE("projection is idempotent")
{
    const std::vector<std::pair<Mesh, SuctionGrasp>> cases = {
        {primitives::icosphere(0.05, 3), SuctionGrasp{Vec3(0, 0, 0.05), Vec3(0, 0, -1)}},
        {primitives::step_plate(0.1, 0.01, 0.002, 0.0), SuctionGrasp{Vec3(-0.001, 0, 0), Vec3(0, 0, -1)}},
        {plate().transformed(RigidTransform(so3_exp(Vec3(0.3, 0.2, 0)), Vec3::Zero())),
         SuctionGrasp{Vec3::Zero(), Vec3(0.1, 0, -1).normalized()}},
    };
    for (const auto& [m, g] : cases) {
        const auto once = project_perimeter(init_cup(kCup, g, m), m);
        REQUIRE(once.ok());
        const auto twice = project_perimeter(once.state, m);
        REQUIRE(twice.ok());
        for (std::size_t i = 0; i < once.state.base.size(); ++i) {
            CHECK((once.state.base[i] - twice.state.base[i]).norm() < 1e-9);
        }
    }
}

TEST_CASE("seal result is equivariant under rigid motion")
{
    Rng rng(23);
    std::normal_distribution<double> nd;
    const std::vector<std::pair<Mesh, SuctionGrasp>> cases = {
        {primitives::step_plate(0.1, 0.01, 0.0015, 0.0), SuctionGrasp{Vec3(-0.002, 0.001, 0), Vec3(0, 0, -1)}},
        {primitives::icosphere(0.04, 3), SuctionGrasp{Vec3(0, 0, 0.04), Vec3(0, 0, -1)}},
        {primitives::cylinder(0.02, 0.05), SuctionGrasp{Vec3(0.02, 0, 0.025), Vec3(-1, 0, 0)}},
    };
    for (const auto& [m, g] : cases) {
        // Reference axis not parallel to the approach so the ring frame moves with the scene.
        const Vec3 reference = std::abs(g.approach.x()) > 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
        SealSettings fixed;
        fixed.reference_axis = reference;
        const SealResult base = check_seal(kCup, g, m, fixed);
        for (int k = 0; k < 5; ++k) {
            const RigidTransform t(so3_exp(Vec3(nd(rng), nd(rng), nd(rng))), 0.1 * Vec3(nd(rng), nd(rng), nd(rng)));
            const SealResult moved = check_seal(kCup, g.transformed(t), m.transformed(t), settings_for(t, reference));
            CHECK(moved.failure == base.failure);
            REQUIRE(moved.per_spring_strains.size() == base.per_spring_strains.size());
            for (std::size_t i = 0; i < base.per_spring_strains.size(); ++i) {
                CHECK(std::abs(moved.per_spring_strains[i] - base.per_spring_strains[i]) < 1e-9);
            }
        }
    }
}

TEST_CASE("planar patches seal under perpendicular approach")
{
    Rng rng(29);
    for (int k = 0; k < 30; ++k) {
        const Vec3 normal = random_unit(rng);
        const Mat3 R = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), normal).toRotationMatrix();
        const RigidTransform t(R, 0.05 * random_unit(rng));
        const Mesh m = plate().transformed(t);
        const SuctionGrasp g{t.translation(), -normal};
        const SealResult r = check_seal(kCup, g, m);
        CHECK(r.feasible);
        CHECK(r.max_strain < 1e-6);
    }
}

TEST_CASE("feasibility is insensitive to ring rotation at n = 32")
{
    CupModel fine = kCup;
    fine.n = 32;
    Rng rng(31);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const Mesh sphere = primitives::icosphere(0.5, 4);
    const Mesh flat = plate();
    std::vector<std::pair<const Mesh*, SuctionGrasp>> cases = {{&flat, SuctionGrasp{Vec3::Zero(), Vec3(0, 0, -1)}}};
    for (int k = 0; k < 6; ++k) {
        const Vec3 d = random_unit(rng);
        const auto hit = ray_intersect(sphere, Vec3::Zero(), d);
        REQUIRE(hit);
        cases.push_back({&sphere, SuctionGrasp{hit->point, -d}});
    }
    int disagreements_n8 = 0;
    for (const auto& [m, g] : cases) {
        SealSettings s;
        const bool ref32 = check_seal(fine, g, *m, s).feasible;
        const bool ref8 = check_seal(kCup, g, *m, s).feasible;
        for (int k = 0; k < 8; ++k) {
            s.ring_rotation = angle(rng);
            CHECK(check_seal(fine, g, *m, s).feasible == ref32);
            if (check_seal(kCup, g, *m, s).feasible != ref8) ++disagreements_n8;
        }
    }
    MESSAGE("n = 8 ring-rotation disagreements: " << disagreements_n8);
}

TEST_CASE("cone sweeping into a wall collides")
{
    // Narrow slot: the cup must descend between two tall walls closer than its diameter.
    const Mesh floor = plate(0.2);
    std::vector<Vec3> verts = floor.vertices();
    std::vector<Triangle> tris = floor.triangles();
    auto append = [&](const Mesh& part) {
        const int offset = static_cast<int>(verts.size());
        for (const auto& v : part.vertices()) verts.push_back(v);
        for (auto t : part.triangles()) tris.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    };
    append(primitives::box(Vec3(0.01, 0.05, 0.03), Vec3(0.0105, 0, 0.015)));
    const Mesh scene(verts, tris);
    const SealResult r = check_seal(kCup, SuctionGrasp{Vec3(0.0, 0.0, 0.0), Vec3(0, 0, -1)}, scene);
    CHECK_FALSE(r.feasible);
    CHECK(r.failure == SealFailure::Collision);
}

TEST_CASE("seal result invariants")
{
    const Mesh m = primitives::icosphere(0.02, 3);
    Rng rng(37);
    for (int k = 0; k < 20; ++k) {
        const Vec3 d = random_unit(rng);
        const auto hit = ray_intersect(m, Vec3::Zero(), d);
        REQUIRE(hit);
        const SealResult r = check_seal(kCup, SuctionGrasp{hit->point, -d}, m);
        CHECK(r.feasible == (r.failure == SealFailure::None));
        if (!r.per_spring_strains.empty()) {
            CHECK(r.max_strain == *std::max_element(r.per_spring_strains.begin(), r.per_spring_strains.end()));
        }
    }
    CHECK(to_string(SealFailure::StrainExceeded) == "strain_exceeded");
}
