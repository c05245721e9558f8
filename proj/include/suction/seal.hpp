#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "suction/grasp.hpp"
#include "suction/mesh.hpp"

namespace suction {

/// Conical spring system: n ring vertices on a circle of radius r, apex at height h.
struct CupModel {
    int n = 8;
    double radius = 0.0075;
    double height = 0.01;
    double strain_limit = 0.10;

    /// Throws std::invalid_argument when the parameters are out of range.
    void validate() const;

    double perimeter_rest_length() const;
    double cone_rest_length() const;
    double flexion_rest_length() const;
};

struct SealSettings {
    int samples_per_spring = 16;
    int hole_grid = 8;
    int collision_steps = 10;
    /// Extra rotation of the ring about the approach axis (radians).
    double ring_rotation = 0.0;
    /// Direction whose projection into the base plane fixes the first ring vertex.
    Vec3 reference_axis = Vec3::UnitX();
};

enum class SealFailure { None, Collision, Hole, VertexMiss, StrainExceeded };

std::string_view to_string(SealFailure f);

struct CupState {
    Vec3 axis;          // approach direction
    Vec3 ring_x;        // in-plane frame of the undeformed base
    Vec3 ring_y;
    Vec3 base_center;   // undeformed base centroid
    std::vector<Vec3> base;   // v_1..v_n
    Vec3 apex;
    /// Path i runs from base[i] to base[(i + 1) % n] over the surface.
    std::vector<std::vector<Vec3>> perimeter_paths;

    std::vector<double> perimeter_rest, perimeter_current;
    std::vector<double> cone_rest, cone_current;
    std::vector<double> flexion_rest, flexion_current;

    /// Strains ordered perimeter[0..n), cone[0..n), flexion[0..n).
    std::vector<double> strains() const;
};

/// Undeformed right pyramid on the approach line, far enough back that the
/// apex clears the object (distance to p exceeds the mesh extent plus h).
CupState init_cup(const CupModel& cup, const SuctionGrasp& grasp, const Mesh& mesh,
                  const SealSettings& settings = {});

struct ProjectionResult {
    CupState state;
    SealFailure failure = SealFailure::None;
    bool ok() const { return failure == SealFailure::None; }
};

/// Drops ring vertices and perimeter-edge samples along the approach axis
/// onto the mesh, then checks the ring interior for holes. A missed ray is a
/// hole when surface surrounds it laterally, otherwise a vertex miss.
ProjectionResult project_perimeter(const CupState& state, const Mesh& mesh,
                                   const SealSettings& settings = {});

/// Closed-form apex distance t* = min(mean_i (v_i - p).v - h, 0).
double apex_distance(const std::vector<Vec3>& base, const SuctionGrasp& grasp, double height);

/// Places the apex at p + t* v and refreshes cone and flexion lengths.
CupState place_apex(const CupState& state, const SuctionGrasp& grasp, const CupModel& cup);

/// Whether the cone faces pass below the mesh surface while sweeping from the
/// undeformed standoff configuration into `contact`.
bool cone_collides(const CupState& undeformed, const CupState& contact, const Mesh& mesh,
                   const SealSettings& settings = {});

struct SealResult {
    bool feasible = false;
    SealFailure failure = SealFailure::None;
    double max_strain = 0.0;
    std::vector<double> per_spring_strains;
    std::optional<CupState> contact_state;
};

SealResult check_seal(const CupModel& cup, const SuctionGrasp& grasp, const Mesh& mesh,
                      const SealSettings& settings = {});

/// Maximum spring strain of the contact configuration; +infinity when the
/// seal fails for a reason other than strain. Lower is better.
double spring_stretch_metric(const CupModel& cup, const SuctionGrasp& grasp, const Mesh& mesh,
                             const SealSettings& settings = {});

}  // namespace suction
