#pragma once

#include <vector>

#include <Eigen/Core>

#include "suction/mesh.hpp"

namespace suction::primitives {

// Closed, outward-wound meshes in meters.

Mesh box(const Vec3& extents, const Vec3& center = Vec3::Zero());

/// Axis along z, base at z = 0.
Mesh cylinder(double radius, double height, int segments = 32);

Mesh icosphere(double radius, int subdivisions = 2, const Vec3& center = Vec3::Zero());

/// Simple polygon (counter-clockwise, xy) extruded from z = 0 to z = height.
Mesh extrude(const std::vector<Eigen::Vector2d>& polygon, double height);

/// Square plate in z in [-thickness, 0] with a centered circular through-hole.
Mesh plate_with_hole(double side, double thickness, double hole_radius, int segments = 48);

/// Square top surface at z = 0 for x < step_x and z = step_height for x >= step_x.
Mesh step_plate(double side, double thickness, double step_height, double step_x = 0.0);

/// Regular tetrahedron-like simplex with the given corner vertices.
Mesh tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

}  // namespace suction::primitives
