#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "suction/transform.hpp"

namespace suction {

class Bvh;

using Triangle = std::array<int, 3>;

struct MeshLoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlignedBox {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p)
    {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void extend(const AlignedBox& b)
    {
        min = min.cwiseMin(b.min);
        max = max.cwiseMax(b.max);
    }
    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extent() const { return max - min; }
    double diagonal() const { return extent().norm(); }
};

/// Immutable triangle surface with uniform-density mass properties and a
/// ray-query acceleration structure. Safe to share across threads.
class Mesh {
public:
    /// Drops triangles with area below kDegenerateArea, orients a closed
    /// surface outward (counter-clockwise winding), and computes mass properties.
    Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, double mass = 1.0);

    static constexpr double kDegenerateArea = 1e-12;

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const Vec3& center_of_mass() const { return center_of_mass_; }
    double mass() const { return mass_; }
    double volume() const { return volume_; }
    double surface_area() const { return area_; }
    bool watertight() const { return watertight_; }
    int degenerate_removed() const { return degenerate_removed_; }
    const AlignedBox& bounds() const { return bounds_; }
    const Bvh& bvh() const { return *bvh_; }

    Vec3 vertex(int tri, int corner) const { return vertices_[triangles_[tri][corner]]; }
    /// Outward unit normal from the winding order.
    Vec3 face_normal(int tri) const;
    double face_area(int tri) const;

    Mesh transformed(const RigidTransform& t) const;

private:
    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    Vec3 center_of_mass_ = Vec3::Zero();
    double mass_ = 1.0;
    double volume_ = 0.0;
    double area_ = 0.0;
    bool watertight_ = false;
    int degenerate_removed_ = 0;
    AlignedBox bounds_;
    std::shared_ptr<const Bvh> bvh_;
};

enum class MeshFormat { Obj, StlBinary };

/// Loads OBJ (v/f records) or binary STL; the format is taken from the
/// extension when not given. Coordinates are multiplied by `scale`.
Mesh load_mesh(const std::filesystem::path& path, double scale = 1.0,
               std::optional<MeshFormat> format = std::nullopt);

void save_obj(const Mesh& mesh, const std::filesystem::path& path);
void save_stl(const Mesh& mesh, const std::filesystem::path& path);

struct RayHit {
    Vec3 point;
    int triangle = -1;
    double distance = 0.0;
};

/// Nearest hit with distance > 1e-9 along a unit direction.
std::optional<RayHit> ray_intersect(const Mesh& mesh, const Vec3& origin, const Vec3& direction);

struct SurfaceSample {
    Vec3 point;
    Vec3 inward_normal;
    int triangle = -1;
};

/// Area-uniform surface samples with inward-facing normals.
std::vector<SurfaceSample> sample_surface(const Mesh& mesh, int count, std::mt19937_64& rng);

}  // namespace suction
