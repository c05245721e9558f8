#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "suction/grasp.hpp"
#include "suction/mesh.hpp"
#include "suction/rng.hpp"

namespace suction {

struct CameraIntrinsics {
    double fx = 525.0;
    double fy = 525.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;

    void validate() const;
};

/// Pose of the camera in the world (camera z forward, x right, y down).
struct Camera {
    CameraIntrinsics intrinsics;
    RigidTransform world_from_camera;
};

/// Camera on a sphere of radius r about the table centre looking at it;
/// `azimuth` about world z, `polar` from world z.
RigidTransform camera_pose_spherical(double r, double azimuth, double polar);

/// Row-major depth in metres along the optical axis; 0 means no return.
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    DepthImage() = default;
    DepthImage(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
    double at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
    /// Bilinear sample at continuous pixel coordinates; 0 outside the image.
    double sample(double u, double v) const;
};

struct RenderOptions {
    bool table = true;   // plane z = 0 in the world
    int workers = 1;
};

/// Ray-cast depth of a mesh already placed in world coordinates.
DepthImage render_depth(const Mesh& world_mesh, const Camera& camera, const RenderOptions& options = {});
/// Places the mesh with `object_pose` (world from object) first.
DepthImage render_depth(const Mesh& mesh, const RigidTransform& object_pose, const Camera& camera,
                        const RenderOptions& options = {});

struct NoiseModel {
    double gamma_shape = 1000.0;
    double gamma_scale = 0.001;
    bool multiplicative = true;
    double sigma = 0.005;          // metres
    double bandwidth_px = 1.4142135623730951;

    static NoiseModel disabled();
};

struct NoiseReport {
    double alpha = 1.0;
    int clamped = 0;
};

/// y = alpha * y_hat + eps on pixels with a return; negative results clamped to 0.
DepthImage corrupt_depth(const DepthImage& img, const NoiseModel& noise, Rng& rng, NoiseReport* report = nullptr);

/// Zero-mean field of marginal std `sigma` with squared-exponential correlation
/// of length `bandwidth_px`: white noise convolved with a Gaussian kernel.
std::vector<double> correlated_noise(int width, int height, double sigma, double bandwidth_px, Rng& rng);

struct GraspProjection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;            // camera-frame z of the target
    double in_plane_angle = 0.0;   // rotation aligning the approach axis with the image column
    double table_angle = 0.0;      // angle between approach and table normal
};

/// Throws std::domain_error when the target is behind the camera.
GraspProjection project_grasp(const SuctionGrasp& world_grasp, const Camera& camera);

/// World point from a pixel and its optical-axis depth.
Vec3 deproject(const Camera& camera, double u, double v, double depth);

struct GraspThumbnail {
    int side = 32;
    std::vector<float> crop;
    double gripper_depth = 0.0;
    double approach_angle = 0.0;
    double u = 0.0;
    double v = 0.0;
    double rotation = 0.0;

    float at(int x, int y) const { return crop[static_cast<std::size_t>(y) * side + x]; }
};

/// Rotated, target-centred crop: output column +y runs along the projected approach axis.
GraspThumbnail extract_thumbnail(const DepthImage& img, const GraspProjection& projection, int side = 32);

/// Flat little-endian float32 file plus a JSON sidecar at path + ".json".
void save_depth(const DepthImage& img, const std::filesystem::path& path);
DepthImage load_depth(const std::filesystem::path& path);
/// 16-bit grayscale PNG in millimetres.
void save_depth_png(const DepthImage& img, const std::filesystem::path& path);

void save_camera(const Camera& camera, const std::filesystem::path& path);
Camera load_camera(const std::filesystem::path& path);

}  // namespace suction
