#include "suction/sensor.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "suction/parallel.hpp"

namespace suction {

void CameraIntrinsics::validate() const
{
    if (!(fx > 0.0 && fy > 0.0)) throw std::invalid_argument("camera focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera image size must be positive");
    if (!(cx >= 0.0 && cx <= width - 1 && cy >= 0.0 && cy <= height - 1)) {
        throw std::invalid_argument("camera principal point must lie inside the image");
    }
}

RigidTransform camera_pose_spherical(double r, double azimuth, double polar)
{
    const Vec3 eye(r * std::sin(polar) * std::cos(azimuth), r * std::sin(polar) * std::sin(azimuth),
                   r * std::cos(polar));
    const Vec3 z = (-eye).normalized();
    const Vec3 x(-std::sin(azimuth), std::cos(azimuth), 0.0);
    const Vec3 y = z.cross(x);
    Mat3 R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    return {R, eye};
}

double DepthImage::sample(double u, double v) const
{
    if (!(u >= 0.0 && v >= 0.0 && u <= width - 1 && v <= height - 1)) return 0.0;
    const int u0 = std::min(static_cast<int>(u), width - 1);
    const int v0 = std::min(static_cast<int>(v), height - 1);
    const int u1 = std::min(u0 + 1, width - 1);
    const int v1 = std::min(v0 + 1, height - 1);
    const double a = u - u0;
    const double b = v - v0;
    return (1 - a) * (1 - b) * at(u0, v0) + a * (1 - b) * at(u1, v0) + (1 - a) * b * at(u0, v1) +
           a * b * at(u1, v1);
}

DepthImage render_depth(const Mesh& world_mesh, const Camera& camera, const RenderOptions& options)
{
    const auto& K = camera.intrinsics;
    K.validate();
    DepthImage img(K.width, K.height);
    const Mat3& R = camera.world_from_camera.rotation();
    const Vec3& origin = camera.world_from_camera.translation();
    parallel_for(K.height, options.workers, [&](int v) {
        for (int u = 0; u < K.width; ++u) {
            const Vec3 ray_cam((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
            const double norm = ray_cam.norm();
            const Vec3 dir = R * (ray_cam / norm);
            double t = std::numeric_limits<double>::infinity();
            if (const auto hit = ray_intersect(world_mesh, origin, dir)) t = hit->distance;
            if (options.table && dir.z() < 0.0 && origin.z() > 0.0) t = std::min(t, -origin.z() / dir.z());
            if (std::isfinite(t)) img.at(u, v) = t / norm;
        }
    });
    return img;
}

DepthImage render_depth(const Mesh& mesh, const RigidTransform& object_pose, const Camera& camera,
                        const RenderOptions& options)
{
    return render_depth(mesh.transformed(object_pose), camera, options);
}

NoiseModel NoiseModel::disabled()
{
    NoiseModel n;
    n.multiplicative = false;
    n.sigma = 0.0;
    return n;
}

std::vector<double> correlated_noise(int width, int height, double sigma, double bandwidth_px, Rng& rng)
{
    std::vector<double> out(static_cast<std::size_t>(width) * height, 0.0);
    if (sigma == 0.0) return out;
    // Squared-exponential correlation exp(-d^2 / (2 l^2)) needs a kernel of std l / sqrt(2).
    const double s = bandwidth_px / std::sqrt(2.0);
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * s)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (s * s));
        sum += k[static_cast<std::size_t>(i + radius)];
    }
    double sq = 0.0;
    for (auto& x : k) {
        x /= sum;
        sq += x * x;
    }
    const double gain = sigma / sq;   // 2D separable kernel: marginal std = sq

    const int pw = width + 2 * radius;
    const int ph = height + 2 * radius;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> white(static_cast<std::size_t>(pw) * ph);
    for (auto& x : white) x = normal(rng);
    std::vector<double> rows(static_cast<std::size_t>(pw) * height, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < pw; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += k[static_cast<std::size_t>(i + radius)] * white[static_cast<std::size_t>(y + radius + i) * pw + x];
            }
            rows[static_cast<std::size_t>(y) * pw + x] = acc;
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += k[static_cast<std::size_t>(i + radius)] * rows[static_cast<std::size_t>(y) * pw + x + radius + i];
            }
            out[static_cast<std::size_t>(y) * width + x] = gain * acc;
        }
    }
    return out;
}

DepthImage corrupt_depth(const DepthImage& img, const NoiseModel& noise, Rng& rng, NoiseReport* report)
{
    double alpha = 1.0;
    if (noise.multiplicative) {
        std::gamma_distribution<double> gamma(noise.gamma_shape, noise.gamma_scale);
        alpha = gamma(rng);
    }
    const std::vector<double> eps = correlated_noise(img.width, img.height, noise.sigma, noise.bandwidth_px, rng);
    DepthImage out = img;
    int clamped = 0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        if (img.data[i] == 0.0) continue;
        double y = alpha * img.data[i] + eps[i];
        if (y < 0.0) {
            y = 0.0;
            ++clamped;
        }
        out.data[i] = y;
    }
    if (report != nullptr) *report = {alpha, clamped};
    return out;
}

GraspProjection project_grasp(const SuctionGrasp& world_grasp, const Camera& camera)
{
    const auto& K = camera.intrinsics;
    const RigidTransform cam_from_world = camera.world_from_camera.inverse();
    const Vec3 p = cam_from_world.apply(world_grasp.point);
    if (!(p.z() > 0.0)) throw std::domain_error("grasp target is behind the camera");
    const Vec3 a = cam_from_world.apply_direction(world_grasp.approach.normalized());

    GraspProjection out;
    out.u = K.fx * p.x() / p.z() + K.cx;
    out.v = K.fy * p.y() / p.z() + K.cy;
    out.depth = p.z();
    // Image-plane direction of the approach axis at the target (derivative of the projection).
    const double du = K.fx * (a.x() * p.z() - p.x() * a.z()) / (p.z() * p.z());
    const double dv = K.fy * (a.y() * p.z() - p.y() * a.z()) / (p.z() * p.z());
    out.in_plane_angle = std::hypot(du, dv) > 1e-12 ? std::atan2(-du, dv) : 0.0;
    out.table_angle = std::acos(std::min(1.0, std::abs(world_grasp.approach.normalized().z())));
    return out;
}

Vec3 deproject(const Camera& camera, double u, double v, double depth)
{
    const auto& K = camera.intrinsics;
    const Vec3 p((u - K.cx) / K.fx * depth, (v - K.cy) / K.fy * depth, depth);
    return camera.world_from_camera.apply(p);
}

GraspThumbnail extract_thumbnail(const DepthImage& img, const GraspProjection& projection, int side)
{
    if (side < 1) throw std::invalid_argument("thumbnail side must be positive");
    GraspThumbnail t;
    t.side = side;
    t.crop.resize(static_cast<std::size_t>(side) * side);
    t.gripper_depth = projection.depth;
    t.approach_angle = projection.table_angle;
    t.u = projection.u;
    t.v = projection.v;
    t.rotation = projection.in_plane_angle;
    const double c = std::cos(t.rotation);
    const double s = std::sin(t.rotation);
    const double mid = 0.5 * (side - 1);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double dx = x - mid;
            const double dy = y - mid;
            t.crop[static_cast<std::size_t>(y) * side + x] =
                static_cast<float>(img.sample(projection.u + c * dx - s * dy, projection.v + s * dx + c * dy));
        }
    }
    return t;
}

void save_depth(const DepthImage& img, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const double d : img.data) {
        const float f = static_cast<float>(d);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        const unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                    static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    nlohmann::json header = {{"width", img.width},     {"height", img.height},     {"units", "m"},
                             {"dtype", "float32"},     {"byte_order", "little"},   {"layout", "row_major"}};
    std::ofstream side(path.string() + ".json");
    side << header.dump(2) << '\n';
    if (!out || !side) throw std::runtime_error("failed writing " + path.string());
}

DepthImage load_depth(const std::filesystem::path& path)
{
    std::ifstream side(path.string() + ".json");
    if (!side) throw std::runtime_error("missing depth header " + path.string() + ".json");
    nlohmann::json header;
    try {
        side >> header;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad depth header: " + std::string(e.what()));
    }
    DepthImage img(header.at("width").get<int>(), header.at("height").get<int>());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    for (auto& d : img.data) {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated depth file " + path.string());
        const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        d = f;
    }
    return img;
}

void save_depth_png(const DepthImage& img, const std::filesystem::path& path)
{
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (fp == nullptr) throw std::runtime_error("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("png encoding failed for " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 16,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(img.width) * 2);
    for (int v = 0; v < img.height; ++v) {
        for (int u = 0; u < img.width; ++u) {
            const double mm = std::clamp(std::round(img.at(u, v) * 1000.0), 0.0, 65535.0);
            const auto q = static_cast<std::uint16_t>(mm);
            row[static_cast<std::size_t>(u) * 2] = static_cast<png_byte>(q >> 8);
            row[static_cast<std::size_t>(u) * 2 + 1] = static_cast<png_byte>(q & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

void save_camera(const Camera& camera, const std::filesystem::path& path)
{
    const auto& K = camera.intrinsics;
    const Mat3& R = camera.world_from_camera.rotation();
    const Vec3& t = camera.world_from_camera.translation();
    nlohmann::json j;
    j["intrinsics"] = {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}, {"width", K.width}, {"height", K.height}};
    j["rotation"] = {{R(0, 0), R(0, 1), R(0, 2)}, {R(1, 0), R(1, 1), R(1, 2)}, {R(2, 0), R(2, 1), R(2, 2)}};
    j["translation"] = {t.x(), t.y(), t.z()};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

Camera load_camera(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read camera file " + path.string());
    try {
        nlohmann::json j;
        in >> j;
        Camera cam;
        const auto& k = j.at("intrinsics");
        cam.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                          k.at("cy").get<double>(), k.at("width").get<int>(),   k.at("height").get<int>()};
        Mat3 R;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) R(r, c) = j.at("rotation").at(r).at(c).get<double>();
        }
        const auto& t = j.at("translation");
        cam.world_from_camera = RigidTransform(R, Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()));
        if (!cam.world_from_camera.is_valid(1e-6)) throw std::runtime_error("camera rotation is not orthonormal");
        cam.intrinsics.validate();
        return cam;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad camera file " + path.string() + ": " + e.what());
    }
}

}  // namespace suction
