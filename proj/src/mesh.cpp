#include "suction/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "suction/bvh.hpp"

namespace suction {

namespace {

double signed_volume(const std::vector<Vec3>& v, const std::vector<Triangle>& tris, const Vec3& ref)
{
    double vol = 0.0;
    for (const auto& t : tris) {
        vol += (v[t[0]] - ref).dot((v[t[1]] - ref).cross(v[t[2]] - ref)) / 6.0;
    }
    return vol;
}

bool edges_manifold(const std::vector<Triangle>& tris)
{
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : tris) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k];
            int b = t[(k + 1) % 3];
            if (a > b) {
                std::swap(a, b);
            }
            ++edge_count[{a, b}];
        }
    }
    return !tris.empty() && std::all_of(edge_count.begin(), edge_count.end(),
                                        [](const auto& e) { return e.second == 2; });
}

}  // namespace

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, double mass)
    : vertices_(std::move(vertices)), mass_(mass)
{
    const int nv = static_cast<int>(vertices_.size());
    triangles_.reserve(triangles.size());
    for (const auto& t : triangles) {
        for (int idx : t) {
            if (idx < 0 || idx >= nv) {
                throw MeshLoadError("triangle index " + std::to_string(idx) + " out of range");
            }
        }
        const double area =
            0.5 * (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
        if (area < kDegenerateArea) {
            ++degenerate_removed_;
            continue;
        }
        triangles_.push_back(t);
    }

    for (const auto& v : vertices_) {
        bounds_.extend(v);
    }
    watertight_ = edges_manifold(triangles_);

    const Vec3 ref = nv > 0 ? bounds_.center() : Vec3::Zero();
    double vol = signed_volume(vertices_, triangles_, ref);
    if (watertight_ && vol < 0.0) {
        for (auto& t : triangles_) {
            std::swap(t[1], t[2]);
        }
        vol = -vol;
    }

    Vec3 area_centroid = Vec3::Zero();
    Vec3 volume_moment = Vec3::Zero();
    for (const auto& t : triangles_) {
        const Vec3 a = vertices_[t[0]] - ref;
        const Vec3 b = vertices_[t[1]] - ref;
        const Vec3 c = vertices_[t[2]] - ref;
        const double tri_area = 0.5 * (b - a).cross(c - a).norm();
        area_ += tri_area;
        area_centroid += tri_area * (a + b + c) / 3.0;
        volume_moment += a.dot(b.cross(c)) / 6.0 * (a + b + c) / 4.0;
    }
    volume_ = watertight_ ? vol : 0.0;
    if (watertight_ && vol > 1e-18) {
        center_of_mass_ = ref + volume_moment / vol;
    } else if (area_ > 0.0) {
        center_of_mass_ = ref + area_centroid / area_;
    } else {
        center_of_mass_ = ref;
    }
    bvh_ = std::make_shared<const Bvh>(vertices_, triangles_);
}

Vec3 Mesh::face_normal(int tri) const
{
    const Vec3 a = vertex(tri, 0);
    return (vertex(tri, 1) - a).cross(vertex(tri, 2) - a).normalized();
}

double Mesh::face_area(int tri) const
{
    const Vec3 a = vertex(tri, 0);
    return 0.5 * (vertex(tri, 1) - a).cross(vertex(tri, 2) - a).norm();
}

Mesh Mesh::transformed(const RigidTransform& t) const
{
    std::vector<Vec3> v;
    v.reserve(vertices_.size());
    for (const auto& p : vertices_) {
        v.push_back(t.apply(p));
    }
    return Mesh(std::move(v), triangles_, mass_);
}

namespace {

Mesh load_obj(const std::filesystem::path& path, double scale)
{
    std::ifstream in(path);
    if (!in) {
        throw MeshLoadError("cannot open " + path.string());
    }
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw MeshLoadError(path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') {
            continue;
        }
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) {
                fail("malformed vertex");
            }
            vertices.emplace_back(scale * x, scale * y, scale * z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                const auto slash = tok.find('/');
                int i = 0;
                try {
                    i = std::stoi(tok.substr(0, slash));
                } catch (const std::exception&) {
                    fail("malformed face index '" + tok + "'");
                }
                if (i < 0) {
                    i = static_cast<int>(vertices.size()) + i + 1;
                }
                if (i < 1 || i > static_cast<int>(vertices.size())) {
                    fail("face index out of range");
                }
                idx.push_back(i - 1);
            }
            if (idx.size() < 3) {
                fail("face with fewer than 3 vertices");
            }
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                triangles.push_back({idx[0], idx[k], idx[k + 1]});
            }
        }
    }
    if (triangles.empty()) {
        throw MeshLoadError(path.string() + ": no faces");
    }
    return Mesh(std::move(vertices), std::move(triangles));
}

Mesh load_stl(const std::filesystem::path& path, double scale)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MeshLoadError("cannot open " + path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 84) {
        throw MeshLoadError(path.string() + ": truncated STL header");
    }
    auto read_u32 = [&](std::size_t off) {
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + off);
        return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
               std::uint32_t(p[3]) << 24;
    };
    auto read_f32 = [&](std::size_t off) {
        const std::uint32_t u = read_u32(off);
        float f;
        std::memcpy(&f, &u, sizeof f);
        return static_cast<double>(f);
    };
    const std::uint32_t count = read_u32(80);
    if (bytes.size() < 84 + std::size_t(count) * 50) {
        throw MeshLoadError(path.string() + ": STL declares " + std::to_string(count) +
                            " triangles but file is truncated");
    }
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::map<std::tuple<double, double, double>, int> weld;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t base = 84 + std::size_t(i) * 50 + 12;
        Triangle t{};
        for (int c = 0; c < 3; ++c) {
            const auto key = std::make_tuple(read_f32(base + 12 * c), read_f32(base + 12 * c + 4),
                                             read_f32(base + 12 * c + 8));
            auto [it, inserted] = weld.try_emplace(key, static_cast<int>(vertices.size()));
            if (inserted) {
                vertices.emplace_back(scale * std::get<0>(key), scale * std::get<1>(key),
                                      scale * std::get<2>(key));
            }
            t[c] = it->second;
        }
        triangles.push_back(t);
    }
    return Mesh(std::move(vertices), std::move(triangles));
}

void write_u32(std::ostream& out, std::uint32_t v)
{
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& out, double value)
{
    const float f = static_cast<float>(value);
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    write_u32(out, u);
}

}  // namespace

Mesh load_mesh(const std::filesystem::path& path, double scale, std::optional<MeshFormat> format)
{
    if (!format) {
        std::string ext = path.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".obj") {
            format = MeshFormat::Obj;
        } else if (ext == ".stl") {
            format = MeshFormat::StlBinary;
        } else {
            throw MeshLoadError("unknown mesh extension '" + ext + "'");
        }
    }
    return *format == MeshFormat::Obj ? load_obj(path, scale) : load_stl(path, scale);
}

void save_obj(const Mesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.precision(17);
    for (const auto& v : mesh.vertices()) {
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
    for (const auto& t : mesh.triangles()) {
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
}

void save_stl(const Mesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    char header[80] = {};
    std::strncpy(header, "binary stl", sizeof header - 1);
    out.write(header, 80);
    write_u32(out, static_cast<std::uint32_t>(mesh.triangles().size()));
    for (std::size_t i = 0; i < mesh.triangles().size(); ++i) {
        const Vec3 n = mesh.face_normal(static_cast<int>(i));
        for (int k = 0; k < 3; ++k) {
            write_f32(out, n[k]);
        }
        for (int c = 0; c < 3; ++c) {
            const Vec3 v = mesh.vertex(static_cast<int>(i), c);
            for (int k = 0; k < 3; ++k) {
                write_f32(out, v[k]);
            }
        }
        out.put(0);
        out.put(0);
    }
}

std::optional<RayHit> ray_intersect(const Mesh& mesh, const Vec3& origin, const Vec3& direction)
{
    return mesh.bvh().intersect(origin, direction);
}

std::vector<SurfaceSample> sample_surface(const Mesh& mesh, int count, std::mt19937_64& rng)
{
    if (mesh.surface_area() <= 0.0) {
        throw std::invalid_argument("sample_surface: mesh has zero area");
    }
    std::vector<double> areas(mesh.triangles().size());
    for (std::size_t i = 0; i < areas.size(); ++i) {
        areas[i] = mesh.face_area(static_cast<int>(i));
    }
    std::discrete_distribution<int> pick(areas.begin(), areas.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<SurfaceSample> out;
    out.reserve(std::max(count, 0));
    for (int i = 0; i < count; ++i) {
        const int tri = pick(rng);
        double u = unit(rng);
        double v = unit(rng);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const Vec3 a = mesh.vertex(tri, 0);
        const Vec3 p = a + u * (mesh.vertex(tri, 1) - a) + v * (mesh.vertex(tri, 2) - a);
        out.push_back({p, -mesh.face_normal(tri), tri});
    }
    return out;
}

}  // namespace suction
