#include "suction/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <stdexcept>

#include "suction/parallel.hpp"

namespace suction {

namespace fs = std::filesystem;

std::vector<ObjectModel> load_objects(const fs::path& dir, double scale, int max_stable_poses)
{
    if (!fs::is_directory(dir)) throw std::runtime_error("object directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".obj" || ext == ".stl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .obj or .stl files in " + dir.string());
    std::vector<ObjectModel> out;
    for (const auto& f : files) {
        Mesh mesh = load_mesh(f, scale);
        if (!mesh.watertight()) throw std::runtime_error("mesh is not watertight: " + f.string());
        std::vector<StablePose> poses = stable_poses(mesh);
        if (max_stable_poses > 0 && static_cast<int>(poses.size()) > max_stable_poses) poses.resize(static_cast<std::size_t>(max_stable_poses));
        out.push_back(ObjectModel{f.stem().string(), f, std::move(mesh), std::move(poses)});
    }
    return out;
}

RigidTransform StateSample::object_pose(const StablePose& pose) const
{
    const RigidTransform planar(Eigen::AngleAxisd(theta, Vec3::UnitZ()).toRotationMatrix(), Vec3(x, y, 0.0));
    return planar * pose.transform;
}

Camera StateSample::camera(const CameraIntrinsics& intrinsics) const
{
    return {intrinsics, camera_pose_spherical(camera_radius, camera_azimuth, camera_polar)};
}

StateSample sample_view(int object_id, int pose_id, const RunConfig& config, Rng& rng)
{
    StateSample s;
    s.object_id = object_id;
    s.pose_id = pose_id;
    s.mu = config.perturbation.friction.sample(rng);
    const double r = config.dataset.planar_range;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    s.x = -r + 2.0 * r * unit(rng);
    s.y = -r + 2.0 * r * unit(rng);
    s.theta = 2.0 * std::numbers::pi * unit(rng);
    const auto& c = config.camera;
    s.camera_radius = c.radius_min + (c.radius_max - c.radius_min) * unit(rng);
    s.camera_azimuth = 2.0 * std::numbers::pi * unit(rng);
    s.camera_polar = c.polar_min + (c.polar_max - c.polar_min) * unit(rng);
    return s;
}

StateSample sample_state(const std::vector<int>& poses_per_object, const RunConfig& config, Rng& rng)
{
    if (poses_per_object.empty()) throw std::invalid_argument("no objects to sample from");
    std::uniform_int_distribution<int> pick_object(0, static_cast<int>(poses_per_object.size()) - 1);
    const int o = pick_object(rng);
    const int count = poses_per_object[static_cast<std::size_t>(o)];
    if (count < 1) throw std::invalid_argument("object has no stable poses");
    std::uniform_int_distribution<int> pick_pose(0, count - 1);
    const int p = pick_pose(rng);
    return sample_view(o, p, config, rng);
}

std::vector<SuctionGrasp> sample_object_grasps(const Mesh& mesh, int count, std::uint64_t seed)
{
    std::vector<SuctionGrasp> out;
    if (count <= 0) return out;
    Rng rng(seed);
    for (const auto& s : sample_surface(mesh, count, rng)) out.push_back({s.point, s.inward_normal});
    return out;
}

std::vector<LabeledGrasp> label_grasps(const std::vector<SuctionGrasp>& grasps, const Mesh& mesh,
                                       const EvaluationOptions& options, const PerturbationSpec& spec,
                                       const Vec3& gravity_direction, std::uint64_t seed)
{
    std::vector<LabeledGrasp> out(grasps.size());
    const GraspScene scene{&mesh, gravity_direction};
    EvaluationOptions inner = options;
    inner.workers = 1;
    parallel_for(static_cast<int>(grasps.size()), options.workers, [&](int i) {
        const auto k = static_cast<std::size_t>(i);
        const auto r = robust_wrench_resistance(inner, scene, grasps[k], spec, derive_seed(seed, {k}));
        out[k] = {grasps[k], r.lambda, binary_label(r.lambda, spec.threshold)};
    });
    return out;
}

std::vector<LabeledGrasp> precompute_object_grasps(const Mesh& mesh, const EvaluationOptions& options,
                                                   const PerturbationSpec& spec, int count,
                                                   const Vec3& gravity_direction, std::uint64_t seed)
{
    return label_grasps(sample_object_grasps(mesh, count, derive_seed(seed, {0})), mesh, options, spec,
                        gravity_direction, derive_seed(seed, {1}));
}

// ---------------------------------------------------------------------------
// Shards

namespace {

constexpr char kShardMagic[4] = {'S', 'G', 'T', 'S'};
constexpr std::uint32_t kShardVersion = 1;

void put_u32(std::string& b, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& b, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& b, float f)
{
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(b, v);
}
void put_f64(std::string& b, double d)
{
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(b, v);
}

struct Reader {
    const std::string& b;
    std::size_t pos = 0;

    void need(std::size_t n) const
    {
        if (pos + n > b.size()) throw std::runtime_error("truncated shard");
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32()
    {
        const std::uint32_t v = u32();
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
    double f64()
    {
        const std::uint64_t v = u64();
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
    std::uint8_t u8()
    {
        need(1);
        return static_cast<std::uint8_t>(b[pos++]);
    }
};

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t crc_of(const std::string& bytes)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), chunk);
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::size_t tuple_record_size(int side)
{
    return 16 + 4 * static_cast<std::size_t>(side) * side + 4 + 4 + 8 + 1;
}

std::uint32_t write_shard(const fs::path& path, const std::vector<GraspTuple>& tuples, int side)
{
    std::string b(kShardMagic, 4);
    put_u32(b, kShardVersion);
    put_u32(b, static_cast<std::uint32_t>(side));
    put_u32(b, static_cast<std::uint32_t>(tuples.size()));
    b.reserve(b.size() + tuples.size() * tuple_record_size(side));
    for (const auto& t : tuples) {
        if (t.thumbnail.size() != static_cast<std::size_t>(side) * side) throw std::invalid_argument("thumbnail size mismatch");
        put_u32(b, t.object_id);
        put_u32(b, t.pose_id);
        put_u32(b, t.image_id);
        put_u32(b, t.grasp_id);
        for (const float f : t.thumbnail) put_f32(b, f);
        put_f32(b, t.gripper_depth);
        put_f32(b, t.approach_angle);
        put_f64(b, t.lambda);
        b.push_back(static_cast<char>(t.label));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write shard " + path.string());
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
    out.close();
    if (!out) throw std::runtime_error("failed writing shard " + path.string());
    return crc_of(b);
}

std::vector<GraspTuple> read_shard(const fs::path& path, int* side_out)
{
    const std::string bytes = read_file(path);
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kShardMagic, 4) != 0) throw std::runtime_error("not a shard file: " + path.string());
    r.pos = 4;
    if (r.u32() != kShardVersion) throw std::runtime_error("unsupported shard version");
    const int side = static_cast<int>(r.u32());
    const std::uint32_t count = r.u32();
    if (bytes.size() != 16 + count * tuple_record_size(side)) throw std::runtime_error("shard size mismatch: " + path.string());
    std::vector<GraspTuple> out(count);
    for (auto& t : out) {
        t.object_id = r.u32();
        t.pose_id = r.u32();
        t.image_id = r.u32();
        t.grasp_id = r.u32();
        t.thumbnail.resize(static_cast<std::size_t>(side) * side);
        for (auto& f : t.thumbnail) f = r.f32();
        t.gripper_depth = r.f32();
        t.approach_angle = r.f32();
        t.lambda = r.f64();
        t.label = r.u8();
    }
    if (side_out != nullptr) *side_out = side;
    return out;
}

std::uint32_t file_crc32(const fs::path& path)
{
    return crc_of(read_file(path));
}

// ---------------------------------------------------------------------------
// Manifest

double DatasetManifest::positive_fraction() const
{
    return tuple_count == 0 ? 0.0 : static_cast<double>(positive_count) / static_cast<double>(tuple_count);
}

void DatasetManifest::save(const fs::path& path) const
{
    nlohmann::ordered_json j;
    j["schema_version"] = schema_version;
    j["seed"] = seed;
    j["objects_dir"] = objects_dir;
    j["config"] = config_text;
    auto& objs = j["objects"] = nlohmann::ordered_json::array();
    for (const auto& o : objects) {
        objs.push_back({{"name", o.name}, {"file", o.file}, {"grasps", o.grasps}, {"pose_probabilities", o.pose_probabilities}});
    }
    auto& sh = j["shards"] = nlohmann::ordered_json::array();
    for (const auto& s : shards) {
        sh.push_back({{"file", s.file}, {"object", s.object_id}, {"pose", s.pose_id}, {"tuples", s.tuples},
                      {"positives", s.positives}, {"crc32", s.crc32}});
    }
    j["tuple_count"] = tuple_count;
    j["positive_count"] = positive_count;
    j["positive_fraction"] = positive_fraction();
    j["reference_positive_fraction"] = kReferencePositiveFraction;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing manifest " + path.string());
}

DatasetManifest DatasetManifest::load(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest " + path.string());
    try {
        nlohmann::json j;
        in >> j;
        DatasetManifest m;
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != 1) throw std::runtime_error("unsupported manifest schema");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.objects_dir = j.at("objects_dir").get<std::string>();
        m.config_text = j.at("config").get<std::string>();
        for (const auto& o : j.at("objects")) {
            m.objects.push_back({o.at("name").get<std::string>(), o.at("file").get<std::string>(), o.at("grasps").get<int>(),
                                 o.at("pose_probabilities").get<std::vector<double>>()});
        }
        for (const auto& s : j.at("shards")) {
            ShardInfo info;
            info.file = s.at("file").get<std::string>();
            info.object_id = s.at("object").get<std::uint32_t>();
            info.pose_id = s.at("pose").get<std::uint32_t>();
            info.tuples = s.at("tuples").get<std::size_t>();
            info.positives = s.at("positives").get<std::size_t>();
            info.crc32 = s.at("crc32").get<std::uint32_t>();
            m.shards.push_back(info);
        }
        m.tuple_count = j.at("tuple_count").get<std::size_t>();
        m.positive_count = j.at("positive_count").get<std::size_t>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad manifest " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Generation

namespace {

// Seed layout: grasps per object, labels per (object, pose), images per (object, pose, image).
std::uint64_t object_grasp_seed(std::uint64_t seed, std::size_t o) { return derive_seed(seed, {1, o}); }
std::uint64_t label_seed(std::uint64_t seed, std::size_t o, std::size_t p) { return derive_seed(seed, {2, o, p}); }
std::uint64_t image_seed(std::uint64_t seed, std::size_t o, std::size_t p, std::size_t i) { return derive_seed(seed, {3, o, p, i}); }

Vec3 pose_gravity(const StablePose& pose)
{
    return pose.transform.rotation().transpose() * Vec3(0.0, 0.0, -1.0);
}

std::vector<ShardInfo> run_task(const RunConfig& config, const ObjectModel& obj, std::size_t o, std::size_t p,
                                const fs::path& out_dir, std::vector<fs::path>& written)
{
    const auto& ds = config.dataset;
    const StablePose& pose = obj.poses[p];
    EvaluationOptions options = config.evaluation_options();
    options.workers = 1;
    const auto grasps = sample_object_grasps(obj.mesh, ds.grasps_per_object, object_grasp_seed(config.seed, o));
    const auto labeled = label_grasps(grasps, obj.mesh, options, config.perturbation, pose_gravity(pose),
                                      label_seed(config.seed, o, p));

    std::vector<GraspTuple> tuples;
    for (int img = 0; img < ds.images_per_pose; ++img) {
        Rng rng(image_seed(config.seed, o, p, static_cast<std::size_t>(img)));
        const StateSample state = sample_view(static_cast<int>(o), static_cast<int>(p), config, rng);
        const RigidTransform world_from_object = state.object_pose(pose);
        const Camera camera = state.camera(config.intrinsics);
        const DepthImage clean = render_depth(obj.mesh.transformed(world_from_object), camera);
        const DepthImage noisy = corrupt_depth(clean, config.noise, rng);
        for (std::size_t g = 0; g < labeled.size(); ++g) {
            const SuctionGrasp world = labeled[g].grasp.transformed(world_from_object);
            GraspProjection proj;
            try {
                proj = project_grasp(world, camera);
            } catch (const std::domain_error&) {
                continue;
            }
            const long u = std::lround(proj.u);
            const long v = std::lround(proj.v);
            if (u < 0 || v < 0 || u >= clean.width || v >= clean.height) continue;
            if (std::abs(clean.at(static_cast<int>(u), static_cast<int>(v)) - proj.depth) > ds.visibility_tolerance) continue;
            const GraspThumbnail thumb = extract_thumbnail(noisy, proj, ds.thumbnail_side);
            GraspTuple t;
            t.object_id = static_cast<std::uint32_t>(o);
            t.pose_id = static_cast<std::uint32_t>(p);
            t.image_id = static_cast<std::uint32_t>(img);
            t.grasp_id = static_cast<std::uint32_t>(g);
            t.thumbnail = thumb.crop;
            t.gripper_depth = static_cast<float>(thumb.gripper_depth);
            t.approach_angle = static_cast<float>(thumb.approach_angle);
            t.lambda = labeled[g].lambda;
            t.label = static_cast<std::uint8_t>(labeled[g].label);
            tuples.push_back(std::move(t));
        }
    }

    std::vector<ShardInfo> shards;
    const std::size_t per = static_cast<std::size_t>(ds.shard_size);
    for (std::size_t start = 0, k = 0; start < tuples.size(); start += per, ++k) {
        const std::vector<GraspTuple> chunk(tuples.begin() + static_cast<std::ptrdiff_t>(start),
                                            tuples.begin() + static_cast<std::ptrdiff_t>(std::min(tuples.size(), start + per)));
        char name[64];
        std::snprintf(name, sizeof name, "shard_o%04zu_p%03zu_%04zu.bin", o, p, k);
        const fs::path path = out_dir / name;
        written.push_back(path);
        ShardInfo info;
        info.file = name;
        info.object_id = static_cast<std::uint32_t>(o);
        info.pose_id = static_cast<std::uint32_t>(p);
        info.tuples = chunk.size();
        for (const auto& t : chunk) info.positives += t.label;
        info.crc32 = write_shard(path, chunk, ds.thumbnail_side);
        shards.push_back(info);
    }
    return shards;
}

}  // namespace

DatasetManifest generate_dataset(const std::vector<ObjectModel>& objects, const fs::path& objects_dir,
                                 const RunConfig& config, const fs::path& out_dir)
{
    config.validate();
    fs::create_directories(out_dir);
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t o = 0; o < objects.size(); ++o) {
        for (std::size_t p = 0; p < objects[o].poses.size(); ++p) tasks.emplace_back(o, p);
    }
    std::vector<std::vector<ShardInfo>> results(tasks.size());
    std::vector<std::vector<fs::path>> written(tasks.size());
    try {
        parallel_for(static_cast<int>(tasks.size()), config.workers, [&](int i) {
            const auto k = static_cast<std::size_t>(i);
            results[k] = run_task(config, objects[tasks[k].first], tasks[k].first, tasks[k].second, out_dir, written[k]);
        });
    } catch (...) {
        for (const auto& list : written) {
            for (const auto& f : list) {
                std::error_code ec;
                fs::remove(f, ec);
            }
        }
        std::error_code ec;
        fs::remove(out_dir / kManifestName, ec);
        throw;
    }

    DatasetManifest m;
    m.seed = config.seed;
    m.config_text = to_config_text(config);
    m.objects_dir = fs::absolute(objects_dir).lexically_normal().string();
    for (const auto& obj : objects) {
        DatasetManifest::Object entry{obj.name, obj.file.filename().string(), config.dataset.grasps_per_object, {}};
        for (const auto& p : obj.poses) entry.pose_probabilities.push_back(p.probability);
        m.objects.push_back(entry);
    }
    for (const auto& list : results) {
        for (const auto& s : list) {
            m.shards.push_back(s);
            m.tuple_count += s.tuples;
            m.positive_count += s.positives;
        }
    }
    m.save(out_dir / kManifestName);
    return m;
}

DatasetManifest regenerate_dataset(const fs::path& manifest_path, const fs::path& out_dir, const fs::path& objects_dir)
{
    const DatasetManifest m = DatasetManifest::load(manifest_path);
    const RunConfig config = parse_config(m.config_text);
    const fs::path dir = objects_dir.empty() ? fs::path(m.objects_dir) : objects_dir;
    const auto objects = load_objects(dir, config.dataset.mesh_scale, config.dataset.max_stable_poses);
    return generate_dataset(objects, dir, config, out_dir);
}

VerifyReport verify_dataset(const fs::path& dataset_dir, double audit_fraction, std::uint64_t audit_seed,
                            const fs::path& objects_dir)
{
    const DatasetManifest m = DatasetManifest::load(dataset_dir / kManifestName);
    VerifyReport report;
    std::vector<GraspTuple> all;
    for (const auto& s : m.shards) {
        ++report.shards;
        const fs::path path = dataset_dir / s.file;
        try {
            if (file_crc32(path) != s.crc32) {
                report.bad_shards.push_back(s.file + " (checksum)");
                continue;
            }
            auto tuples = read_shard(path);
            if (tuples.size() != s.tuples) {
                report.bad_shards.push_back(s.file + " (count)");
                continue;
            }
            for (auto& t : tuples) {
                t.thumbnail.clear();
                all.push_back(std::move(t));
            }
        } catch (const std::exception& e) {
            report.bad_shards.push_back(s.file + " (" + e.what() + ")");
        }
    }
    report.tuples = all.size();
    if (all.size() != m.tuple_count) report.bad_shards.push_back("manifest tuple_count");
    if (all.empty() || audit_fraction <= 0.0) return report;

    const RunConfig config = parse_config(m.config_text);
    const fs::path dir = objects_dir.empty() ? fs::path(m.objects_dir) : objects_dir;
    const auto objects = load_objects(dir, config.dataset.mesh_scale, config.dataset.max_stable_poses);
    if (objects.size() != m.objects.size()) throw std::runtime_error("object set differs from the manifest");

    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(audit_seed, {0x61756469}));
    std::shuffle(order.begin(), order.end(), rng);
    const auto count = std::min(all.size(), static_cast<std::size_t>(std::ceil(audit_fraction * static_cast<double>(all.size()))));
    order.resize(count);
    std::sort(order.begin(), order.end());

    EvaluationOptions options = config.evaluation_options();
    std::map<std::size_t, std::vector<SuctionGrasp>> grasp_cache;
    std::vector<std::pair<std::size_t, double>> recomputed(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& t = all[order[k]];
        auto it = grasp_cache.find(t.object_id);
        if (it == grasp_cache.end()) {
            it = grasp_cache.emplace(t.object_id, sample_object_grasps(objects[t.object_id].mesh, config.dataset.grasps_per_object,
                                                                       object_grasp_seed(config.seed, t.object_id))).first;
        }
    }
    options.workers = 1;
    parallel_for(static_cast<int>(count), config.workers, [&](int k) {
        const auto& t = all[order[static_cast<std::size_t>(k)]];
        const auto& obj = objects[t.object_id];
        const StablePose& pose = obj.poses.at(t.pose_id);
        const SuctionGrasp& g = grasp_cache.at(t.object_id).at(t.grasp_id);
        const GraspScene scene{&obj.mesh, pose_gravity(pose)};
        const auto r = robust_wrench_resistance(options, scene, g, config.perturbation,
                                                derive_seed(label_seed(config.seed, t.object_id, t.pose_id), {t.grasp_id}));
        recomputed[static_cast<std::size_t>(k)] = {order[static_cast<std::size_t>(k)], r.lambda};
    });
    for (const auto& [idx, lambda] : recomputed) {
        const auto& t = all[idx];
        ++report.audited;
        if (binary_label(lambda, config.perturbation.threshold) != t.label) ++report.label_mismatches;
        if (lambda != t.lambda) ++report.lambda_mismatches;
    }
    return report;
}

}  // namespace suction
