#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "suction/config.hpp"
#include "suction/stable_pose.hpp"

namespace suction {

struct ObjectModel {
    std::string name;
    std::filesystem::path file;
    Mesh mesh;
    std::vector<StablePose> poses;   // already truncated to the configured maximum
};

/// Loads every .obj / .stl in `dir` (sorted by file name) and computes stable poses.
std::vector<ObjectModel> load_objects(const std::filesystem::path& dir, double scale, int max_stable_poses);

struct StateSample {
    int object_id = 0;
    int pose_id = 0;
    double mu = 0.5;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double camera_radius = 0.6;
    double camera_azimuth = 0.0;
    double camera_polar = 0.0;

    /// World from object: planar offset composed with the stable pose.
    RigidTransform object_pose(const StablePose& pose) const;
    Camera camera(const CameraIntrinsics& intrinsics) const;
};

/// Friction, planar pose and camera for a fixed object and stable pose.
StateSample sample_view(int object_id, int pose_id, const RunConfig& config, Rng& rng);
/// Object and pose uniformly from the discrete set, then sample_view.
StateSample sample_state(const std::vector<int>& poses_per_object, const RunConfig& config, Rng& rng);

struct LabeledGrasp {
    SuctionGrasp grasp;   // object frame
    double lambda = 0.0;
    int label = 0;
};

/// Surface-uniform grasp candidates with inward approach directions.
std::vector<SuctionGrasp> sample_object_grasps(const Mesh& mesh, int count, std::uint64_t seed);

/// Robust wrench resistance of each grasp with gravity along `gravity_direction`
/// (object frame); grasp i uses trials seeded from derive_seed(seed, {i}).
std::vector<LabeledGrasp> label_grasps(const std::vector<SuctionGrasp>& grasps, const Mesh& mesh,
                                       const EvaluationOptions& options, const PerturbationSpec& spec,
                                       const Vec3& gravity_direction, std::uint64_t seed);

std::vector<LabeledGrasp> precompute_object_grasps(const Mesh& mesh, const EvaluationOptions& options,
                                                   const PerturbationSpec& spec, int count,
                                                   const Vec3& gravity_direction, std::uint64_t seed);

struct GraspTuple {
    std::uint32_t object_id = 0;
    std::uint32_t pose_id = 0;
    std::uint32_t image_id = 0;
    std::uint32_t grasp_id = 0;
    std::vector<float> thumbnail;
    float gripper_depth = 0.0f;
    float approach_angle = 0.0f;
    double lambda = 0.0;
    std::uint8_t label = 0;
};

/// Bytes per record for a given thumbnail side.
std::size_t tuple_record_size(int side);

/// Writes a shard and returns the CRC32 of the file contents.
std::uint32_t write_shard(const std::filesystem::path& path, const std::vector<GraspTuple>& tuples, int side);
std::vector<GraspTuple> read_shard(const std::filesystem::path& path, int* side = nullptr);
std::uint32_t file_crc32(const std::filesystem::path& path);

struct ShardInfo {
    std::string file;
    std::uint32_t object_id = 0;
    std::uint32_t pose_id = 0;
    std::size_t tuples = 0;
    std::size_t positives = 0;
    std::uint32_t crc32 = 0;
};

struct DatasetManifest {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::string config_text;
    std::string objects_dir;
    struct Object {
        std::string name;
        std::string file;
        int grasps = 0;
        std::vector<double> pose_probabilities;
    };
    std::vector<Object> objects;
    std::vector<ShardInfo> shards;
    std::size_t tuple_count = 0;
    std::size_t positive_count = 0;

    double positive_fraction() const;
    void save(const std::filesystem::path& path) const;
    static DatasetManifest load(const std::filesystem::path& path);
};

inline constexpr double kReferencePositiveFraction = 0.118;
inline constexpr const char* kManifestName = "manifest.json";

/// Renders, labels and shards the dataset into `out_dir` and writes the manifest.
/// On failure every shard written so far is removed before rethrowing.
DatasetManifest generate_dataset(const std::vector<ObjectModel>& objects, const std::filesystem::path& objects_dir,
                                 const RunConfig& config, const std::filesystem::path& out_dir);

/// Re-runs generation with the configuration and seed stored in a manifest.
DatasetManifest regenerate_dataset(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir,
                                   const std::filesystem::path& objects_dir = {});

struct VerifyReport {
    std::size_t shards = 0;
    std::vector<std::string> bad_shards;
    std::size_t tuples = 0;
    std::size_t audited = 0;
    std::size_t label_mismatches = 0;
    std::size_t lambda_mismatches = 0;

    bool ok() const { return bad_shards.empty() && label_mismatches == 0 && lambda_mismatches == 0; }
};

/// Checks shard checksums and tuple counts, then recomputes the labels of
/// an `audit_fraction` sample of tuples from the manifest seeds.
VerifyReport verify_dataset(const std::filesystem::path& dataset_dir, double audit_fraction = 0.01,
                            std::uint64_t audit_seed = 0, const std::filesystem::path& objects_dir = {});

}  // namespace suction
