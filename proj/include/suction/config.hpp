#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "suction/contact.hpp"
#include "suction/policy.hpp"
#include "suction/robustness.hpp"
#include "suction/seal.hpp"
#include "suction/sensor.hpp"

namespace suction {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& message, int line = 0);
    int line;
};

/// Uniform camera placement on a spherical shell about the table centre.
struct CameraSampling {
    double radius_min = 0.5;
    double radius_max = 0.7;
    double polar_min = 0.031415926535897934;   // 0.01 pi
    double polar_max = 0.3141592653589793;     // 0.1 pi
};

struct DatasetSettings {
    int images_per_pose = 10;
    int grasps_per_object = 250;
    int max_stable_poses = 0;     // 0 keeps every pose
    int thumbnail_side = 32;
    double planar_range = 0.1;    // +- metres in x and y
    double visibility_tolerance = 0.005;
    int shard_size = 1024;
    double mesh_scale = 1.0;
};

struct RunConfig {
    std::string preset = "main";
    std::uint64_t seed = 0;
    int workers = 1;
    std::string log_level = "info";

    CupModel cup;
    SealSettings seal;
    ContactModel contact;
    PerturbationSpec perturbation;
    CameraIntrinsics intrinsics;
    CameraSampling camera;
    NoiseModel noise;
    CemSettings cem;
    CandidateConstraints constraints;
    MetricParams metric;
    DatasetSettings dataset;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
    EvaluationOptions evaluation_options() const;
};

/// Parses the TOML-style subset: [section] headers, key = value with numbers,
/// booleans and quoted strings, '#' comments. Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c exactly.
std::string to_config_text(const RunConfig& config);

}  // namespace suction
