#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "suction/contact.hpp"
#include "suction/grasp.hpp"
#include "suction/mesh.hpp"
#include "suction/rng.hpp"
#include "suction/seal.hpp"

namespace suction {

struct TruncatedGaussian {
    double mean = 0.5;
    double std = 0.1;
    double lower = 0.0;
    double upper = 1.0;

    double sample(Rng& rng) const;
};

/// Noise model for robust wrench resistance. Standard deviations are per
/// axis; the defaults are the square roots of the isotropic covariances.
struct PerturbationSpec {
    TruncatedGaussian friction;
    double grasp_translation_std = 0.0316227766016838;  // sqrt(0.001) m
    double grasp_rotation_std = 0.316227766016838;      // sqrt(0.1) rad
    double pose_translation_std = 0.0316227766016838;
    double pose_rotation_std = 0.316227766016838;
    double com_std = 0.05;                              // sqrt(0.0025) m
    double wrench_force_std = 0.1;                      // sqrt(0.01) N
    double mass = 1.0;
    int samples = 100;
    double threshold = 0.5;

    void validate() const;
    /// Copy with every noise standard deviation multiplied by `factor`.
    PerturbationSpec scaled(double factor) const;
    /// Everything deterministic: friction fixed at its mean, no noise.
    PerturbationSpec noiseless() const;

    /// "main" or "supplement".
    static PerturbationSpec preset(std::string_view name);
};

struct Perturbation {
    double mu = 0.5;
    Vec3 grasp_translation = Vec3::Zero();
    Vec3 grasp_rotation = Vec3::Zero();
    Vec3 pose_translation = Vec3::Zero();
    Vec3 pose_rotation = Vec3::Zero();
    Vec3 com_offset = Vec3::Zero();
    Vec3 force_noise = Vec3::Zero();

    RigidTransform pose() const { return RigidTransform::from_perturbation(pose_translation, pose_rotation); }
};

Perturbation sample_perturbation(const PerturbationSpec& spec, Rng& rng);

/// Gravity on the perturbed centre of mass plus force noise, about the
/// origin of the frame in which `com` and `gravity_direction` are given.
Wrench disturbing_wrench(const PerturbationSpec& spec, const Perturbation& pert, const Vec3& com,
                         const Vec3& gravity_direction);

/// Static world: the mesh, its centre of mass and the gravity direction all
/// in the same (object) frame.
struct GraspScene {
    const Mesh* mesh = nullptr;
    Vec3 gravity_direction = Vec3(0.0, 0.0, -1.0);
};

/// First surface point hit along `approach` from well outside the mesh.
std::optional<SuctionGrasp> anchor_grasp(const Mesh& mesh, const Vec3& point, const Vec3& approach);

enum class TrialOutcome { Success, Miss, SealFailed, NotResisted };

std::string_view to_string(TrialOutcome o);

struct TrialRecord {
    std::uint64_t seed = 0;
    SuctionGrasp grasp;
    double mu = 0.0;
    TrialOutcome outcome = TrialOutcome::Miss;
    SealFailure seal = SealFailure::None;
    double max_strain = 0.0;
    double epsilon = 0.0;
    bool success = false;
};

struct RobustnessResult {
    double lambda = 0.0;
    int successes = 0;
    int trials = 0;
    std::vector<TrialRecord> records;

    void write_csv(std::ostream& out) const;
};

/// Records are kept for J up to this many trials.
inline constexpr int kMaxTrialRecords = 10000;

struct EvaluationOptions {
    CupModel cup;
    SealSettings seal;
    ContactModel contact;
    int workers = 1;
};

/// One deterministic seal + resistance evaluation under the given perturbation.
TrialRecord evaluate_trial(const EvaluationOptions& options, const GraspScene& scene, const SuctionGrasp& grasp,
                           const PerturbationSpec& spec, const Perturbation& pert);

RobustnessResult robust_wrench_resistance(const EvaluationOptions& options, const GraspScene& scene,
                                          const SuctionGrasp& grasp, const PerturbationSpec& spec,
                                          std::uint64_t seed);

/// Noiseless seal + resistance of the nominal grasp against nominal gravity.
bool wrench_resistance_metric(const EvaluationOptions& options, const GraspScene& scene,
                              const SuctionGrasp& grasp, const PerturbationSpec& spec);

/// 1 iff lambda >= tau.
int binary_label(double lambda, double tau);
inline int binary_label(const RobustnessResult& r, double tau) { return binary_label(r.lambda, tau); }

}  // namespace suction
