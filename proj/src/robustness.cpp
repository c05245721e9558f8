#include "suction/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "suction/parallel.hpp"

namespace suction {

double TruncatedGaussian::sample(Rng& rng) const
{
    if (!(std == 0.0)) {
        std::normal_distribution<double> normal(mean, std);
        for (int attempt = 0; attempt < 10000; ++attempt) {
            const double x = normal(rng);
            if (x >= lower && x <= upper) return x;
        }
    }
    return std::clamp(mean, lower, upper);
}

void PerturbationSpec::validate() const
{
    const double stds[] = {friction.std, grasp_translation_std, grasp_rotation_std, pose_translation_std,
                           pose_rotation_std, com_std, wrench_force_std};
    for (const double s : stds) {
        if (!(s >= 0.0)) throw std::invalid_argument("perturbation standard deviations must be non-negative");
    }
    if (!(friction.lower <= friction.upper)) throw std::invalid_argument("friction bounds are inverted");
    if (samples < 1) throw std::invalid_argument("perturbation.samples must be at least 1");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("perturbation.threshold must lie in [0, 1]");
    if (!(mass > 0.0)) throw std::invalid_argument("perturbation.mass_kg must be positive");
}

PerturbationSpec PerturbationSpec::scaled(double factor) const
{
    PerturbationSpec s = *this;
    s.friction.std *= factor;
    s.grasp_translation_std *= factor;
    s.grasp_rotation_std *= factor;
    s.pose_translation_std *= factor;
    s.pose_rotation_std *= factor;
    s.com_std *= factor;
    s.wrench_force_std *= factor;
    return s;
}

PerturbationSpec PerturbationSpec::noiseless() const
{
    PerturbationSpec s = scaled(0.0);
    s.samples = 1;
    return s;
}

PerturbationSpec PerturbationSpec::preset(std::string_view name)
{
    PerturbationSpec s;
    if (name == "main") return s;
    if (name == "supplement") {
        s.friction.std = 0.001;
        return s;
    }
    throw std::invalid_argument("unknown perturbation preset '" + std::string(name) + "'");
}

namespace {

Vec3 gaussian3(Rng& rng, double std)
{
    if (std == 0.0) return Vec3::Zero();
    std::normal_distribution<double> n(0.0, std);
    const double x = n(rng);
    const double y = n(rng);
    const double z = n(rng);
    return {x, y, z};
}

}  // namespace

Perturbation sample_perturbation(const PerturbationSpec& spec, Rng& rng)
{
    Perturbation p;
    p.mu = spec.friction.sample(rng);
    p.grasp_translation = gaussian3(rng, spec.grasp_translation_std);
    p.grasp_rotation = gaussian3(rng, spec.grasp_rotation_std);
    p.pose_translation = gaussian3(rng, spec.pose_translation_std);
    p.pose_rotation = gaussian3(rng, spec.pose_rotation_std);
    p.com_offset = gaussian3(rng, spec.com_std);
    p.force_noise = gaussian3(rng, spec.wrench_force_std);
    return p;
}

Wrench disturbing_wrench(const PerturbationSpec& spec, const Perturbation& pert, const Vec3& com,
                         const Vec3& gravity_direction)
{
    const Vec3 force = spec.mass * kGravity * gravity_direction.normalized() + pert.force_noise;
    return wrench_at(force, com + pert.com_offset);
}

std::optional<SuctionGrasp> anchor_grasp(const Mesh& mesh, const Vec3& point, const Vec3& approach)
{
    const Vec3 v = approach.normalized();
    const double standoff = mesh.bounds().diagonal() + (point - mesh.bounds().center()).norm() + 1e-3;
    const auto hit = ray_intersect(mesh, point - standoff * v, v);
    if (!hit) return std::nullopt;
    return SuctionGrasp{hit->point, v};
}

std::string_view to_string(TrialOutcome o)
{
    switch (o) {
    case TrialOutcome::Success: return "success";
    case TrialOutcome::Miss: return "miss";
    case TrialOutcome::SealFailed: return "seal_failed";
    case TrialOutcome::NotResisted: return "not_resisted";
    }
    return "unknown";
}

void RobustnessResult::write_csv(std::ostream& out) const
{
    out << "trial,seed,px,py,pz,vx,vy,vz,mu,outcome,seal,max_strain,epsilon,success\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << i << ',' << r.seed << ',' << r.grasp.point.x() << ',' << r.grasp.point.y() << ','
            << r.grasp.point.z() << ',' << r.grasp.approach.x() << ',' << r.grasp.approach.y() << ','
            << r.grasp.approach.z() << ',' << r.mu << ',' << to_string(r.outcome) << ',' << to_string(r.seal)
            << ',' << r.max_strain << ',' << r.epsilon << ',' << (r.success ? 1 : 0) << '\n';
    }
}

TrialRecord evaluate_trial(const EvaluationOptions& options, const GraspScene& scene, const SuctionGrasp& grasp,
                           const PerturbationSpec& spec, const Perturbation& pert)
{
    const Mesh& mesh = *scene.mesh;
    TrialRecord rec;
    rec.mu = pert.mu;

    // Gripper error, then the object's pose error seen from the object frame.
    const Vec3 p = grasp.point + pert.grasp_translation;
    const Vec3 v = so3_exp(pert.grasp_rotation) * grasp.approach.normalized();
    const RigidTransform to_object = pert.pose().inverse();
    const Vec3 gravity = to_object.apply_direction(scene.gravity_direction);

    const auto anchored = anchor_grasp(mesh, to_object.apply(p), to_object.apply_direction(v));
    if (!anchored) {
        rec.grasp = SuctionGrasp{to_object.apply(p), to_object.apply_direction(v)};
        rec.outcome = TrialOutcome::Miss;
        rec.seal = SealFailure::VertexMiss;
        rec.max_strain = std::numeric_limits<double>::infinity();
        rec.epsilon = std::numeric_limits<double>::infinity();
        return rec;
    }
    rec.grasp = *anchored;
    const SealResult seal = check_seal(options.cup, rec.grasp, mesh, options.seal);
    rec.seal = seal.failure;
    rec.max_strain = seal.max_strain;
    if (!seal.feasible) {
        rec.outcome = TrialOutcome::SealFailed;
        rec.epsilon = std::numeric_limits<double>::infinity();
        return rec;
    }
    const Wrench w = disturbing_wrench(spec, pert, mesh.center_of_mass(), gravity);
    const ResistanceResult res = options.contact.resist(contact_frame(rec.grasp.point, rec.grasp.approach), w, pert.mu);
    rec.epsilon = res.epsilon;
    rec.success = res.resists;
    rec.outcome = res.resists ? TrialOutcome::Success : TrialOutcome::NotResisted;
    return rec;
}

RobustnessResult robust_wrench_resistance(const EvaluationOptions& options, const GraspScene& scene,
                                          const SuctionGrasp& grasp, const PerturbationSpec& spec,
                                          std::uint64_t seed)
{
    spec.validate();
    if (scene.mesh == nullptr) throw std::invalid_argument("robustness: scene has no mesh");
    const int J = spec.samples;
    const bool keep = J <= kMaxTrialRecords;
    std::vector<TrialRecord> records(keep ? static_cast<std::size_t>(J) : 0);
    std::vector<char> success(static_cast<std::size_t>(J), 0);
    parallel_for(J, options.workers, [&](int j) {
        const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(j)});
        Rng rng(s);
        const Perturbation pert = sample_perturbation(spec, rng);
        TrialRecord rec = evaluate_trial(options, scene, grasp, spec, pert);
        rec.seed = s;
        success[static_cast<std::size_t>(j)] = rec.success ? 1 : 0;
        if (keep) records[static_cast<std::size_t>(j)] = std::move(rec);
    });
    RobustnessResult out;
    out.trials = J;
    for (const char c : success) out.successes += c;
    out.lambda = static_cast<double>(out.successes) / J;
    out.records = std::move(records);
    return out;
}

bool wrench_resistance_metric(const EvaluationOptions& options, const GraspScene& scene,
                              const SuctionGrasp& grasp, const PerturbationSpec& spec)
{
    Perturbation nominal;
    nominal.mu = std::clamp(spec.friction.mean, spec.friction.lower, spec.friction.upper);
    return evaluate_trial(options, scene, grasp, spec, nominal).success;
}

int binary_label(double lambda, double tau)
{
    return lambda >= tau ? 1 : 0;
}

}  // namespace suction
