#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "suction/config.hpp"
#include "suction/dataset.hpp"
#include "suction/metrics.hpp"
#include "suction/plotdata.hpp"
#include "suction/policy.hpp"
#include "suction/robustness.hpp"
#include "suction/stable_pose.hpp"

namespace fs = std::filesystem;
using namespace suction;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Level { Debug, Info, Warn, Error };
Level g_level = Level::Info;

Level parse_level(const std::string& s)
{
    if (s == "debug") return Level::Debug;
    if (s == "warn") return Level::Warn;
    if (s == "error") return Level::Error;
    return Level::Info;
}

void log(Level level, const std::string& msg)
{
    static const char* names[] = {"debug", "info", "warn", "error"};
    if (level >= g_level) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string log_level;

    void add(CLI::App* app)
    {
        app->add_option("--config", config_path, "TOML-style configuration file");
        app->add_option("--seed", seed, "Random seed (overrides the config)");
        app->add_option("--workers", workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
        app->add_option("--log-level", log_level, "debug, info, warn or error");
    }

    RunConfig load() const
    {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed) c.seed = *seed;
        if (workers) c.workers = *workers;
        if (!log_level.empty()) c.log_level = log_level;
        c.validate();
        g_level = parse_level(c.log_level);
        return c;
    }
};

Vec3 to_vec(const std::vector<double>& v, const char* what)
{
    if (v.size() != 3) throw UsageError(std::string(what) + " needs three values");
    return {v[0], v[1], v[2]};
}

nlohmann::json vec_json(const Vec3& v)
{
    return nlohmann::json::array({v.x(), v.y(), v.z()});
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Mesh placed in the requested stable pose (or left as loaded when pose < 0).
Mesh posed_mesh(const Mesh& mesh, int pose)
{
    if (pose < 0) return mesh;
    const auto poses = stable_poses(mesh);
    if (pose >= static_cast<int>(poses.size())) {
        throw UsageError("stable pose index " + std::to_string(pose) + " out of range (" + std::to_string(poses.size()) + " poses)");
    }
    return mesh.transformed(poses[static_cast<std::size_t>(pose)].transform);
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    Common common;
    std::string mesh;
    double scale = 1.0;
    int pose = -1;
    std::vector<double> point;
    std::vector<double> approach;
    int sample = 0;
    std::string metric;
    std::string json_out;
    std::string trials_csv;
};

int cmd_analyze(const AnalyzeArgs& a)
{
    const RunConfig config = a.common.load();
    const Mesh mesh = posed_mesh(load_mesh(a.mesh, a.scale), a.pose);
    if (mesh.degenerate_removed() > 0) log(Level::Warn, std::to_string(mesh.degenerate_removed()) + " degenerate triangles removed");
    if (!mesh.watertight()) log(Level::Warn, "mesh is not watertight");

    std::vector<SuctionGrasp> grasps;
    if (!a.point.empty()) {
        const Vec3 p = to_vec(a.point, "--point");
        const Vec3 v = a.approach.empty() ? Vec3(0, 0, -1) : to_vec(a.approach, "--approach");
        if (v.norm() < 1e-12) throw UsageError("--approach must be nonzero");
        grasps.push_back({p, v.normalized()});
    }
    if (a.sample > 0) {
        Rng rng = make_rng(config.seed, {0x616e616c});
        for (const auto& s : sample_surface(mesh, a.sample, rng)) grasps.push_back({s.point, s.inward_normal});
    }
    if (grasps.empty()) throw UsageError("give --point/--approach or --sample N");

    const EvaluationOptions options = config.evaluation_options();
    const GraspScene scene{&mesh, Vec3(0, 0, -1)};
    std::optional<MetricKind> metric;
    QualityFn quality;
    if (!a.metric.empty()) {
        try {
            metric = metric_kind_from_string(a.metric);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        MetricParams params = config.metric;
        params.seed = config.seed;
        quality = make_mesh_metric(*metric, mesh, options, config.perturbation, scene.gravity_direction, params);
    }

    struct Row {
        SuctionGrasp grasp;
        SealResult seal;
        double epsilon = 0.0;
        bool wr = false;
        RobustnessResult robust;
        double score = 0.0;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < grasps.size(); ++i) {
        Row r;
        r.grasp = grasps[i];
        r.seal = check_seal(config.cup, r.grasp, mesh, config.seal);
        r.epsilon = std::numeric_limits<double>::infinity();
        if (r.seal.feasible) {
            const Wrench w = gravity_wrench(mesh.center_of_mass(), scene.gravity_direction, config.perturbation.mass);
            const auto res = options.contact.resist(contact_frame(r.grasp.point, r.grasp.approach), w,
                                                    std::clamp(config.perturbation.friction.mean, 0.0, 1.0));
            r.epsilon = res.epsilon;
            r.wr = res.resists;
        }
        r.robust = robust_wrench_resistance(options, scene, r.grasp, config.perturbation, derive_seed(config.seed, {i}));
        if (quality) r.score = quality(r.grasp);
        rows.push_back(std::move(r));
    }
    if (metric) {
        std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.score > y.score; });
    }

    std::printf("%-4s %-28s %-24s %-16s %-10s %-11s %-3s %-7s %-5s%s\n", "#", "point", "approach", "seal", "strain",
                "epsilon", "wr", "lambda", "label", metric ? "  score" : "");
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const int label = binary_label(r.robust, config.perturbation.threshold);
        std::printf("%-4zu (%8.4f,%8.4f,%8.4f) (%6.3f,%6.3f,%6.3f) %-16s %-10.3g %-11.3g %-3d %-7.3f %-5d", i,
                    r.grasp.point.x(), r.grasp.point.y(), r.grasp.point.z(), r.grasp.approach.x(), r.grasp.approach.y(),
                    r.grasp.approach.z(), std::string(to_string(r.seal.failure)).c_str(), r.seal.max_strain, r.epsilon,
                    r.wr ? 1 : 0, r.robust.lambda, label);
        if (metric) std::printf("  %.6g", r.score);
        std::printf("\n");
        nlohmann::json j = {{"point", vec_json(r.grasp.point)},
                            {"approach", vec_json(r.grasp.approach)},
                            {"seal_feasible", r.seal.feasible},
                            {"seal_failure", std::string(to_string(r.seal.failure))},
                            {"max_strain", std::isfinite(r.seal.max_strain) ? nlohmann::json(r.seal.max_strain) : nlohmann::json(nullptr)},
                            {"epsilon", std::isfinite(r.epsilon) ? nlohmann::json(r.epsilon) : nlohmann::json(nullptr)},
                            {"wrench_resistance", r.wr},
                            {"lambda", r.robust.lambda},
                            {"trials", r.robust.trials},
                            {"label", label}};
        if (metric) j["score"] = r.score;
        out.push_back(j);
    }
    if (!a.json_out.empty()) {
        std::ofstream f(a.json_out);
        if (!f) throw std::runtime_error("cannot write " + a.json_out);
        f << out.dump(2) << '\n';
    }
    if (!a.trials_csv.empty()) {
        std::ofstream f(a.trials_csv);
        if (!f) throw std::runtime_error("cannot write " + a.trials_csv);
        rows.front().robust.write_csv(f);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
    Common common;
    std::string depth;
    std::string camera;
    std::string metric = "planarity_centroid";
    std::string mesh;
    double scale = 1.0;
    std::optional<int> cem_iters;
    std::string out;
};

int cmd_plan(const PlanArgs& a)
{
    RunConfig config = a.common.load();
    if (a.cem_iters) config.cem.iterations = *a.cem_iters;
    const DepthImage img = load_depth(a.depth);
    const Camera camera = load_camera(a.camera);
    if (img.width != camera.intrinsics.width || img.height != camera.intrinsics.height) {
        throw UsageError("depth image size does not match the camera intrinsics");
    }
    MetricKind kind;
    try {
        kind = metric_kind_from_string(a.metric);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const SurfacePool pool = surface_pool_from_depth(img, camera, config.constraints);
    if (pool.empty()) throw std::runtime_error("no candidate points satisfy the approach constraints");
    log(Level::Info, std::to_string(pool.segment.size()) + " segmented points, " + std::to_string(pool.points.size()) + " admissible");

    MetricParams params = config.metric;
    params.seed = config.seed;
    std::optional<Mesh> mesh;
    QualityFn quality;
    const EvaluationOptions options = config.evaluation_options();
    if (kind == MetricKind::Planarity || kind == MetricKind::Centroid || kind == MetricKind::PlanarityCentroid) {
        quality = make_cloud_metric(kind, pool.segment, params);
    } else {
        if (a.mesh.empty()) throw UsageError("metric '" + a.metric + "' needs --mesh (world frame)");
        mesh.emplace(load_mesh(a.mesh, a.scale));
        quality = make_mesh_metric(kind, *mesh, options, config.perturbation, Vec3(0, 0, -1), params);
    }
    Rng rng = make_rng(config.seed, {0x706c616e});
    auto initial = sample_candidates(pool, config.cem.candidates, rng);
    CemSettings cem = config.cem;
    cem.workers = config.workers;
    const CemResult result = cem_plan(pool, std::move(initial), quality, config.constraints, cem, rng);
    const auto& b = result.best;
    nlohmann::json j = {{"point", vec_json(b.grasp.point)},
                        {"approach", vec_json(b.grasp.approach)},
                        {"quality", b.quality},
                        {"pixel", {b.pixel.x(), b.pixel.y()}},
                        {"metric", std::string(to_string(kind))},
                        {"evaluations", result.evaluations},
                        {"incumbent", result.incumbent}};
    std::cout << j.dump(2) << '\n';
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f) throw std::runtime_error("cannot write " + a.out);
        f << j.dump(2) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct RenderArgs {
    Common common;
    std::string mesh;
    double scale = 1.0;
    int pose = 0;
    std::string camera;
    double radius = 0.6;
    double azimuth = 0.0;
    double polar = 0.0;
    bool noise = false;
    std::string out;
};

int cmd_render(const RenderArgs& a)
{
    const RunConfig config = a.common.load();
    const Mesh world = posed_mesh(load_mesh(a.mesh, a.scale), a.pose);
    Camera camera;
    if (!a.camera.empty()) {
        camera = load_camera(a.camera);
    } else {
        camera.intrinsics = config.intrinsics;
        camera.world_from_camera = camera_pose_spherical(a.radius, a.azimuth, a.polar);
    }
    DepthImage img = render_depth(world, camera, RenderOptions{true, config.workers});
    if (a.noise) {
        Rng rng = make_rng(config.seed, {0x72656e64});
        NoiseReport report;
        img = corrupt_depth(img, config.noise, rng, &report);
        if (report.clamped > 0) log(Level::Warn, std::to_string(report.clamped) + " negative depths clamped");
    }
    if (const fs::path parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
    save_depth(img, a.out + ".bin");
    save_depth_png(img, a.out + ".png");
    save_camera(camera, a.out + ".camera.json");
    std::cout << "wrote " << a.out << ".bin, " << a.out << ".png, " << a.out << ".camera.json\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct DatasetArgs {
    Common common;
    std::string objects;
    std::string out;
    std::string manifest;
    std::string dir;
    double audit = 0.01;
};

int cmd_dataset_generate(const DatasetArgs& a)
{
    DatasetManifest m;
    if (!a.manifest.empty()) {
        if (a.out.empty()) throw UsageError("--out is required");
        m = regenerate_dataset(a.manifest, a.out, a.objects);
    } else {
        if (a.objects.empty() || a.out.empty()) throw UsageError("--objects and --out are required");
        const RunConfig config = a.common.load();
        const auto objects = load_objects(a.objects, config.dataset.mesh_scale, config.dataset.max_stable_poses);
        log(Level::Info, "loaded " + std::to_string(objects.size()) + " objects");
        m = generate_dataset(objects, a.objects, config, a.out);
    }
    std::cout << "tuples " << m.tuple_count << " shards " << m.shards.size() << " positive_fraction "
              << fmt("%.4f", m.positive_fraction()) << " (reference " << kReferencePositiveFraction << ")\n";
    return 0;
}

int cmd_dataset_verify(const DatasetArgs& a)
{
    const RunConfig config = a.common.load();
    const VerifyReport r = verify_dataset(a.dir, a.audit, config.seed, a.objects);
    std::cout << "shards " << r.shards << " tuples " << r.tuples << " audited " << r.audited << " label_mismatches "
              << r.label_mismatches << " lambda_mismatches " << r.lambda_mismatches << '\n';
    for (const auto& s : r.bad_shards) std::cout << "bad: " << s << '\n';
    std::cout << (r.ok() ? "OK" : "FAILED") << '\n';
    return r.ok() ? 0 : 1;
}

int cmd_dataset_stats(const DatasetArgs& a)
{
    const DatasetManifest m = DatasetManifest::load(fs::path(a.dir) / kManifestName);
    std::cout << "objects " << m.objects.size() << "\nshards " << m.shards.size() << "\ntuples " << m.tuple_count
              << "\npositives " << m.positive_count << "\npositive_fraction " << fmt("%.4f", m.positive_fraction())
              << "\nreference_positive_fraction " << kReferencePositiveFraction << '\n';
    std::vector<std::size_t> per(m.objects.size(), 0);
    for (const auto& s : m.shards) {
        if (s.object_id < per.size()) per[s.object_id] += s.tuples;
    }
    for (std::size_t i = 0; i < m.objects.size(); ++i) {
        std::cout << "object " << i << ' ' << m.objects[i].name << " poses " << m.objects[i].pose_probabilities.size()
                  << " tuples " << per[i] << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct PlotArgs {
    std::string input;
    std::string out;
};

int cmd_plotdata(const PlotArgs& a)
{
    const fs::path in(a.input);
    const auto data = fs::is_directory(in) ? read_dataset_scores(in) : read_scored_csv(in);
    if (data.empty()) throw std::runtime_error("input has no samples");
    const auto curve = precision_recall_curve(data);
    if (a.out.empty()) {
        write_curve_csv(std::cout, curve);
    } else {
        std::ofstream f(a.out);
        if (!f) throw std::runtime_error("cannot write " + a.out);
        write_curve_csv(f, curve);
    }
    std::cerr << "average_precision " << fmt("%.6f", average_precision(curve)) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Suction grasp analysis, planning and dataset generation"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Seal, wrench resistance and robustness of grasps on a mesh");
    analyze.common.add(an);
    an->add_option("--mesh", analyze.mesh, "OBJ or binary STL mesh")->required()->check(CLI::ExistingFile);
    an->add_option("--scale", analyze.scale, "Scale applied to mesh coordinates");
    an->add_option("--pose", analyze.pose, "Place the mesh in this stable pose first");
    an->add_option("--point", analyze.point, "Grasp target x y z")->expected(3);
    an->add_option("--approach", analyze.approach, "Approach direction x y z")->expected(3);
    an->add_option("--sample", analyze.sample, "Evaluate N surface-sampled grasps")->check(CLI::NonNegativeNumber);
    an->add_option("--metric", analyze.metric, "Rank grasps by a quality metric (planarity, centroid, pc3d, ss, wr, rwr)");
    an->add_option("--json", analyze.json_out, "Write the report as JSON");
    an->add_option("--trials-csv", analyze.trials_csv, "Write per-trial records of the first grasp");

    PlanArgs plan;
    auto* pl = app.add_subcommand("plan", "Plan a grasp from a depth image with the cross-entropy method");
    plan.common.add(pl);
    pl->add_option("--depth", plan.depth, "Depth image (.bin with .json sidecar)")->required()->check(CLI::ExistingFile);
    pl->add_option("--camera", plan.camera, "Camera JSON file")->required()->check(CLI::ExistingFile);
    pl->add_option("--metric", plan.metric, "Quality metric");
    pl->add_option("--mesh", plan.mesh, "World-frame mesh for mesh-based metrics");
    pl->add_option("--scale", plan.scale, "Scale applied to mesh coordinates");
    pl->add_option("--cem-iters", plan.cem_iters, "CEM iterations")->check(CLI::NonNegativeNumber);
    pl->add_option("--out", plan.out, "Write the chosen grasp as JSON");

    RenderArgs render;
    auto* re = app.add_subcommand("render", "Render a depth image of a mesh resting on the table");
    render.common.add(re);
    re->add_option("--mesh", render.mesh, "OBJ or binary STL mesh")->required()->check(CLI::ExistingFile);
    re->add_option("--scale", render.scale, "Scale applied to mesh coordinates");
    re->add_option("--pose", render.pose, "Stable pose index (-1 keeps the mesh frame)");
    re->add_option("--camera", render.camera, "Camera JSON file");
    re->add_option("--radius", render.radius, "Camera distance from the table centre (m)");
    re->add_option("--azimuth", render.azimuth, "Camera azimuth (rad)");
    re->add_option("--polar", render.polar, "Camera polar angle (rad)");
    re->add_flag("--noise", render.noise, "Apply the depth noise model");
    re->add_option("--out", render.out, "Output prefix")->required();

    DatasetArgs gen, ver, stats;
    auto* ds = app.add_subcommand("dataset", "Synthetic dataset generation and inspection");
    ds->require_subcommand(1);
    auto* dg = ds->add_subcommand("generate", "Generate a dataset");
    gen.common.add(dg);
    dg->add_option("--objects", gen.objects, "Directory of object meshes");
    dg->add_option("--out", gen.out, "Output directory");
    dg->add_option("--manifest", gen.manifest, "Regenerate from an existing manifest")->check(CLI::ExistingFile);
    auto* dv = ds->add_subcommand("verify", "Check shard checksums and audit labels");
    ver.common.add(dv);
    dv->add_option("--dir", ver.dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    dv->add_option("--audit", ver.audit, "Fraction of tuples to re-label")->check(CLI::Range(0.0, 1.0));
    dv->add_option("--objects", ver.objects, "Object directory (defaults to the manifest's)");
    auto* dst = ds->add_subcommand("stats", "Print counts and positive fraction");
    dst->add_option("--dir", stats.dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);

    PlotArgs plot;
    auto* pd = app.add_subcommand("plotdata", "Precision/recall and success/attempt-rate series");
    pd->add_option("--input", plot.input, "CSV of lambda,label or a dataset directory")->required()->check(CLI::ExistingPath);
    pd->add_option("--out", plot.out, "Output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (an->parsed()) return cmd_analyze(analyze);
        if (pl->parsed()) return cmd_plan(plan);
        if (re->parsed()) return cmd_render(render);
        if (dg->parsed()) return cmd_dataset_generate(gen);
        if (dv->parsed()) return cmd_dataset_verify(ver);
        if (dst->parsed()) return cmd_dataset_stats(stats);
        if (pd->parsed()) return cmd_plotdata(plot);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
