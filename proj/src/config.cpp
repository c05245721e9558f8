#include "suction/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

namespace suction {

ConfigError::ConfigError(const std::string& message, int line_no)
    : std::runtime_error(line_no > 0 ? "config line " + std::to_string(line_no) + ": " + message : message),
      line(line_no)
{
}

namespace {

using Value = std::variant<double, bool, std::string>;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Value parse_value(const std::string& raw, int line)
{
    if (raw.empty()) throw ConfigError("missing value", line);
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') throw ConfigError("unterminated string", line);
        return raw.substr(1, raw.size() - 2);
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0' || errno == ERANGE) throw ConfigError("cannot parse value '" + raw + "'", line);
    return d;
}

std::string strip_comment(const std::string& line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

struct Binder {
    RunConfig& c;
    std::map<std::string, std::function<void(const Value&, int)>> setters;

    static double number(const Value& v, int line)
    {
        if (!std::holds_alternative<double>(v)) throw ConfigError("expected a number", line);
        return std::get<double>(v);
    }
    static int integer(const Value& v, int line)
    {
        const double d = number(v, line);
        if (d != static_cast<double>(static_cast<long long>(d)) || d < -2147483648.0 || d > 2147483647.0) {
            throw ConfigError("expected an integer", line);
        }
        return static_cast<int>(d);
    }
    static bool boolean(const Value& v, int line)
    {
        if (!std::holds_alternative<bool>(v)) throw ConfigError("expected true or false", line);
        return std::get<bool>(v);
    }
    static std::string string(const Value& v, int line)
    {
        if (!std::holds_alternative<std::string>(v)) throw ConfigError("expected a quoted string", line);
        return std::get<std::string>(v);
    }

    void num(const std::string& key, double& target)
    {
        setters[key] = [&target](const Value& v, int l) { target = number(v, l); };
    }
    void integer_key(const std::string& key, int& target)
    {
        setters[key] = [&target](const Value& v, int l) { target = integer(v, l); };
    }

    explicit Binder(RunConfig& config) : c(config)
    {
        setters["seed"] = [this](const Value& v, int l) {
            const double d = number(v, l);
            if (d < 0 || d > 9007199254740992.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
                throw ConfigError("seed must be an integer in [0, 2^53]", l);
            }
            c.seed = static_cast<std::uint64_t>(d);
        };
        integer_key("workers", c.workers);
        setters["log_level"] = [this](const Value& v, int l) { c.log_level = string(v, l); };
        setters["preset"] = [](const Value&, int) {};   // applied before the other keys

        integer_key("cup.n", c.cup.n);
        num("cup.radius_m", c.cup.radius);
        num("cup.height_m", c.cup.height);
        num("cup.strain_limit", c.cup.strain_limit);

        integer_key("seal.samples_per_spring", c.seal.samples_per_spring);
        integer_key("seal.hole_grid", c.seal.hole_grid);
        integer_key("seal.collision_steps", c.seal.collision_steps);
        num("seal.ring_rotation_rad", c.seal.ring_rotation);

        setters["contact.model"] = [this](const Value& v, int l) {
            try {
                c.contact.kind = contact_kind_from_string(string(v, l));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what(), l);
            }
        };
        num("contact.mu", c.contact.ring.mu);
        setters["contact.mu"] = [this](const Value& v, int l) { c.contact.ring.mu = c.contact.soft.mu = number(v, l); };
        num("contact.kappa", c.contact.ring.kappa);
        num("contact.vacuum_force_n", c.contact.ring.vacuum);
        num("contact.gamma_m", c.contact.soft.gamma);
        num("contact.torque_scale_m", c.contact.settings.torque_scale);
        num("contact.resistance_tolerance", c.contact.settings.tolerance);
        integer_key("contact.max_iterations", c.contact.settings.qp.max_iterations);

        num("perturbation.friction_mean", c.perturbation.friction.mean);
        num("perturbation.friction_std", c.perturbation.friction.std);
        num("perturbation.friction_min", c.perturbation.friction.lower);
        num("perturbation.friction_max", c.perturbation.friction.upper);
        num("perturbation.grasp_translation_std", c.perturbation.grasp_translation_std);
        num("perturbation.grasp_rotation_std", c.perturbation.grasp_rotation_std);
        num("perturbation.pose_translation_std", c.perturbation.pose_translation_std);
        num("perturbation.pose_rotation_std", c.perturbation.pose_rotation_std);
        num("perturbation.com_std", c.perturbation.com_std);
        num("perturbation.wrench_force_std", c.perturbation.wrench_force_std);
        num("perturbation.mass_kg", c.perturbation.mass);
        integer_key("perturbation.samples", c.perturbation.samples);
        num("perturbation.threshold", c.perturbation.threshold);

        num("camera.fx", c.intrinsics.fx);
        num("camera.fy", c.intrinsics.fy);
        num("camera.cx", c.intrinsics.cx);
        num("camera.cy", c.intrinsics.cy);
        integer_key("camera.width", c.intrinsics.width);
        integer_key("camera.height", c.intrinsics.height);
        num("camera.radius_min_m", c.camera.radius_min);
        num("camera.radius_max_m", c.camera.radius_max);
        num("camera.polar_min_rad", c.camera.polar_min);
        num("camera.polar_max_rad", c.camera.polar_max);

        setters["noise.multiplicative"] = [this](const Value& v, int l) { c.noise.multiplicative = boolean(v, l); };
        num("noise.gamma_shape", c.noise.gamma_shape);
        num("noise.gamma_scale", c.noise.gamma_scale);
        num("noise.sigma_m", c.noise.sigma);
        num("noise.bandwidth_px", c.noise.bandwidth_px);

        integer_key("cem.iterations", c.cem.iterations);
        integer_key("cem.candidates", c.cem.candidates);
        num("cem.elite_fraction", c.cem.elite_fraction);
        integer_key("cem.components", c.cem.components);
        num("cem.max_approach_angle_rad", c.constraints.max_approach_angle);
        integer_key("cem.normal_window", c.constraints.normal_window);
        num("cem.workspace_min_z_m", c.constraints.workspace_min.z());

        num("metric.disc_radius_m", c.metric.disc_radius);
        num("metric.planarity_threshold", c.metric.planarity_threshold);
        integer_key("metric.mesh_disc_grid", c.metric.mesh_disc_grid);

        integer_key("dataset.images_per_pose", c.dataset.images_per_pose);
        integer_key("dataset.grasps_per_object", c.dataset.grasps_per_object);
        integer_key("dataset.max_stable_poses", c.dataset.max_stable_poses);
        integer_key("dataset.thumbnail_side", c.dataset.thumbnail_side);
        num("dataset.planar_range_m", c.dataset.planar_range);
        num("dataset.visibility_tolerance_m", c.dataset.visibility_tolerance);
        integer_key("dataset.shard_size", c.dataset.shard_size);
        num("dataset.mesh_scale", c.dataset.mesh_scale);
    }
};

void apply_preset(RunConfig& c, const std::string& name, int line)
{
    if (name == "main") {
        c.perturbation = PerturbationSpec::preset("main");
        c.camera = CameraSampling{};
    } else if (name == "supplement") {
        c.perturbation = PerturbationSpec::preset("supplement");
        c.camera.radius_min = 0.65;
        c.camera.radius_max = 0.75;
        c.camera.polar_min = 0.05 * 3.14159265358979323846;
        c.camera.polar_max = 0.1 * 3.14159265358979323846;
    } else {
        throw ConfigError("unknown preset '" + name + "'", line);
    }
    c.preset = name;
}

}  // namespace

void RunConfig::validate() const
{
    try {
        cup.validate();
        contact.ring.validate();
        contact.soft.validate();
        perturbation.validate();
        intrinsics.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (seal.samples_per_spring < 0 || seal.hole_grid < 1 || seal.collision_steps < 1) {
        throw ConfigError("seal sampling counts out of range");
    }
    if (!(contact.settings.torque_scale > 0.0) || !(contact.settings.tolerance >= 0.0)) {
        throw ConfigError("contact.torque_scale_m must be positive and resistance_tolerance non-negative");
    }
    if (!(camera.radius_min > 0.0 && camera.radius_min <= camera.radius_max && camera.polar_min >= 0.0 &&
          camera.polar_min <= camera.polar_max)) {
        throw ConfigError("camera sampling bounds are invalid");
    }
    if (!(noise.sigma >= 0.0 && noise.gamma_shape > 0.0 && noise.gamma_scale > 0.0 && noise.bandwidth_px > 0.0)) {
        throw ConfigError("noise parameters out of range");
    }
    if (cem.iterations < 0 || cem.candidates < 1 || !(cem.elite_fraction > 0.0 && cem.elite_fraction <= 1.0) ||
        cem.components < 1 || constraints.normal_window < 3) {
        throw ConfigError("cem parameters out of range");
    }
    if (dataset.images_per_pose < 0 || dataset.grasps_per_object < 0 || dataset.max_stable_poses < 0 ||
        dataset.thumbnail_side < 1 || dataset.shard_size < 1 || !(dataset.planar_range >= 0.0) ||
        !(dataset.visibility_tolerance >= 0.0) || !(dataset.mesh_scale > 0.0)) {
        throw ConfigError("dataset parameters out of range");
    }
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (log_level != "debug" && log_level != "info" && log_level != "warn" && log_level != "error") {
        throw ConfigError("log_level must be one of debug, info, warn, error");
    }
}

EvaluationOptions RunConfig::evaluation_options() const
{
    EvaluationOptions o;
    o.cup = cup;
    o.seal = seal;
    o.contact = contact;
    o.contact.ring.radius = cup.radius;
    o.workers = workers;
    return o;
}

RunConfig parse_config(const std::string& text)
{
    struct Entry {
        std::string key;
        Value value;
        int line;
    };
    std::vector<Entry> entries;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("missing key", line_no);
        const std::string full = section.empty() ? key : section + "." + key;
        if (seen.count(full)) throw ConfigError("duplicate key '" + full + "'", line_no);
        seen[full] = line_no;
        entries.push_back({full, parse_value(trim(line.substr(eq + 1)), line_no), line_no});
    }

    RunConfig config;
    for (const auto& e : entries) {
        if (e.key == "preset") apply_preset(config, Binder::string(e.value, e.line), e.line);
    }
    Binder binder(config);
    for (const auto& e : entries) {
        const auto it = binder.setters.find(e.key);
        if (it == binder.setters.end()) throw ConfigError("unknown key '" + e.key + "'", e.line);
        it->second(e.value, e.line);
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_config_text(const RunConfig& c)
{
    std::string out;
    auto num = [&](const char* key, double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += std::string(key) + " = " + buf + "\n";
    };
    auto str = [&](const char* key, const std::string& v) { out += std::string(key) + " = \"" + v + "\"\n"; };
    auto boolean = [&](const char* key, bool v) { out += std::string(key) + " = " + (v ? "true" : "false") + "\n"; };
    auto section = [&](const char* name) { out += std::string("\n[") + name + "]\n"; };

    str("preset", c.preset);
    num("seed", static_cast<double>(c.seed));
    num("workers", c.workers);
    str("log_level", c.log_level);
    section("cup");
    num("n", c.cup.n);
    num("radius_m", c.cup.radius);
    num("height_m", c.cup.height);
    num("strain_limit", c.cup.strain_limit);
    section("seal");
    num("samples_per_spring", c.seal.samples_per_spring);
    num("hole_grid", c.seal.hole_grid);
    num("collision_steps", c.seal.collision_steps);
    num("ring_rotation_rad", c.seal.ring_rotation);
    section("contact");
    str("model", std::string(to_string(c.contact.kind)));
    num("mu", c.contact.ring.mu);
    num("kappa", c.contact.ring.kappa);
    num("vacuum_force_n", c.contact.ring.vacuum);
    num("gamma_m", c.contact.soft.gamma);
    num("torque_scale_m", c.contact.settings.torque_scale);
    num("resistance_tolerance", c.contact.settings.tolerance);
    num("max_iterations", c.contact.settings.qp.max_iterations);
    section("perturbation");
    num("friction_mean", c.perturbation.friction.mean);
    num("friction_std", c.perturbation.friction.std);
    num("friction_min", c.perturbation.friction.lower);
    num("friction_max", c.perturbation.friction.upper);
    num("grasp_translation_std", c.perturbation.grasp_translation_std);
    num("grasp_rotation_std", c.perturbation.grasp_rotation_std);
    num("pose_translation_std", c.perturbation.pose_translation_std);
    num("pose_rotation_std", c.perturbation.pose_rotation_std);
    num("com_std", c.perturbation.com_std);
    num("wrench_force_std", c.perturbation.wrench_force_std);
    num("mass_kg", c.perturbation.mass);
    num("samples", c.perturbation.samples);
    num("threshold", c.perturbation.threshold);
    section("camera");
    num("fx", c.intrinsics.fx);
    num("fy", c.intrinsics.fy);
    num("cx", c.intrinsics.cx);
    num("cy", c.intrinsics.cy);
    num("width", c.intrinsics.width);
    num("height", c.intrinsics.height);
    num("radius_min_m", c.camera.radius_min);
    num("radius_max_m", c.camera.radius_max);
    num("polar_min_rad", c.camera.polar_min);
    num("polar_max_rad", c.camera.polar_max);
    section("noise");
    boolean("multiplicative", c.noise.multiplicative);
    num("gamma_shape", c.noise.gamma_shape);
    num("gamma_scale", c.noise.gamma_scale);
    num("sigma_m", c.noise.sigma);
    num("bandwidth_px", c.noise.bandwidth_px);
    section("cem");
    num("iterations", c.cem.iterations);
    num("candidates", c.cem.candidates);
    num("elite_fraction", c.cem.elite_fraction);
    num("components", c.cem.components);
    num("max_approach_angle_rad", c.constraints.max_approach_angle);
    num("normal_window", c.constraints.normal_window);
    num("workspace_min_z_m", c.constraints.workspace_min.z());
    section("metric");
    num("disc_radius_m", c.metric.disc_radius);
    num("planarity_threshold", c.metric.planarity_threshold);
    num("mesh_disc_grid", c.metric.mesh_disc_grid);
    section("dataset");
    num("images_per_pose", c.dataset.images_per_pose);
    num("grasps_per_object", c.dataset.grasps_per_object);
    num("max_stable_poses", c.dataset.max_stable_poses);
    num("thumbnail_side", c.dataset.thumbnail_side);
    num("planar_range_m", c.dataset.planar_range);
    num("visibility_tolerance_m", c.dataset.visibility_tolerance);
    num("shard_size", c.dataset.shard_size);
    num("mesh_scale", c.dataset.mesh_scale);
    return out;
}

}  // namespace suction
