#include "owcsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "owcsim/error.hpp"

namespace owcsim {
namespace {

// Collects issues while walking the YAML tree so one load reports them all.
class Reader
{
public:
    std::vector<ConfigIssue> issues;

    void reject_unknown(const YAML::Node& node, const std::string& path,
                        std::initializer_list<const char*> allowed)
    {
        if (!node.IsMap()) {
            return;
        }
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!keys.count(key)) {
                issues.push_back({join(path, key), "unknown key"});
            }
        }
    }

    YAML::Node section(const YAML::Node& parent, const std::string& path, const char* key,
                       bool required)
    {
        const YAML::Node node = parent[key];
        if (!node) {
            if (required) {
                issues.push_back({join(path, key), "missing required section"});
            }
            return YAML::Node();
        }
        if (!node.IsMap()) {
            issues.push_back({join(path, key), "expected a mapping"});
            return YAML::Node();
        }
        return node;
    }

    template <class T>
    void read(const YAML::Node& parent, const std::string& path, const char* key, T& out,
              bool required)
    {
        if (!parent) {
            return;
        }
        const YAML::Node node = parent[key];
        if (!node) {
            if (required) {
                issues.push_back({join(path, key), "missing required key"});
            }
            return;
        }
        try {
            out = node.as<T>();
        }
        catch (const YAML::Exception&) {
            issues.push_back({join(path, key), std::string("expected ") + type_name<T>()});
        }
    }

    // A list of reals, or a {start, stop, step} range (stop inclusive).
    void read_grid(const YAML::Node& parent, const std::string& path, const char* key,
                   std::vector<double>& out, bool required)
    {
        if (!parent) {
            return;
        }
        const YAML::Node node = parent[key];
        const std::string where = join(path, key);
        if (!node) {
            if (required) {
                issues.push_back({where, "missing required key"});
            }
            return;
        }
        try {
            if (node.IsSequence()) {
                out.clear();
                for (const auto& v : node) {
                    out.push_back(v.as<double>());
                }
            }
            else if (node.IsMap()) {
                reject_unknown(node, where, {"start", "stop", "step"});
                if (!node["start"] || !node["stop"] || !node["step"]) {
                    issues.push_back({where, "range needs start, stop and step"});
                    return;
                }
                const double start = node["start"].as<double>();
                const double stop = node["stop"].as<double>();
                const double step = node["step"].as<double>();
                if (!(step > 0.0) || !(stop >= start)) {
                    issues.push_back({where, "range needs step > 0 and stop >= start"});
                    return;
                }
                out.clear();
                const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
                for (std::size_t i = 0; i <= count; ++i) {
                    // Round to 12 decimals so 0.1-style steps land on clean values.
                    out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
                }
            }
            else {
                out = {node.as<double>()};
            }
        }
        catch (const YAML::Exception&) {
            issues.push_back({where, "expected a number, a list of numbers or a range"});
        }
    }

    static std::string join(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }

private:
    template <class T>
    static const char* type_name()
    {
        if constexpr (std::is_same_v<T, double>) {
            return "a number";
        }
        else if constexpr (std::is_integral_v<T>) {
            return "an integer";
        }
        else {
            return "a string";
        }
    }
};

std::string format_name(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }
std::string estimator_name(Estimator e) { return e == Estimator::power ? "power" : "oracle"; }
std::string preamble_name(PreambleFov p) { return p == PreambleFov::wide ? "wide" : "current"; }

}  // namespace

std::vector<double> RunConfig::pa_per_frame() const
{
    std::vector<double> out;
    for (const auto& seg : trajectory) {
        out.insert(out.end(), seg.frames, seg.pa);
    }
    return out;
}

void RunConfig::validate() const
{
    std::vector<ConfigIssue> issues;
    try {
        scenario.validate();
    }
    catch (const ConfigError& e) {
        issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
    if (schema != kConfigSchemaVersion) {
        issues.push_back({"schema", fmt::format("unsupported schema version {} (expected {})",
                                                schema, kConfigSchemaVersion)});
    }
    if (slots < 1) {
        issues.push_back({"protocol.slots", "must be >= 1"});
    }
    try {
        const auto omega = DegreeDistribution::normalized(degree_weights);
        if (slots >= 1 && omega.max_degree() > slots) {
            issues.push_back({"protocol.degree_distribution",
                              fmt::format("maximum degree {} exceeds the frame length {}",
                                          omega.max_degree(), slots)});
        }
    }
    catch (const std::invalid_argument& e) {
        issues.push_back({"protocol.degree_distribution", e.what()});
    }
    for (double p : pa) {
        if (!(p >= 0.0 && p <= 1.0)) {
            issues.push_back({"protocol.pa", fmt::format("{} is outside [0, 1]", p)});
            break;
        }
    }
    for (const auto& seg : trajectory) {
        if (!(seg.pa >= 0.0 && seg.pa <= 1.0)) {
            issues.push_back({"protocol.trajectory", fmt::format("pa {} is outside [0, 1]", seg.pa)});
            break;
        }
    }
    if (pa.empty() && trajectory.empty()) {
        issues.push_back({"protocol.pa", "needs at least one activation probability"});
    }
    if (fov_grid.empty()) {
        issues.push_back({"sweep.fov_deg", "FOV grid is empty"});
    }
    for (double f : fov_grid) {
        if (!(f > 0.0 && f < 90.0)) {
            issues.push_back({"sweep.fov_deg", fmt::format("FOV {} is outside (0, 90) degrees", f)});
            break;
        }
    }
    if (frames < 1) {
        issues.push_back({"sweep.frames", "must be >= 1"});
    }
    if (!(adapt.noise_sigma >= 0.0) || !std::isfinite(adapt.noise_sigma)) {
        issues.push_back({"adapt.noise_sigma", "must be finite and >= 0"});
    }
    if (!(adapt.wide_fov_deg > 0.0 && adapt.wide_fov_deg < 90.0)) {
        issues.push_back({"adapt.wide_fov_deg", "FOV must lie in (0, 90) degrees"});
    }
    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }
}

RunConfig parse_config(std::string_view text, std::vector<std::string>* warnings)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    }
    catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("malformed YAML: ") + e.what());
    }
    if (!root.IsMap()) {
        throw ConfigError("", "config must be a YAML mapping");
    }

    RunConfig cfg;
    Reader r;
    r.reject_unknown(root, "", {"schema", "scenario", "protocol", "sweep", "adapt", "output"});
    r.read(root, "", "schema", cfg.schema, false);

    // scenario
    const auto scen = r.section(root, "", "scenario", true);
    r.reject_unknown(scen, "scenario", {"room", "devices", "access_points", "lambertian", "fov_deg"});
    const auto room = r.section(scen, "scenario", "room", true);
    r.reject_unknown(room, "scenario.room", {"width", "depth", "height"});
    r.read(room, "scenario.room", "width", cfg.scenario.room_width, true);
    r.read(room, "scenario.room", "depth", cfg.scenario.room_depth, true);
    r.read(room, "scenario.room", "height", cfg.scenario.height, true);
    const auto dev = r.section(scen, "scenario", "devices", true);
    r.reject_unknown(dev, "scenario.devices", {"per_side", "pitch"});
    r.read(dev, "scenario.devices", "per_side", cfg.scenario.tx_per_side, true);
    r.read(dev, "scenario.devices", "pitch", cfg.scenario.tx_pitch, true);
    const auto aps = r.section(scen, "scenario", "access_points", true);
    r.reject_unknown(aps, "scenario.access_points", {"per_side", "pitch"});
    r.read(aps, "scenario.access_points", "per_side", cfg.scenario.rx_per_side, true);
    if (aps && aps["pitch"]) {
        double pitch = 0.0;
        r.read(aps, "scenario.access_points", "pitch", pitch, false);
        cfg.scenario.rx_pitch = pitch;
    }
    const auto lam = r.section(scen, "scenario", "lambertian", false);
    r.reject_unknown(lam, "scenario.lambertian",
                     {"detector_area", "half_power_semiangle_deg", "filter_gain",
                      "refractive_index", "tx_power"});
    auto& lp = cfg.scenario.lambertian;
    r.read(lam, "scenario.lambertian", "detector_area", lp.detector_area, false);
    r.read(lam, "scenario.lambertian", "half_power_semiangle_deg", lp.half_power_semiangle_deg, false);
    r.read(lam, "scenario.lambertian", "filter_gain", lp.filter_gain, false);
    r.read(lam, "scenario.lambertian", "refractive_index", lp.refractive_index, false);
    r.read(lam, "scenario.lambertian", "tx_power", lp.tx_power, false);
    r.read(scen, "scenario", "fov_deg", cfg.scenario.fov_deg, true);

    // protocol
    const auto proto = r.section(root, "", "protocol", true);
    r.reject_unknown(proto, "protocol", {"slots", "degree_distribution", "pa", "trajectory"});
    r.read(proto, "protocol", "slots", cfg.slots, true);
    if (proto) {
        const auto omega = proto["degree_distribution"];
        if (!omega) {
            r.issues.push_back({"protocol.degree_distribution", "missing required key"});
        }
        else if (!omega.IsMap()) {
            r.issues.push_back({"protocol.degree_distribution", "expected a degree -> weight map"});
        }
        else {
            cfg.degree_weights.clear();
            try {
                for (const auto& kv : omega) {
                    cfg.degree_weights[kv.first.as<int>()] = kv.second.as<double>();
                }
            }
            catch (const YAML::Exception&) {
                r.issues.push_back({"protocol.degree_distribution",
                                    "keys must be integer degrees and values numbers"});
            }
        }
    }
    r.read_grid(proto, "protocol", "pa", cfg.pa, false);
    if (proto && proto["trajectory"]) {
        const auto traj = proto["trajectory"];
        if (!traj.IsSequence()) {
            r.issues.push_back({"protocol.trajectory", "expected a list of {pa, frames}"});
        }
        else {
            for (std::size_t i = 0; i < traj.size(); ++i) {
                const std::string where = fmt::format("protocol.trajectory[{}]", i);
                r.reject_unknown(traj[i], where, {"pa", "frames"});
                TrajectorySegment seg;
                r.read(traj[i], where, "pa", seg.pa, true);
                r.read(traj[i], where, "frames", seg.frames, true);
                cfg.trajectory.push_back(seg);
            }
        }
    }

    // sweep
    const auto sw = r.section(root, "", "sweep", true);
    r.reject_unknown(sw, "sweep", {"fov_deg", "frames", "seed"});
    r.read_grid(sw, "sweep", "fov_deg", cfg.fov_grid, false);
    if (!(sw && sw["fov_deg"])) {
        cfg.fov_grid = {cfg.scenario.fov_deg};
    }
    r.read(sw, "sweep", "frames", cfg.frames, true);
    r.read(sw, "sweep", "seed", cfg.seed, true);

    // adapt
    const auto ad = r.section(root, "", "adapt", false);
    r.reject_unknown(ad, "adapt", {"estimator", "noise_sigma", "preamble_fov", "wide_fov_deg"});
    std::string estimator = estimator_name(cfg.adapt.estimator);
    std::string preamble = preamble_name(cfg.adapt.preamble_fov);
    r.read(ad, "adapt", "estimator", estimator, false);
    r.read(ad, "adapt", "noise_sigma", cfg.adapt.noise_sigma, false);
    r.read(ad, "adapt", "preamble_fov", preamble, false);
    r.read(ad, "adapt", "wide_fov_deg", cfg.adapt.wide_fov_deg, false);
    if (estimator == "oracle") {
        cfg.adapt.estimator = Estimator::oracle;
    }
    else if (estimator == "power") {
        cfg.adapt.estimator = Estimator::power;
    }
    else {
        r.issues.push_back({"adapt.estimator", "must be 'oracle' or 'power'"});
    }
    if (preamble == "current") {
        cfg.adapt.preamble_fov = PreambleFov::current;
    }
    else if (preamble == "wide") {
        cfg.adapt.preamble_fov = PreambleFov::wide;
    }
    else {
        r.issues.push_back({"adapt.preamble_fov", "must be 'current' or 'wide'"});
    }

    // output
    const auto out = r.section(root, "", "output", false);
    r.reject_unknown(out, "output", {"path", "format"});
    std::string format = format_name(cfg.output.format);
    r.read(out, "output", "path", cfg.output.path, false);
    r.read(out, "output", "format", format, false);
    if (format == "csv") {
        cfg.output.format = OutputFormat::csv;
    }
    else if (format == "json") {
        cfg.output.format = OutputFormat::json;
    }
    else {
        r.issues.push_back({"output.format", "must be 'csv' or 'json'"});
    }

    if (r.issues.empty()) {
        try {
            cfg.validate();
        }
        catch (const ConfigError& e) {
            r.issues.insert(r.issues.end(), e.issues().begin(), e.issues().end());
        }
    }
    if (!r.issues.empty()) {
        throw ConfigError(std::move(r.issues));
    }

    double raw = 0.0;
    for (const auto& [d, w] : cfg.degree_weights) {
        raw += w;
    }
    if (warnings && std::abs(raw - 1.0) > 1e-6) {
        warnings->push_back(fmt::format(
            "protocol.degree_distribution: weights sum to {:.9g}; normalizing", raw));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, std::vector<std::string>* warnings)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), warnings);
}

std::string emit_config(const RunConfig& c)
{
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "schema" << YAML::Value << c.schema;

    const auto& s = c.scenario;
    e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "room" << YAML::Value << YAML::Flow << YAML::BeginMap
      << YAML::Key << "width" << YAML::Value << s.room_width
      << YAML::Key << "depth" << YAML::Value << s.room_depth
      << YAML::Key << "height" << YAML::Value << s.height << YAML::EndMap;
    e << YAML::Key << "devices" << YAML::Value << YAML::Flow << YAML::BeginMap
      << YAML::Key << "per_side" << YAML::Value << s.tx_per_side
      << YAML::Key << "pitch" << YAML::Value << s.tx_pitch << YAML::EndMap;
    e << YAML::Key << "access_points" << YAML::Value << YAML::Flow << YAML::BeginMap
      << YAML::Key << "per_side" << YAML::Value << s.rx_per_side;
    if (s.rx_pitch) {
        e << YAML::Key << "pitch" << YAML::Value << *s.rx_pitch;
    }
    e << YAML::EndMap;
    const auto& l = s.lambertian;
    e << YAML::Key << "lambertian" << YAML::Value << YAML::BeginMap
      << YAML::Key << "detector_area" << YAML::Value << l.detector_area
      << YAML::Key << "half_power_semiangle_deg" << YAML::Value << l.half_power_semiangle_deg
      << YAML::Key << "filter_gain" << YAML::Value << l.filter_gain
      << YAML::Key << "refractive_index" << YAML::Value << l.refractive_index
      << YAML::Key << "tx_power" << YAML::Value << l.tx_power << YAML::EndMap;
    e << YAML::Key << "fov_deg" << YAML::Value << s.fov_deg;
    e << YAML::EndMap;

    e << YAML::Key << "protocol" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "slots" << YAML::Value << c.slots;
    e << YAML::Key << "degree_distribution" << YAML::Value << YAML::Flow << YAML::BeginMap;
    for (const auto& [d, w] : c.degree_weights) {
        e << YAML::Key << d << YAML::Value << w;
    }
    e << YAML::EndMap;
    e << YAML::Key << "pa" << YAML::Value << YAML::Flow << c.pa;
    if (!c.trajectory.empty()) {
        e << YAML::Key << "trajectory" << YAML::Value << YAML::BeginSeq;
        for (const auto& seg : c.trajectory) {
            e << YAML::Flow << YAML::BeginMap << YAML::Key << "pa" << YAML::Value << seg.pa
              << YAML::Key << "frames" << YAML::Value << seg.frames << YAML::EndMap;
        }
        e << YAML::EndSeq;
    }
    e << YAML::EndMap;

    e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "fov_deg" << YAML::Value << YAML::Flow << c.fov_grid;
    e << YAML::Key << "frames" << YAML::Value << c.frames;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::EndMap;

    e << YAML::Key << "adapt" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "estimator" << YAML::Value << estimator_name(c.adapt.estimator);
    e << YAML::Key << "noise_sigma" << YAML::Value << c.adapt.noise_sigma;
    e << YAML::Key << "preamble_fov" << YAML::Value << preamble_name(c.adapt.preamble_fov);
    e << YAML::Key << "wide_fov_deg" << YAML::Value << c.adapt.wide_fov_deg;
    e << YAML::EndMap;

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "path" << YAML::Value << c.output.path;
    e << YAML::Key << "format" << YAML::Value << format_name(c.output.format);
    e << YAML::EndMap;

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::map<int, double> irsa16_degree_weights()
{
    return {{2, 0.498}, {3, 0.221}, {4, 0.038}, {5, 0.076}, {6, 0.040}, {7, 0.01},
            {8, 0.09},  {9, 0.07},  {11, 0.03}, {14, 0.043}, {15, 0.08}, {16, 0.058}};
}

std::optional<Preset> parse_preset(std::string_view name)
{
    if (name == "fig4") {
        return Preset::fig4;
    }
    if (name == "fig5") {
        return Preset::fig5;
    }
    if (name == "fig6") {
        return Preset::fig6;
    }
    return std::nullopt;
}

std::vector<PresetVariant> apply_preset(const RunConfig& base, Preset preset)
{
    std::vector<PresetVariant> out;
    auto variant = [&](std::string label, int rx, int slots, std::map<int, double> omega) {
        RunConfig c = base;
        c.scenario.rx_per_side = rx;
        c.scenario.rx_pitch.reset();
        c.slots = slots;
        c.degree_weights = std::move(omega);
        out.push_back({std::move(label), std::move(c)});
    };
    switch (preset) {
    case Preset::fig4:
        for (int rx : {1, 3, 5}) {
            variant(fmt::format("{0}x{0}", rx), rx, 1, {{1, 1.0}});
        }
        break;
    case Preset::fig5:
        for (int rx : {1, 3, 5}) {
            variant(fmt::format("{0}x{0}", rx), rx, 100, irsa16_degree_weights());
        }
        break;
    case Preset::fig6:
        variant("1", 3, 5, {{2, 1.0}});
        variant("2", 3, 10, {{2, 1.0}});
        variant("3", 3, 100, {{2, 1.0}});
        break;
    }
    return out;
}

}  // namespace owcsim
