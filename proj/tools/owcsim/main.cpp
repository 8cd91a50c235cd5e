// owcsim: command line front end for the multi-receiver coded slotted ALOHA simulator.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "owcsim/adapt.hpp"
#include "owcsim/config.hpp"
#include "owcsim/error.hpp"
#include "owcsim/report.hpp"
#include "owcsim/sim.hpp"

namespace {

using namespace owcsim;

constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

struct Options
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> frames;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> preset;
    unsigned threads = 0;
    std::optional<std::string> trace;
    std::optional<double> pa;
    std::optional<double> fov;
};

struct Job
{
    std::string label;  // empty unless a preset expanded the config
    RunConfig config;
};

std::optional<std::uint64_t> env_seed()
{
    const char* raw = std::getenv("OWCSIM_SEED");
    if (raw == nullptr || *raw == '\0') {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const std::string text(raw);
        if (text.front() == '-') {
            throw std::invalid_argument("negative");
        }
        const auto v = std::stoull(text, &used, 10);
        if (used != text.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    }
    catch (const std::exception&) {
        throw ConfigError("OWCSIM_SEED", "must be an unsigned 64-bit integer");
    }
}

std::vector<Job> prepare(const Options& opt, bool needs_trajectory)
{
    std::vector<std::string> warnings;
    RunConfig cfg = load_config(opt.config, &warnings);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << w << '\n';
    }

    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    else if (auto s = env_seed()) {
        cfg.seed = *s;
    }
    if (opt.frames) {
        cfg.frames = *opt.frames;
    }
    if (opt.out) {
        cfg.output.path = *opt.out;
    }
    if (opt.format) {
        cfg.output.format = *opt.format == "json" ? OutputFormat::json : OutputFormat::csv;
    }
    if (opt.pa) {
        cfg.pa = {*opt.pa};
    }
    if (opt.fov) {
        cfg.scenario.fov_deg = *opt.fov;
        cfg.fov_grid = {*opt.fov};
    }
    if (needs_trajectory && cfg.trajectory.empty()) {
        throw ConfigError("protocol.trajectory", "the adapt command needs a p_a trajectory");
    }

    std::vector<Job> jobs;
    if (opt.preset) {
        if (cfg.output.path.empty()) {
            throw ConfigError("output.path", "presets write one file per variant; give --out");
        }
        for (auto& v : apply_preset(cfg, *parse_preset(*opt.preset))) {
            jobs.push_back({v.label, std::move(v.config)});
        }
    }
    else {
        jobs.push_back({"", std::move(cfg)});
    }
    for (const auto& j : jobs) {
        j.config.validate();
    }
    return jobs;
}

std::string variant_path(const std::string& path, const std::string& label)
{
    if (label.empty()) {
        return path;
    }
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + "-" + label + p.extension().string())).string();
}

void emit(const Job& job, const Table& table)
{
    const auto& out = job.config.output;
    auto render = [&](std::ostream& os) {
        if (out.format == OutputFormat::json) {
            write_json(os, table);
        }
        else {
            write_csv(os, table);
        }
    };
    if (out.path.empty()) {
        render(std::cout);
        std::cout.flush();
        return;
    }
    const std::string path = variant_path(out.path, job.label);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open output file " + path);
    }
    render(file);
    file.close();
    if (!file) {
        throw std::runtime_error("failed writing " + path);
    }
    std::cerr << "wrote " << path << '\n';
}

RunOptions run_options(const Options& opt)
{
    return RunOptions{opt.threads, nullptr};
}

void cmd_simulate(const Options& opt)
{
    std::ofstream trace_file;
    FrameTrace tracer;
    if (opt.trace) {
        trace_file.open(*opt.trace, std::ios::binary | std::ios::trunc);
        if (!trace_file) {
            throw std::runtime_error("cannot open trace file " + *opt.trace);
        }
        tracer = [&](std::uint64_t frame, int iteration, std::span<const int> ids) {
            nlohmann::ordered_json rec;
            rec["frame"] = frame;
            rec["iteration"] = iteration;
            rec["decoded"] = std::vector<int>(ids.begin(), ids.end());
            trace_file << rec.dump() << '\n';
        };
    }
    for (const auto& job : prepare(opt, false)) {
        const auto& c = job.config;
        const double pa = c.pa.empty() ? c.trajectory.front().pa : c.pa.front();
        RunOptions ro = run_options(opt);
        ro.trace = opt.trace ? &tracer : nullptr;
        const auto m = run_frames(c.scenario, pa, c.scenario.fov_deg, c.omega(), c.slots,
                                  c.frames, c.seed, ro);
        std::cerr << "p_rec " << format_real(m.p_rec) << " +- " << format_real(m.p_rec_se)
                  << "  r_avg " << format_real(m.r_avg) << " +- " << format_real(m.r_avg_se)
                  << "  frames " << m.frames << '\n';
        emit(job, metrics_table(pa, c.scenario.fov_deg, m, c.seed));
    }
}

void cmd_sweep(const Options& opt)
{
    for (const auto& job : prepare(opt, false)) {
        const auto& c = job.config;
        const auto t = sweep(c.scenario, c.pa, c.fov_grid, c.omega(), c.slots, c.frames, c.seed,
                             run_options(opt));
        emit(job, sweep_table(t));
    }
}

void cmd_optimize(const Options& opt)
{
    for (const auto& job : prepare(opt, false)) {
        const auto& c = job.config;
        const auto lut = optimize_fov(c.scenario, c.pa, c.fov_grid, c.omega(), c.slots, c.frames,
                                      c.seed, run_options(opt));
        emit(job, lookup_table(lut));
    }
}

void cmd_adapt(const Options& opt)
{
    for (const auto& job : prepare(opt, true)) {
        const auto& c = job.config;
        if (c.pa.empty()) {
            throw ConfigError("protocol.pa", "the adapt command builds its FOV lookup over protocol.pa");
        }
        const auto omega = c.omega();
        const auto lut = optimize_fov(c.scenario, c.pa, c.fov_grid, omega, c.slots, c.frames,
                                      c.seed, run_options(opt));
        const auto traj = c.pa_per_frame();
        const auto records = adaptive_run(c.scenario, traj, lut, omega, c.slots, c.seed, c.adapt);
        const auto m = summarize(records, c.scenario.receiver_count(), c.slots);
        std::cerr << "frames " << records.size() << "  p_rec " << format_real(m.p_rec)
                  << "  r_avg " << format_real(m.r_avg) << '\n';
        emit(job, adapt_table(records));
    }
}

void cmd_coverage(const Options& opt)
{
    for (const auto& job : prepare(opt, false)) {
        emit(job, coverage_table(coverage_sets(job.config.scenario)));
    }
}

void add_common(CLI::App* sub, Options& opt)
{
    sub->add_option("--config", opt.config, "Run configuration (YAML)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Master seed (overrides OWCSIM_SEED and the config)");
    sub->add_option("--frames", opt.frames, "Frames per cell")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "Output file (default: stdout)");
    sub->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--preset", opt.preset, "Preset expanding the config into variants")
        ->check(CLI::IsMember({"fig4", "fig5", "fig6"}));
    sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"owcsim: multi-receiver coded slotted ALOHA simulator for optical wireless IoT"};
    app.require_subcommand(1);

    Options opt;
    auto* simulate = app.add_subcommand("simulate", "Run one (p_a, FOV) cell");
    add_common(simulate, opt);
    simulate->add_option("--pa", opt.pa, "Activation probability (default: first of protocol.pa)")
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--fov", opt.fov, "Receiver FOV in degrees (default: scenario.fov_deg)");
    simulate->add_option("--trace", opt.trace, "Write per-frame decoder iterations as JSON lines");

    auto* sweep_cmd = app.add_subcommand("sweep", "Metrics over the p_a x FOV grid");
    add_common(sweep_cmd, opt);

    auto* optimize = app.add_subcommand("optimize", "Throughput-maximizing FOV per p_a");
    add_common(optimize, opt);

    auto* adapt = app.add_subcommand("adapt", "Closed-loop FOV adaptation over a p_a trajectory");
    add_common(adapt, opt);

    auto* coverage = app.add_subcommand("coverage", "Dump gains and incidence angles per link");
    add_common(coverage, opt);
    coverage->add_option("--fov", opt.fov, "Receiver FOV in degrees (default: scenario.fov_deg)");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*simulate) {
            cmd_simulate(opt);
        }
        else if (*sweep_cmd) {
            cmd_sweep(opt);
        }
        else if (*optimize) {
            cmd_optimize(opt);
        }
        else if (*adapt) {
            cmd_adapt(opt);
        }
        else if (*coverage) {
            cmd_coverage(opt);
        }
    }
    catch (const ConfigError& e) {
        for (const auto& issue : e.issues()) {
            std::cerr << "error: " << (issue.path.empty() ? "" : issue.path + ": ") << issue.message
                      << '\n';
        }
        return kExitInvalid;
    }
    catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
