// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "owcsim/adapt.hpp"
#include "owcsim/config.hpp"
#include "owcsim/report.hpp"
#include "owcsim/sim.hpp"
#include "support/graphs.hpp"

using namespace owcsim;

namespace {

constexpr double kBandLow = 25.3;
constexpr double kBandHigh = 46.5;

struct Verdict
{
    bool pass = false;
    std::string detail;
};

Scenario hall(int aps, double fov = 45.0)
{
    Scenario s;
    s.rx_per_side = aps;
    s.fov_deg = fov;
    return s;
}

std::vector<double> fov_grid()
{
    std::vector<double> g;
    for (int f = 1; f <= 89; ++f) {
        g.push_back(f);
    }
    return g;
}

bool in_band(double fov) { return fov >= kBandLow && fov <= kBandHigh; }

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

const DegreeDistribution& sa() { static const auto d = normalize_distribution({{1, 1.0}}); return d; }
const DegreeDistribution& crdsa() { static const auto d = normalize_distribution({{2, 1.0}}); return d; }
const DegreeDistribution& irsa16() { static const auto d = normalize_distribution(irsa16_degree_weights()); return d; }

// Best cell over the FOV grid for one p_a (ties toward the larger FOV).
FovLookupEntry best_fov(const Scenario& s, double pa, const DegreeDistribution& omega, int slots,
                        std::uint64_t frames, std::uint64_t seed, Metrics* at_best = nullptr)
{
    const std::vector<double> pas{pa};
    const auto grid = fov_grid();
    const auto table = sweep(s, pas, grid, omega, slots, frames, seed);
    const auto lut = select_optimal_fov(table);
    if (at_best) {
        for (std::size_t f = 0; f < grid.size(); ++f) {
            if (grid[f] == lut.entries()[0].fov_deg) {
                *at_best = table.at(0, f);
            }
        }
    }
    return lut.entries()[0];
}

Verdict c1_bands()
{
    std::string detail;
    bool ok = true;
    for (int aps : {1, 3, 5}) {
        for (int fov = 26; fov <= 46; ++fov) {
            for (const auto& u : coverage_sets(hall(aps, fov)).devices_of) {
                ok &= u.size() == 4;
            }
        }
        for (const auto& u : coverage_sets(hall(aps, 47)).devices_of) {
            ok &= u.size() > 4;
        }
        for (const auto& u : coverage_sets(hall(aps, 25)).devices_of) {
            ok &= u.size() < 4;
        }
    }
    const auto at47 = coverage_sets(hall(3, 47)).devices_of[4].size();
    const auto at25 = coverage_sets(hall(3, 25)).devices_of[4].size();
    detail = fmt::format("|U_j| = 4 on 26..46 deg for 1x1/3x3/5x5; {} at 47 deg, {} at 25 deg", at47, at25);
    return {ok, detail};
}

Verdict c2_aloha()
{
    const std::vector<std::pair<double, double>> oracle{
        {0.001, 0.344073518419158545},
        {0.002, 0.350019355330457283},
        {0.005, 0.114682249650255972},
    };
    bool ok = true;
    std::string detail;
    for (const auto& [pa, expected] : oracle) {
        const auto m = run_frames(hall(1, 89.0), pa, 89.0, sa(), 1, 20000, 2);
        const double se = m.decoded_se(1, 1);
        const double z = (m.mean_decoded() - expected) / se;
        ok &= std::abs(z) <= 3.0;
        detail += fmt::format("{}p_a={}: {:.4f} vs {:.4f} (z={:+.2f})", detail.empty() ? "" : "; ",
                              pa, m.mean_decoded(), expected, z);
    }
    return {ok, detail};
}

Verdict c3_decoder()
{
    Rng rng(20240601);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto in = testing::random_instance(rng);
        const auto fast = peel_decode(in.graph);
        const auto slow = reference_decode(in.graph);
        mismatches += fast.decoded != slow.decoded;
    }
    int order_mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto in = testing::random_instance(rng);
        order_mismatches += testing::random_order_decode(in.graph, rng) != peel_decode(in.graph).decoded;
    }
    return {mismatches == 0 && order_mismatches == 0,
            fmt::format("{} / 10000 reference mismatches, {} / 1000 order mismatches", mismatches,
                        order_mismatches)};
}

Verdict c4_plateau()
{
    const Scenario s = hall(3);
    std::vector<FovLookupEntry> best;
    std::vector<double> se;
    bool ok = true;
    std::string detail;
    for (double pa : {0.2, 0.4, 0.8}) {
        Metrics m;
        best.push_back(best_fov(s, pa, sa(), 1, 20000, 4, &m));
        se.push_back(m.r_avg_se);
        ok &= in_band(best.back().fov_deg);
        detail += fmt::format("p_a={}: R_avg={:.4f}+-{:.4f} at {} deg; ", pa, best.back().r_avg,
                              m.r_avg_se, best.back().fov_deg);
    }
    double worst_z = 0.0;
    for (std::size_t a = 0; a < best.size(); ++a) {
        for (std::size_t b = a + 1; b < best.size(); ++b) {
            const double z = std::abs(best[a].r_avg - best[b].r_avg) / combined(se[a], se[b]);
            worst_z = std::max(worst_z, z);
        }
    }
    ok &= worst_z <= 3.0;
    detail += fmt::format("max pairwise z={:.1f}", worst_z);
    return {ok, detail};
}

Verdict c5_diversity()
{
    Metrics one;
    Metrics nine;
    const auto a = best_fov(hall(1), 0.02, sa(), 1, 100000, 5, &one);
    const auto b = best_fov(hall(3), 0.02, sa(), 1, 100000, 5, &nine);
    const double margin = 2.0 * combined(one.r_avg_se, nine.r_avg_se);
    return {b.r_avg >= a.r_avg - margin,
            fmt::format("3x3 {:.5f} at {} deg vs 1x1 {:.5f} at {} deg (2 SE = {:.5f})", b.r_avg,
                        b.fov_deg, a.r_avg, a.fov_deg, margin)};
}

Verdict c6_regimes()
{
    const Scenario s = hall(3);
    bool ok = true;
    std::string detail;
    for (const auto& [slots, expected] : std::vector<std::pair<int, double>>{{5, 0.44}, {10, 0.89}}) {
        double entry = std::nan("");
        for (int k = 1; k <= 50; ++k) {
            const double pa = 0.02 * k;
            if (in_band(best_fov(s, pa, crdsa(), slots, 20000, 6).fov_deg)) {
                entry = pa;
                break;
            }
        }
        const bool hit = std::abs(entry - expected) <= 0.06 + 1e-9;
        ok &= hit;
        detail += fmt::format("{}L={}: enters band at p_a={} (expected {} +- 0.06)",
                              detail.empty() ? "" : "; ", slots, entry, expected);
    }
    return {ok, detail};
}

Verdict c7_linear()
{
    const Scenario s = hall(3);
    bool ok = true;
    std::string detail;
    for (double pa : {0.2, 0.4, 0.6, 0.8}) {
        const auto e = best_fov(s, pa, irsa16(), 100, 5000, 7);
        ok &= e.p_rec >= 0.95;
        detail += fmt::format("{}p_a={}: p_rec={:.4f} at {} deg", detail.empty() ? "" : "; ", pa,
                              e.p_rec, e.fov_deg);
    }
    return {ok, detail};
}

Verdict c8_crdsa()
{
    const Scenario s = hall(3);
    Metrics mx;
    Metrics mi;
    const auto x2 = best_fov(s, 0.98, crdsa(), 100, 20000, 8, &mx);
    const auto irsa = best_fov(s, 0.98, irsa16(), 100, 20000, 8, &mi);
    const double margin = 2.0 * combined(mx.r_avg_se, mi.r_avg_se);
    return {x2.r_avg >= irsa.r_avg - margin,
            fmt::format("x^2 {:.4f} at {} deg vs 16-degree {:.4f} at {} deg (2 SE = {:.4f})",
                        x2.r_avg, x2.fov_deg, irsa.r_avg, irsa.fov_deg, margin)};
}

#ifdef OWCSIM_CLI_PATH
int run_cli(const std::string& args)
{
    const std::string cmd = "\"" OWCSIM_CLI_PATH "\" " + args + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
#endif

Verdict c9_determinism()
{
    const Scenario s = hall(3);
    const std::vector<double> pa{0.1, 0.5, 0.9};
    const std::vector<double> fov{20, 35, 50, 65, 80};
    std::string reference;
    bool ok = true;
    for (unsigned threads : {1u, 2u, 3u, 8u}) {
        std::ostringstream csv;
        write_csv(csv, sweep_table(sweep(s, pa, fov, crdsa(), 10, 2000, 9, {threads})));
        if (reference.empty()) {
            reference = csv.str();
        }
        ok &= csv.str() == reference;
    }
    std::string detail = "library sweep identical for 1/2/3/8 workers";
#ifdef OWCSIM_CLI_PATH
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("owcsim_acc_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string cfg = (dir / "c.yaml").string();
    std::ofstream(cfg) << emit_config([&] {
        RunConfig c;
        c.scenario = s;
        c.slots = 10;
        c.degree_weights = {{2, 1.0}};
        c.pa = pa;
        c.fov_grid = fov;
        c.frames = 2000;
        c.seed = 9;
        return c;
    }());
    std::vector<std::string> outputs;
    for (int threads : {1, 4}) {
        const std::string out = (dir / fmt::format("t{}.csv", threads)).string();
        ok &= run_cli(fmt::format("sweep --config \"{}\" --threads {} --out \"{}\"", cfg, threads, out)) == 0;
        outputs.push_back(slurp(out));
    }
    ok &= !outputs[0].empty() && outputs[0] == outputs[1];
    fs::remove_all(dir);
    detail += "; CLI CSV byte-identical for --threads 1/4";
#endif
    return {ok, detail};
}

Verdict c10_estimator()
{
    const Scenario s = hall(3, 60.0);
    const auto cov = coverage_sets(s);
    const double ptx = s.lambertian.tx_power;
    bool ok = true;
    std::string detail;
    Rng rng(10);
    for (double pa : {0.1, 0.3, 0.7}) {
        const int n = 10000;
        double sum = 0.0;
        double sq = 0.0;
        for (int k = 0; k < n; ++k) {
            const auto active = sample_activity(s.device_count(), pa, rng);
            const double e = estimate_pa_power(observe_preamble(active, cov.gains, ptx), cov.gains, ptx);
            sum += e;
            sq += e * e;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sq / n - mean * mean) / (n - 1));
        const double z = (mean - pa) / se;
        ok &= std::abs(z) <= 3.0;
        detail += fmt::format("p_a={}: mean {:.5f} (z={:+.2f}); ", pa, mean, z);
    }
    std::vector<int> none;
    std::vector<int> all(static_cast<std::size_t>(s.device_count()));
    for (int i = 0; i < s.device_count(); ++i) {
        all[static_cast<std::size_t>(i)] = i;
    }
    const double at0 = estimate_pa_power(observe_preamble(none, cov.gains, ptx), cov.gains, ptx);
    const double at1 = estimate_pa_power(observe_preamble(all, cov.gains, ptx), cov.gains, ptx);
    ok &= at0 == 0.0 && std::abs(at1 - 1.0) <= 1e-12;
    detail += fmt::format("p_a=0 -> {}, p_a=1 -> {}", at0, format_real(at1));
    return {ok, detail};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"1 coverage bands", c1_bands},
        {"2 slotted ALOHA oracle", c2_aloha},
        {"3 decoder equivalence", c3_decoder},
        {"4 L=1 throughput plateau", c4_plateau},
        {"5 spatial diversity at p_a=0.02", c5_diversity},
        {"6 Omega=x^2 regime entry", c6_regimes},
        {"7 L=100 near-linear throughput", c7_linear},
        {"8 x^2 vs 16-degree at p_a=0.98", c8_crdsa},
        {"9 thread-count determinism", c9_determinism},
        {"10 preamble estimator", c10_estimator},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        }
        catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << name << " :: " << v.detail
                  << fmt::format(" [{:.1f}s]", secs) << std::endl;
    }
    std::cout << (failed ? fmt::format("{} criterion(s) failed", failed) : "all criteria passed")
              << std::endl;
    return failed ? 1 : 0;
}
