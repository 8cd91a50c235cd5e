#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <string>

#include "owcsim/config.hpp"
#include "owcsim/error.hpp"
#include "owcsim/report.hpp"

using namespace owcsim;

namespace {

const std::string kMinimal = R"(
scenario:
  room: {width: 50, depth: 50, height: 3}
  devices: {per_side: 26, pitch: 2}
  access_points: {per_side: 3}
  fov_deg: 40
protocol:
  slots: 10
  degree_distribution: {2: 1.0}
  pa: [0.1, 0.2]
sweep:
  frames: 100
  seed: 3
)";

bool has_issue(const ConfigError& e, const std::string& path)
{
    return std::any_of(e.issues().begin(), e.issues().end(),
                       [&](const ConfigIssue& i) { return i.path == path; });
}

ConfigError parse_error(const std::string& text)
{
    try {
        parse_config(text);
    }
    catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError");
    return ConfigError("", "");
}

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("bundled hall config")
{
    const auto cfg = load_config(OWCSIM_CONFIG_DIR "/hall.yaml");
    CHECK(cfg.scenario.device_count() == 676);
    CHECK(cfg.scenario.height == 3.0);
    CHECK(cfg.scenario.tx_pitch == 2.0);
    CHECK(cfg.scenario.receiver_count() == 9);
    CHECK(cfg.pa.size() == 50);
    CHECK(cfg.pa.front() == 0.02);
    CHECK(cfg.pa[21] == 0.44);
    CHECK(cfg.pa.back() == 1.0);
    CHECK(cfg.fov_grid.size() == 89);
    CHECK(cfg.fov_grid.back() == 89.0);
}

TEST_CASE("every bundled config loads")
{
    for (const char* name : {"hall.yaml", "adapt_step.yaml", "single_device.yaml"}) {
        CHECK_NOTHROW(load_config(std::string(OWCSIM_CONFIG_DIR "/") + name));
    }
}

TEST_CASE("parse_config")
{
    SUBCASE("defaults")
    {
        const auto cfg = parse_config(kMinimal);
        CHECK(cfg.schema == kConfigSchemaVersion);
        CHECK(cfg.fov_grid == std::vector<double>{40.0});
        CHECK(cfg.scenario.lambertian == LambertianParams{});
        CHECK(cfg.adapt == AdaptOptions{});
        CHECK(cfg.output.path.empty());
        CHECK(cfg.output.format == OutputFormat::csv);
        CHECK(cfg.omega().probability(2) == 1.0);
    }

    SUBCASE("scalar and range grids")
    {
        auto cfg = parse_config(replace(kMinimal, "pa: [0.1, 0.2]", "pa: 0.3"));
        CHECK(cfg.pa == std::vector<double>{0.3});
        cfg = parse_config(replace(kMinimal, "pa: [0.1, 0.2]", "pa: {start: 0.1, stop: 0.7, step: 0.1}"));
        CHECK(cfg.pa == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
    }

    SUBCASE("FOV out of range names the key")
    {
        const auto e = parse_error(replace(kMinimal, "fov_deg: 40", "fov_deg: 95"));
        CHECK(has_issue(e, "scenario.fov_deg"));
        CHECK(std::string(e.what()).find("(0, 90)") != std::string::npos);
    }

    SUBCASE("unknown key")
    {
        const auto e = parse_error(replace(kMinimal, "slots: 10", "slots: 10\n  slot_time: 1"));
        CHECK(has_issue(e, "protocol.slot_time"));
    }

    SUBCASE("missing required keys are all reported")
    {
        auto text = replace(kMinimal, "  seed: 3\n", "");
        text = replace(text, "height: 3", "");
        const auto e = parse_error(text);
        CHECK(has_issue(e, "sweep.seed"));
        CHECK(has_issue(e, "scenario.room.height"));
    }

    SUBCASE("empty FOV grid")
    {
        const auto e = parse_error(replace(kMinimal, "  frames: 100", "  fov_deg: []\n  frames: 100"));
        CHECK(has_issue(e, "sweep.fov_deg"));
    }

    SUBCASE("degree distribution problems")
    {
        CHECK(has_issue(parse_error(replace(kMinimal, "{2: 1.0}", "{2: -1.0}")),
                        "protocol.degree_distribution"));
        CHECK(has_issue(parse_error(replace(kMinimal, "{2: 1.0}", "{2: 0.0}")),
                        "protocol.degree_distribution"));
        CHECK(has_issue(parse_error(replace(kMinimal, "{2: 1.0}", "{12: 1.0}")),
                        "protocol.degree_distribution"));
    }

    SUBCASE("weights away from 1 are normalized with a warning")
    {
        std::vector<std::string> warnings;
        const auto cfg = parse_config(replace(kMinimal, "{2: 1.0}", "{1: 2.0, 2: 2.0}"), &warnings);
        CHECK(warnings.size() == 1);
        CHECK(cfg.omega().probability(1) == 0.5);

        warnings.clear();
        parse_config(kMinimal, &warnings);
        CHECK(warnings.empty());
    }

    SUBCASE("malformed text")
    {
        CHECK_THROWS_AS(parse_config("scenario: [unclosed"), ConfigError);
        CHECK_THROWS_AS(parse_config("- just a list"), ConfigError);
    }
}

TEST_CASE("emit_config round-trips")
{
    RunConfig c = parse_config(kMinimal);
    c.scenario.rx_pitch = 16.0;
    c.scenario.lambertian.refractive_index = 1.23456789012345;
    c.degree_weights = irsa16_degree_weights();
    c.slots = 100;
    c.pa = {0.1, 1.0 / 3.0};
    c.trajectory = {{0.05, 10}, {0.5, 7}};
    c.fov_grid = {12.5, 0.1 + 0.2};
    c.seed = 18446744073709551615ULL;
    c.adapt.estimator = Estimator::power;
    c.adapt.preamble_fov = PreambleFov::wide;
    c.adapt.noise_sigma = 1e-9;
    c.output = {"out dir/result.json", OutputFormat::json};

    const auto back = parse_config(emit_config(c));
    CHECK(back == c);

    const auto hall_cfg = load_config(OWCSIM_CONFIG_DIR "/hall.yaml");
    CHECK(parse_config(emit_config(hall_cfg)) == hall_cfg);
}

TEST_CASE("trajectory expansion")
{
    RunConfig c;
    c.trajectory = {{0.1, 2}, {0.4, 3}};
    CHECK(c.pa_per_frame() == std::vector<double>{0.1, 0.1, 0.4, 0.4, 0.4});
}

TEST_CASE("presets")
{
    const auto base = parse_config(kMinimal);
    CHECK(parse_preset("fig4") == Preset::fig4);
    CHECK_FALSE(parse_preset("fig7").has_value());

    const auto fig4 = apply_preset(base, Preset::fig4);
    REQUIRE(fig4.size() == 3);
    CHECK(fig4[0].label == "1x1");
    CHECK(fig4[2].config.scenario.receiver_count() == 25);
    for (const auto& v : fig4) {
        CHECK(v.config.slots == 1);
        CHECK(v.config.omega().probability(1) == 1.0);
        CHECK(v.config.pa == base.pa);
        CHECK_NOTHROW(v.config.validate());
    }

    const auto fig5 = apply_preset(base, Preset::fig5);
    REQUIRE(fig5.size() == 3);
    CHECK(fig5[1].config.slots == 100);
    CHECK(fig5[1].config.omega().max_degree() == 16);

    const auto fig6 = apply_preset(base, Preset::fig6);
    REQUIRE(fig6.size() == 3);
    CHECK(fig6[0].label == "1");
    CHECK(fig6[0].config.slots == 5);
    CHECK(fig6[1].config.slots == 10);
    CHECK(fig6[2].config.slots == 100);
    for (const auto& v : fig6) {
        CHECK(v.config.scenario.receiver_count() == 9);
        CHECK(v.config.omega().probability(2) == 1.0);
    }
}

TEST_CASE("report tables")
{
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(1.0 / 3.0) == "0.333333333");
    CHECK(format_real(123456789.0) == "123456789");
    CHECK(format_real(1e-7) == "1e-07");
    CHECK(format_real(std::nan("")) == "nan");

    SweepTable t;
    t.pa = {0.1, 0.2};
    t.fov_deg = {30, 40, 50};
    t.cells.resize(6);
    t.seed = 9;
    const auto table = sweep_table(t);
    CHECK(table.rows.size() == 6);

    std::ostringstream csv;
    write_csv(csv, table);
    const std::string text = csv.str();
    CHECK(text.rfind("pa,fov_deg,p_rec,p_rec_se,r_avg,r_avg_se,frames,seed\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
    CHECK(text.find("pa,", 1) == std::string::npos);

    std::ostringstream json;
    write_json(json, table);
    const auto parsed = nlohmann::json::parse(json.str());
    REQUIRE(parsed.is_array());
    CHECK(parsed.size() == 6);
    CHECK(parsed[5]["pa"] == 0.2);
    CHECK(parsed[5]["fov_deg"] == 50);
    CHECK(parsed[5]["seed"] == 9);

    std::vector<AdaptiveFrameRecord> recs(1);
    recs[0].pa_est = std::nan("");
    recs[0].estimate_ok = false;
    std::ostringstream aj;
    write_json(aj, adapt_table(recs));
    const auto a = nlohmann::json::parse(aj.str());
    CHECK(a[0]["pa_est"].is_null());
    CHECK(a[0]["estimate_ok"] == 0);

    const FovLookupTable lut({{0.1, 40, 0.5, 0.9}});
    std::ostringstream lc;
    write_csv(lc, lookup_table(lut));
    CHECK(lc.str() == "pa,fov_opt_deg,r_avg_max,p_rec_at_opt\n0.1,40,0.5,0.9\n");
}
