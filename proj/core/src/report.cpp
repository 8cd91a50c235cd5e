#include "owcsim/report.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

namespace owcsim {
namespace {

Cell real(double v) { return {format_real(v), true}; }
Cell integer(std::uint64_t v) { return {std::to_string(v), true}; }
Cell flag(bool v) { return {v ? "1" : "0", true}; }

}  // namespace

std::string format_real(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    return fmt::format("{:.9g}", value);
}

void write_csv(std::ostream& out, const Table& table)
{
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << row[c].text;
        }
        out << '\n';
    }
}

void write_json(std::ostream& out, const Table& table)
{
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            const Cell& cell = row[c];
            if (!cell.numeric) {
                obj[table.columns[c]] = cell.text;
            }
            else if (cell.text == "nan") {
                obj[table.columns[c]] = nullptr;
            }
            else {
                obj[table.columns[c]] = nlohmann::ordered_json::parse(cell.text);
            }
        }
        rows.push_back(std::move(obj));
    }
    out << rows.dump(2) << '\n';
}

Table metrics_table(double pa, double fov_deg, const Metrics& m, std::uint64_t seed)
{
    Table t;
    t.columns = {"pa", "fov_deg", "p_rec", "p_rec_se", "r_avg", "r_avg_se", "frames", "seed"};
    t.rows.push_back({real(pa), real(fov_deg), real(m.p_rec), real(m.p_rec_se), real(m.r_avg),
                      real(m.r_avg_se), integer(m.frames), integer(seed)});
    return t;
}

Table sweep_table(const SweepTable& sweep)
{
    Table t = metrics_table(0, 0, Metrics{}, 0);
    t.rows.clear();
    for (std::size_t a = 0; a < sweep.pa.size(); ++a) {
        for (std::size_t f = 0; f < sweep.fov_deg.size(); ++f) {
            auto row = metrics_table(sweep.pa[a], sweep.fov_deg[f], sweep.at(a, f), sweep.seed);
            t.rows.push_back(std::move(row.rows.front()));
        }
    }
    return t;
}

Table lookup_table(const FovLookupTable& lookup)
{
    Table t;
    t.columns = {"pa", "fov_opt_deg", "r_avg_max", "p_rec_at_opt"};
    for (const auto& e : lookup.entries()) {
        t.rows.push_back({real(e.pa), real(e.fov_deg), real(e.r_avg), real(e.p_rec)});
    }
    return t;
}

Table adapt_table(std::span<const AdaptiveFrameRecord> records)
{
    Table t;
    t.columns = {"frame", "pa_true", "pa_est", "estimate_ok", "fov_deg",
                 "active", "decoded", "p_rec", "r_avg"};
    for (const auto& r : records) {
        t.rows.push_back({integer(r.frame), real(r.pa_true), real(r.pa_est), flag(r.estimate_ok),
                          real(r.fov_deg), integer(static_cast<std::uint64_t>(r.active)),
                          integer(static_cast<std::uint64_t>(r.decoded)), real(r.p_rec),
                          real(r.r_avg)});
    }
    return t;
}

Table coverage_table(const Coverage& coverage)
{
    Table t;
    t.columns = {"tx_index", "rx_index", "gain", "incidence_deg"};
    const auto& g = coverage.gains;
    for (std::size_t i = 0; i < g.devices(); ++i) {
        for (std::size_t j = 0; j < g.receivers(); ++j) {
            t.rows.push_back({integer(i), integer(j), real(g(i, j)),
                              real(coverage.incidence(i, j))});
        }
    }
    return t;
}

}  // namespace owcsim
