#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "owcsim/adapt.hpp"
#include "owcsim/geometry.hpp"
#include "owcsim/sim.hpp"

namespace owcsim {

/// Output schema version; bump when any table's columns change.
inline constexpr int kOutputSchemaVersion = 1;

/// Reals are written with 9 significant digits.
std::string format_real(double value);

struct Cell
{
    std::string text;
    bool numeric = true;  // JSON writes numeric cells as numbers ("nan" becomes null)
};

/// A flat result table; CSV and JSON are two renderings of the same rows.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& out, const Table& table);
/// Array of row objects keyed by column name.
void write_json(std::ostream& out, const Table& table);

/// pa, fov_deg, p_rec, p_rec_se, r_avg, r_avg_se, frames, seed
Table sweep_table(const SweepTable& sweep);
Table metrics_table(double pa, double fov_deg, const Metrics& metrics, std::uint64_t seed);

/// pa, fov_opt_deg, r_avg_max, p_rec_at_opt
Table lookup_table(const FovLookupTable& lookup);

/// frame, pa_true, pa_est, estimate_ok, fov_deg, active, decoded, p_rec, r_avg
Table adapt_table(std::span<const AdaptiveFrameRecord> records);

/// tx_index, rx_index, gain, incidence_deg for every device/AP pair
Table coverage_table(const Coverage& coverage);

}  // namespace owcsim
