#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "owcsim/geometry.hpp"
#include "owcsim/protocol.hpp"
#include "owcsim/random.hpp"
#include "owcsim/sim.hpp"

namespace owcsim {

struct FovLookupEntry
{
    double pa = 0.0;
    double fov_deg = 0.0;  // throughput-maximizing FOV
    double r_avg = 0.0;    // R_avg at that FOV
    double p_rec = 0.0;    // p_rec at that FOV
};

/// Maps an activation probability to the FOV that maximized R_avg on the
/// nearest grid point.
class FovLookupTable
{
public:
    FovLookupTable() = default;
    /// Throws std::invalid_argument unless the p_a column is strictly increasing.
    explicit FovLookupTable(std::vector<FovLookupEntry> entries);

    const std::vector<FovLookupEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Nearest grid point; an exact midpoint resolves to the lower p_a.
    const FovLookupEntry& nearest(double pa) const;
    double fov_for(double pa) const { return nearest(pa).fov_deg; }

private:
    std::vector<FovLookupEntry> entries_;
};

/// Row-wise argmax of R_avg over the FOV axis; ties go to the larger FOV.
FovLookupTable select_optimal_fov(const SweepTable& table);

FovLookupTable optimize_fov(const Scenario& scenario, std::span<const double> pa_grid,
                            std::span<const double> fov_grid, const DegreeDistribution& omega,
                            int slots, std::uint64_t n_frames, std::uint64_t seed,
                            const RunOptions& options = {});

/// Received preamble power per AP, in watts.
struct PreambleObservation
{
    std::vector<double> power;
};

/// All active devices send the same preamble at P_tx. Each AP sees the sum of
/// P_tx * h_ij over active devices, plus optional N(0, noise_sigma^2).
PreambleObservation observe_preamble(std::span<const int> active, const GainMatrix& gains,
                                     double tx_power, double noise_sigma = 0.0,
                                     Rng* noise = nullptr);

double estimate_pa_oracle(std::size_t active_count, std::size_t devices);

/**
 * Method-of-moments estimate from the summed preamble power:
 *
 *   clamp( sum_j obs_j / (P_tx * sum_ij h_ij), 0, 1 )
 *
 * Unbiased before clamping in the noiseless model. Throws EstimationError
 * when no device is covered.
 */
double estimate_pa_power(const PreambleObservation& obs, const GainMatrix& gains,
                         double tx_power);

enum class Estimator { oracle, power };
enum class PreambleFov { current, wide };

struct AdaptOptions
{
    Estimator estimator = Estimator::oracle;
    double noise_sigma = 0.0;
    PreambleFov preamble_fov = PreambleFov::current;
    double wide_fov_deg = 89.0;

    friend bool operator==(const AdaptOptions&, const AdaptOptions&) = default;
};

struct AdaptiveFrameRecord
{
    std::uint64_t frame = 0;
    double pa_true = 0.0;
    double pa_est = 0.0;
    bool estimate_ok = true;
    double fov_deg = 0.0;  // FOV the data slots were decoded with
    int active = 0;
    int decoded = 0;
    double p_rec = 1.0;    // per frame; 1 when nothing was sent
    double r_avg = 0.0;    // per frame: decoded / (M * L)
};

/**
 * Closed-loop run over a per-frame p_a trajectory. Each frame: draw the
 * frame at the true p_a, observe the preamble, estimate p_a, switch the FOV to
 * lookup(estimate), then decode. The preamble is observed through the FOV in
 * force before adaptation (or a fixed wide FOV). If estimation fails the frame
 * is flagged and decoded at the previous FOV. Starts at scenario.fov_deg.
 *
 * Frame f uses the same protocol stream as run_frames frame f, so a
 * single-entry lookup reproduces run_frames exactly.
 */
std::vector<AdaptiveFrameRecord> adaptive_run(const Scenario& scenario,
                                              std::span<const double> pa_trajectory,
                                              const FovLookupTable& lookup,
                                              const DegreeDistribution& omega, int slots,
                                              std::uint64_t seed, const AdaptOptions& options = {});

/// Aggregates adaptive records as run_frames would.
Metrics summarize(std::span<const AdaptiveFrameRecord> records, int receivers, int slots);

}  // namespace owcsim
