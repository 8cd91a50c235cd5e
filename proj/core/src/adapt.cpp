#include "owcsim/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "owcsim/error.hpp"

namespace owcsim {

FovLookupTable::FovLookupTable(std::vector<FovLookupEntry> entries) : entries_(std::move(entries))
{
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (!(entries_[i].pa > entries_[i - 1].pa)) {
            throw std::invalid_argument("lookup p_a grid must be strictly increasing");
        }
    }
}

const FovLookupEntry& FovLookupTable::nearest(double pa) const
{
    if (entries_.empty()) {
        throw std::logic_error("FOV lookup table is empty");
    }
    const auto hi = std::lower_bound(entries_.begin(), entries_.end(), pa,
                                     [](const FovLookupEntry& e, double p) { return e.pa < p; });
    if (hi == entries_.begin()) {
        return *hi;
    }
    if (hi == entries_.end()) {
        return entries_.back();
    }
    const auto lo = hi - 1;
    return (pa - lo->pa) <= (hi->pa - pa) ? *lo : *hi;
}

FovLookupTable select_optimal_fov(const SweepTable& table)
{
    std::vector<FovLookupEntry> entries;
    entries.reserve(table.pa.size());
    for (std::size_t a = 0; a < table.pa.size(); ++a) {
        std::size_t best = 0;
        for (std::size_t f = 1; f < table.fov_deg.size(); ++f) {
            const double r = table.at(a, f).r_avg;
            const double r_best = table.at(a, best).r_avg;
            if (r > r_best || (r == r_best && table.fov_deg[f] > table.fov_deg[best])) {
                best = f;
            }
        }
        const Metrics& m = table.at(a, best);
        entries.push_back({table.pa[a], table.fov_deg[best], m.r_avg, m.p_rec});
    }
    return FovLookupTable(std::move(entries));
}

FovLookupTable optimize_fov(const Scenario& scenario, std::span<const double> pa_grid,
                            std::span<const double> fov_grid, const DegreeDistribution& omega,
                            int slots, std::uint64_t n_frames, std::uint64_t seed,
                            const RunOptions& options)
{
    return select_optimal_fov(
        sweep(scenario, pa_grid, fov_grid, omega, slots, n_frames, seed, options));
}

PreambleObservation observe_preamble(std::span<const int> active, const GainMatrix& gains,
                                     double tx_power, double noise_sigma, Rng* noise)
{
    PreambleObservation obs;
    obs.power.assign(gains.receivers(), 0.0);
    for (int i : active) {
        const auto row = gains.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < row.size(); ++j) {
            obs.power[j] += tx_power * row[j];
        }
    }
    if (noise_sigma > 0.0 && noise != nullptr) {
        for (double& p : obs.power) {
            p += noise_sigma * noise->normal();
        }
    }
    return obs;
}

double estimate_pa_oracle(std::size_t active_count, std::size_t devices)
{
    if (devices == 0) {
        return 0.0;
    }
    return static_cast<double>(active_count) / static_cast<double>(devices);
}

double estimate_pa_power(const PreambleObservation& obs, const GainMatrix& gains, double tx_power)
{
    if (obs.power.size() != gains.receivers()) {
        throw std::invalid_argument("preamble observation does not match the AP count");
    }
    const double total_gain = gains.total();
    if (!(total_gain > 0.0) || !(tx_power > 0.0)) {
        throw EstimationError("no device is covered; preamble power carries no information");
    }
    double received = 0.0;
    for (double p : obs.power) {
        received += p;
    }
    return std::clamp(received / (tx_power * total_gain), 0.0, 1.0);
}

namespace {

struct CoverageCache
{
    const Scenario& scenario;
    std::map<double, std::pair<Coverage, ReceiverMap>> entries;

    const std::pair<Coverage, ReceiverMap>& get(double fov)
    {
        auto it = entries.find(fov);
        if (it == entries.end()) {
            Coverage cov = coverage_sets(scenario.with_fov(fov));
            ReceiverMap map = ReceiverMap::from_gains(cov.gains);
            it = entries.emplace(fov, std::make_pair(std::move(cov), std::move(map))).first;
        }
        return it->second;
    }
};

}  // namespace

std::vector<AdaptiveFrameRecord> adaptive_run(const Scenario& scenario,
                                              std::span<const double> pa_trajectory,
                                              const FovLookupTable& lookup,
                                              const DegreeDistribution& omega, int slots,
                                              std::uint64_t seed, const AdaptOptions& options)
{
    if (lookup.empty()) {
        throw std::invalid_argument("adaptive run needs a non-empty FOV lookup table");
    }
    for (double p : pa_trajectory) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("trajectory probabilities must lie in [0, 1]");
        }
    }
    scenario.validate();

    const SeedPolicy policy{seed};
    const int receivers = scenario.receiver_count();
    const double tx_power = scenario.lambertian.tx_power;
    CoverageCache cache{scenario, {}};
    FrameRunner runner(scenario.device_count(), omega, slots);

    double fov = scenario.fov_deg;
    std::vector<AdaptiveFrameRecord> records;
    records.reserve(pa_trajectory.size());
    for (std::size_t f = 0; f < pa_trajectory.size(); ++f) {
        AdaptiveFrameRecord rec;
        rec.frame = f;
        rec.pa_true = pa_trajectory[f];

        Rng rng = policy.frame_stream(f);
        const FrameInstance& frame = runner.generate(rec.pa_true, rng);

        try {
            if (options.estimator == Estimator::oracle) {
                rec.pa_est = estimate_pa_oracle(frame.active.size(),
                                                static_cast<std::size_t>(frame.devices));
            }
            else {
                const double preamble_fov =
                    options.preamble_fov == PreambleFov::wide ? options.wide_fov_deg : fov;
                const GainMatrix& gains = cache.get(preamble_fov).first.gains;
                Rng noise = policy.frame_stream(f, 1);
                const auto obs =
                    observe_preamble(frame.active, gains, tx_power, options.noise_sigma, &noise);
                rec.pa_est = estimate_pa_power(obs, gains, tx_power);
            }
            fov = lookup.fov_for(rec.pa_est);
        }
        catch (const EstimationError&) {
            rec.estimate_ok = false;
            rec.pa_est = std::nan("");
        }

        rec.fov_deg = fov;
        const int decoded = runner.decode(cache.get(fov).second);
        rec.active = static_cast<int>(frame.active.size());
        rec.decoded = decoded;
        rec.p_rec = rec.active ? static_cast<double>(decoded) / rec.active : 1.0;
        rec.r_avg = static_cast<double>(decoded) / (static_cast<double>(receivers) * slots);
        records.push_back(rec);
    }
    return records;
}

Metrics summarize(std::span<const AdaptiveFrameRecord> records, int receivers, int slots)
{
    Tally tally;
    for (const auto& r : records) {
        tally.add(TrialOutcome{r.active, r.active, r.decoded, r.pa_true});
    }
    return tally.metrics(receivers, slots);
}

}  // namespace owcsim
