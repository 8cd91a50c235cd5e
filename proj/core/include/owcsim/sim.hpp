#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "owcsim/decoder.hpp"
#include "owcsim/geometry.hpp"
#include "owcsim/protocol.hpp"
#include "owcsim/random.hpp"

namespace owcsim {

struct TrialOutcome
{
    int active = 0;
    int sent = 0;  // every active device sends, covered or not
    int decoded = 0;
    double activation_prob = 0.0;
};

/// Aggregated run estimates. When nothing was sent, p_rec is reported as 1
/// and zero_weight is set so consumers can mask it.
struct Metrics
{
    double p_rec = 1.0;
    double p_rec_se = 0.0;
    double r_avg = 0.0;
    double r_avg_se = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t sent = 0;
    std::uint64_t decoded = 0;
    bool zero_weight = true;

    double mean_sent() const noexcept
    {
        return frames ? static_cast<double>(sent) / static_cast<double>(frames) : 0.0;
    }
    double mean_decoded() const noexcept
    {
        return frames ? static_cast<double>(decoded) / static_cast<double>(frames) : 0.0;
    }
    /// Standard error of the per-frame decoded count.
    double decoded_se(int receivers, int slots) const noexcept
    {
        return r_avg_se * receivers * slots;
    }
};

/**
 * Exact integer accumulator of frame outcomes. Merging is associative and
 * commutative, so any partition of frames across workers gives bit-identical
 * Metrics.
 */
class Tally
{
public:
    void add(const TrialOutcome& outcome) noexcept;
    void merge(const Tally& other) noexcept;

    /// p_rec = sum decoded / sum sent, R_avg = sum decoded / (frames * M * L),
    /// with delta-method standard errors from the per-frame counts.
    Metrics metrics(int receivers, int slots) const;

    std::uint64_t frames() const noexcept { return frames_; }

    friend bool operator==(const Tally&, const Tally&) = default;

private:
    std::uint64_t frames_ = 0;
    std::uint64_t sent_ = 0;
    std::uint64_t decoded_ = 0;
    std::uint64_t sent_sq_ = 0;
    std::uint64_t decoded_sq_ = 0;
    std::uint64_t cross_ = 0;
};

/**
 * Per-device receiver lists derived from a gain matrix (support only).
 *
 * With merge_duplicates, receivers whose covered sets are identical collapse
 * into one: their slot nodes would be exact twins, which never changes what
 * the peeling decoder recovers, so the simulator decodes the smaller graph.
 */
class ReceiverMap
{
public:
    ReceiverMap() = default;
    static ReceiverMap from_gains(const GainMatrix& gains, bool merge_duplicates = true);

    int devices() const noexcept { return static_cast<int>(offsets_.size()) - 1; }
    /// Distinct receivers kept after merging.
    int receivers() const noexcept { return receivers_; }
    /// Receivers in the original gain matrix (the M used for R_avg).
    int nominal_receivers() const noexcept { return nominal_receivers_; }
    int covered_devices() const noexcept { return covered_; }

    std::span<const int> receivers_of(int device) const noexcept
    {
        const auto d = static_cast<std::size_t>(device);
        return {adj_.data() + offsets_[d], static_cast<std::size_t>(offsets_[d + 1] - offsets_[d])};
    }

    friend bool operator==(const ReceiverMap&, const ReceiverMap&) = default;

private:
    int receivers_ = 0;
    int nominal_receivers_ = 0;
    int covered_ = 0;
    std::vector<int> offsets_{0};
    std::vector<int> adj_;
};

/// Implicit CSA graph of one frame: device node a reaches slot node (j, k)
/// for every receiver j of the device and every replica slot k.
class FrameView
{
public:
    FrameView(const FrameInstance& frame, const ReceiverMap& map) : frame_(frame), map_(map) {}

    std::size_t device_node_count() const noexcept { return frame_.active.size(); }
    std::size_t slot_node_count() const noexcept
    {
        return static_cast<std::size_t>(map_.receivers()) * static_cast<std::size_t>(frame_.slots);
    }
    int device_id(std::size_t node) const noexcept { return frame_.active[node]; }

    template <class F>
    void for_each_slot_of(std::size_t node, F&& f) const
    {
        const auto replicas = frame_.slots_of(node);
        for (int j : map_.receivers_of(frame_.active[node])) {
            const int base = j * frame_.slots;
            for (int k : replicas) {
                f(base + k);
            }
        }
    }

private:
    const FrameInstance& frame_;
    const ReceiverMap& map_;
};

/// Generates one frame and decodes it against one or more receiver maps.
class FrameRunner
{
public:
    FrameRunner(int devices, const DegreeDistribution& omega, int slots);

    const FrameInstance& generate(double activation_prob, Rng& rng);
    /// Decodes the last generated frame; returns the decoded device count.
    int decode(const ReceiverMap& map, const DecodeTrace* trace = nullptr);

    TrialOutcome outcome(int decoded) const noexcept;

    TrialOutcome run(const ReceiverMap& map, double activation_prob, Rng& rng,
                     const DecodeTrace* trace = nullptr);

    const FrameInstance& frame() const noexcept { return frame_; }

private:
    FrameGenerator generator_;
    FrameInstance frame_;
    Peeler peeler_;
    double activation_prob_ = 0.0;
};

/// Activity, degrees and slots, graph, peeling: one frame end to end.
TrialOutcome run_frame(const ReceiverMap& coverage, double activation_prob,
                       const DegreeDistribution& omega, int slots, Rng& rng);

/// Per-frame decoder trace: frame index, iteration, decoded device ids.
using FrameTrace =
    std::function<void(std::uint64_t frame, int iteration, std::span<const int> device_ids)>;

struct RunOptions
{
    unsigned threads = 0;         // 0 = hardware concurrency; never affects results
    const FrameTrace* trace = nullptr;  // forces a single worker when set
};

unsigned resolve_threads(unsigned requested) noexcept;

/**
 * Runs n_frames frames. Frame f always draws from SeedPolicy{seed} stream f,
 * so every cell of a sweep sees the same frame realizations (common random
 * numbers across FOVs) and results do not depend on worker count.
 */
Metrics run_frames(const Scenario& scenario, double activation_prob, double fov_deg,
                   const DegreeDistribution& omega, int slots, std::uint64_t n_frames,
                   std::uint64_t seed, const RunOptions& options = {});

/// Same, over an explicit coverage map.
Metrics run_frames(const ReceiverMap& coverage, double activation_prob,
                   const DegreeDistribution& omega, int slots, std::uint64_t n_frames,
                   std::uint64_t seed, const RunOptions& options = {});

struct SweepTable
{
    std::vector<double> pa;
    std::vector<double> fov_deg;
    std::vector<Metrics> cells;  // pa-major: cells[a * fov_deg.size() + f]
    std::uint64_t seed = 0;
    int receivers = 0;
    int slots = 0;

    const Metrics& at(std::size_t a, std::size_t f) const { return cells.at(a * fov_deg.size() + f); }
};

/// One Metrics cell per (p_a, FOV). FOVs with identical coverage share one
/// decode per frame, so their cells are identical.
SweepTable sweep(const Scenario& scenario, std::span<const double> pa_grid,
                 std::span<const double> fov_grid, const DegreeDistribution& omega, int slots,
                 std::uint64_t n_frames, std::uint64_t seed, const RunOptions& options = {});

/// Splits [0, count) into contiguous chunks, one per worker, and runs
/// fn(worker, begin, end) on each. Workers = min(resolve_threads(threads), count).
void parallel_chunks(std::uint64_t count, unsigned threads,
                     const std::function<void(unsigned, std::uint64_t, std::uint64_t)>& fn);

}  // namespace owcsim
