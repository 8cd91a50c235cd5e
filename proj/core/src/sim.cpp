#include "owcsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace owcsim {

void Tally::add(const TrialOutcome& outcome) noexcept
{
    const auto s = static_cast<std::uint64_t>(outcome.sent);
    const auto d = static_cast<std::uint64_t>(outcome.decoded);
    ++frames_;
    sent_ += s;
    decoded_ += d;
    sent_sq_ += s * s;
    decoded_sq_ += d * d;
    cross_ += s * d;
}

void Tally::merge(const Tally& other) noexcept
{
    frames_ += other.frames_;
    sent_ += other.sent_;
    decoded_ += other.decoded_;
    sent_sq_ += other.sent_sq_;
    decoded_sq_ += other.decoded_sq_;
    cross_ += other.cross_;
}

Metrics Tally::metrics(int receivers, int slots) const
{
    Metrics m;
    m.frames = frames_;
    m.sent = sent_;
    m.decoded = decoded_;
    if (frames_ == 0) {
        return m;
    }
    using Real = long double;
    const Real n = static_cast<Real>(frames_);
    const Real capacity = static_cast<Real>(receivers) * static_cast<Real>(slots);
    const Real mean_d = static_cast<Real>(decoded_) / n;
    const Real mean_s = static_cast<Real>(sent_) / n;

    m.r_avg = static_cast<double>(mean_d / capacity);

    Real var_d = 0;
    Real var_s = 0;
    Real cov = 0;
    if (frames_ > 1) {
        var_d = (static_cast<Real>(decoded_sq_) - n * mean_d * mean_d) / (n - 1);
        var_s = (static_cast<Real>(sent_sq_) - n * mean_s * mean_s) / (n - 1);
        cov = (static_cast<Real>(cross_) - n * mean_d * mean_s) / (n - 1);
        var_d = std::max<Real>(var_d, 0);
        var_s = std::max<Real>(var_s, 0);
    }
    m.r_avg_se = static_cast<double>(std::sqrt(var_d / n) / capacity);

    if (sent_ == 0) {
        m.p_rec = 1.0;
        m.p_rec_se = 0.0;
        m.zero_weight = true;
        return m;
    }
    m.zero_weight = false;
    const Real ratio = static_cast<Real>(decoded_) / static_cast<Real>(sent_);
    m.p_rec = static_cast<double>(ratio);
    const Real var_ratio = (var_d - 2 * ratio * cov + ratio * ratio * var_s) / (n * mean_s * mean_s);
    m.p_rec_se = static_cast<double>(std::sqrt(std::max<Real>(var_ratio, 0)));
    return m;
}

ReceiverMap ReceiverMap::from_gains(const GainMatrix& gains, bool merge_duplicates)
{
    const std::size_t n = gains.devices();
    const std::size_t m = gains.receivers();

    // Covered set per receiver, used as the merge key.
    std::vector<std::vector<int>> covered(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (gains(i, j) > 0.0) {
                covered[j].push_back(static_cast<int>(i));
            }
        }
    }

    std::vector<int> remap(m, -1);
    int kept = 0;
    std::map<std::vector<int>, int> seen;
    for (std::size_t j = 0; j < m; ++j) {
        if (covered[j].empty()) {
            continue;  // no edges either way
        }
        if (merge_duplicates) {
            auto [it, fresh] = seen.emplace(covered[j], kept);
            if (!fresh) {
                remap[j] = it->second;
                continue;
            }
        }
        remap[j] = kept++;
    }

    ReceiverMap out;
    out.receivers_ = merge_duplicates ? kept : static_cast<int>(m);
    out.nominal_receivers_ = static_cast<int>(m);
    out.offsets_.assign(1, 0);
    out.offsets_.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> rx;
        for (std::size_t j = 0; j < m; ++j) {
            if (gains(i, j) > 0.0) {
                rx.push_back(merge_duplicates ? remap[j] : static_cast<int>(j));
            }
        }
        std::sort(rx.begin(), rx.end());
        rx.erase(std::unique(rx.begin(), rx.end()), rx.end());
        if (!rx.empty()) {
            ++out.covered_;
        }
        out.adj_.insert(out.adj_.end(), rx.begin(), rx.end());
        out.offsets_.push_back(static_cast<int>(out.adj_.size()));
    }
    return out;
}

FrameRunner::FrameRunner(int devices, const DegreeDistribution& omega, int slots)
    : generator_(devices, omega, slots)
{
}

const FrameInstance& FrameRunner::generate(double activation_prob, Rng& rng)
{
    activation_prob_ = activation_prob;
    generator_.generate(activation_prob, rng, frame_);
    return frame_;
}

int FrameRunner::decode(const ReceiverMap& map, const DecodeTrace* trace)
{
    if (map.devices() != frame_.devices) {
        throw std::invalid_argument("receiver map does not match the frame's device count");
    }
    DecodeResult detail;
    const bool want_detail = trace != nullptr && *trace;
    return static_cast<int>(
        peeler_.decode(FrameView(frame_, map), want_detail ? &detail : nullptr, trace));
}

TrialOutcome FrameRunner::outcome(int decoded) const noexcept
{
    const auto active = static_cast<int>(frame_.active.size());
    return TrialOutcome{active, active, decoded, activation_prob_};
}

TrialOutcome FrameRunner::run(const ReceiverMap& map, double activation_prob, Rng& rng,
                              const DecodeTrace* trace)
{
    generate(activation_prob, rng);
    return outcome(decode(map, trace));
}

TrialOutcome run_frame(const ReceiverMap& coverage, double activation_prob,
                       const DegreeDistribution& omega, int slots, Rng& rng)
{
    FrameRunner runner(coverage.devices(), omega, slots);
    return runner.run(coverage, activation_prob, rng);
}

unsigned resolve_threads(unsigned requested) noexcept
{
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(std::uint64_t count, unsigned threads,
                     const std::function<void(unsigned, std::uint64_t, std::uint64_t)>& fn)
{
    if (count == 0) {
        return;
    }
    const auto workers =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), count));
    if (workers == 1) {
        fn(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t begin = count * w / workers;
        const std::uint64_t end = count * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(w, begin, end);
            }
            catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

namespace {

void check_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("activation probability must lie in [0, 1]");
    }
}

// Runs n_frames frames against several coverage maps at once; one tally per map.
std::vector<Tally> run_shared_frames(std::span<const ReceiverMap> maps, int devices,
                                     double activation_prob, const DegreeDistribution& omega,
                                     int slots, std::uint64_t n_frames, std::uint64_t seed,
                                     const RunOptions& options)
{
    check_probability(activation_prob);
    const SeedPolicy policy{seed};
    const bool tracing = options.trace != nullptr && *options.trace;
    const unsigned threads = tracing ? 1u : options.threads;
    const auto workers =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads),
                                                      std::max<std::uint64_t>(n_frames, 1)));

    std::vector<std::vector<Tally>> partial(workers, std::vector<Tally>(maps.size()));
    parallel_chunks(n_frames, threads, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
        FrameRunner runner(devices, omega, slots);
        auto& tallies = partial[w];
        for (std::uint64_t f = begin; f < end; ++f) {
            Rng rng = policy.frame_stream(f);
            runner.generate(activation_prob, rng);
            for (std::size_t c = 0; c < maps.size(); ++c) {
                int decoded = 0;
                if (tracing) {
                    const DecodeTrace per_frame = [&](int it, std::span<const int> ids) {
                        (*options.trace)(f, it, ids);
                    };
                    decoded = runner.decode(maps[c], &per_frame);
                }
                else {
                    decoded = runner.decode(maps[c]);
                }
                tallies[c].add(runner.outcome(decoded));
            }
        }
    });

    std::vector<Tally> total(maps.size());
    for (const auto& worker : partial) {
        for (std::size_t c = 0; c < maps.size(); ++c) {
            total[c].merge(worker[c]);
        }
    }
    return total;
}

}  // namespace

Metrics run_frames(const ReceiverMap& coverage, double activation_prob,
                   const DegreeDistribution& omega, int slots, std::uint64_t n_frames,
                   std::uint64_t seed, const RunOptions& options)
{
    if (n_frames < 1) {
        throw std::invalid_argument("n_frames must be >= 1");
    }
    const auto tallies = run_shared_frames(std::span(&coverage, 1), coverage.devices(),
                                           activation_prob, omega, slots, n_frames, seed, options);
    return tallies.front().metrics(coverage.nominal_receivers(), slots);
}

Metrics run_frames(const Scenario& scenario, double activation_prob, double fov_deg,
                   const DegreeDistribution& omega, int slots, std::uint64_t n_frames,
                   std::uint64_t seed, const RunOptions& options)
{
    const Coverage cov = coverage_sets(scenario.with_fov(fov_deg));
    return run_frames(ReceiverMap::from_gains(cov.gains), activation_prob, omega, slots, n_frames,
                      seed, options);
}

SweepTable sweep(const Scenario& scenario, std::span<const double> pa_grid,
                 std::span<const double> fov_grid, const DegreeDistribution& omega, int slots,
                 std::uint64_t n_frames, std::uint64_t seed, const RunOptions& options)
{
    if (pa_grid.empty() || fov_grid.empty()) {
        throw std::invalid_argument("sweep grids must be non-empty");
    }
    if (n_frames < 1) {
        throw std::invalid_argument("n_frames must be >= 1");
    }
    for (double p : pa_grid) {
        check_probability(p);
    }

    // Collapse FOVs that induce the same coverage into one decode class.
    std::vector<ReceiverMap> classes;
    std::vector<std::size_t> class_of(fov_grid.size());
    for (std::size_t f = 0; f < fov_grid.size(); ++f) {
        auto map = ReceiverMap::from_gains(coverage_sets(scenario.with_fov(fov_grid[f])).gains);
        const auto it = std::find(classes.begin(), classes.end(), map);
        if (it == classes.end()) {
            class_of[f] = classes.size();
            classes.push_back(std::move(map));
        }
        else {
            class_of[f] = static_cast<std::size_t>(it - classes.begin());
        }
    }

    SweepTable table;
    table.pa.assign(pa_grid.begin(), pa_grid.end());
    table.fov_deg.assign(fov_grid.begin(), fov_grid.end());
    table.seed = seed;
    table.receivers = scenario.receiver_count();
    table.slots = slots;
    table.cells.reserve(pa_grid.size() * fov_grid.size());
    for (double pa : pa_grid) {
        const auto tallies = run_shared_frames(classes, scenario.device_count(), pa, omega, slots,
                                               n_frames, seed, options);
        for (std::size_t f = 0; f < fov_grid.size(); ++f) {
            table.cells.push_back(tallies[class_of[f]].metrics(table.receivers, slots));
        }
    }
    return table;
}

}  // namespace owcsim
