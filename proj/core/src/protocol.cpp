#include "owcsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace owcsim {
namespace {

// Partial Fisher-Yates over an identity permutation. The swaps are undone
// afterwards so `perm` is the identity again on return, which makes the
// chosen subset depend only on the rng draws.
void draw_subset(int degree, std::vector<int>& perm, std::vector<int>& swaps, Rng& rng,
                 std::vector<int>& out)
{
    const auto slots = static_cast<std::uint64_t>(perm.size());
    const auto first = static_cast<std::ptrdiff_t>(out.size());
    swaps.clear();
    for (int t = 0; t < degree; ++t) {
        const auto r = static_cast<int>(t + rng.below(slots - static_cast<std::uint64_t>(t)));
        std::swap(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(r)]);
        swaps.push_back(r);
        out.push_back(perm[static_cast<std::size_t>(t)]);
    }
    for (int t = degree - 1; t >= 0; --t) {
        std::swap(perm[static_cast<std::size_t>(t)],
                  perm[static_cast<std::size_t>(swaps[static_cast<std::size_t>(t)])]);
    }
    std::sort(out.begin() + first, out.end());
}

}  // namespace

DegreeDistribution DegreeDistribution::normalized(const std::map<int, double>& raw)
{
    if (raw.empty()) {
        throw std::invalid_argument("degree distribution is empty");
    }
    double sum = 0.0;
    for (const auto& [degree, weight] : raw) {
        if (degree < 1) {
            throw std::invalid_argument("degree " + std::to_string(degree) + " is below 1");
        }
        if (!std::isfinite(weight) || weight < 0.0) {
            throw std::invalid_argument("weight for degree " + std::to_string(degree)
                                        + " must be finite and non-negative");
        }
        sum += weight;
    }
    if (!(sum > 0.0)) {
        throw std::invalid_argument("degree distribution has no positive weight");
    }

    int top = 0;
    for (const auto& [degree, weight] : raw) {
        if (weight > 0.0) {
            top = std::max(top, degree);
        }
    }

    DegreeDistribution out;
    out.raw_sum_ = sum;
    out.pmf_.assign(static_cast<std::size_t>(top), 0.0);
    for (const auto& [degree, weight] : raw) {
        if (degree <= top) {
            out.pmf_[static_cast<std::size_t>(degree - 1)] = weight / sum;
        }
    }
    out.cdf_.resize(out.pmf_.size());
    std::partial_sum(out.pmf_.begin(), out.pmf_.end(), out.cdf_.begin());
    out.cdf_.back() = 1.0;
    return out;
}

double DegreeDistribution::mean_degree() const noexcept
{
    double mean = 0.0;
    for (std::size_t d = 0; d < pmf_.size(); ++d) {
        mean += static_cast<double>(d + 1) * pmf_[d];
    }
    return mean;
}

int DegreeDistribution::sample(Rng& rng) const noexcept
{
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(it - cdf_.begin()) + 1;
}

std::map<int, double> DegreeDistribution::weights() const
{
    std::map<int, double> out;
    for (std::size_t d = 0; d < pmf_.size(); ++d) {
        if (pmf_[d] > 0.0) {
            out.emplace(static_cast<int>(d + 1), pmf_[d]);
        }
    }
    return out;
}

DegreeDistribution normalize_distribution(const std::map<int, double>& raw)
{
    return DegreeDistribution::normalized(raw);
}

std::vector<int> sample_activity(int devices, double activation_prob, Rng& rng)
{
    std::vector<int> active;
    for (int i = 0; i < devices; ++i) {
        if (rng.bernoulli(activation_prob)) {
            active.push_back(i);
        }
    }
    return active;
}

int sample_degree(const DegreeDistribution& omega, Rng& rng)
{
    return omega.sample(rng);
}

std::vector<int> place_replicas(int degree, int slots, Rng& rng)
{
    if (slots < 1 || degree < 1 || degree > slots) {
        throw std::invalid_argument("replica degree " + std::to_string(degree)
                                    + " must lie in [1, " + std::to_string(slots) + "]");
    }
    std::vector<int> perm(static_cast<std::size_t>(slots));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(degree));
    std::vector<int> swaps;
    draw_subset(degree, perm, swaps, rng, out);
    return out;
}

FrameGenerator::FrameGenerator(int devices, const DegreeDistribution& omega, int slots)
    : devices_(devices), slots_(slots), omega_(omega), perm_(static_cast<std::size_t>(slots))
{
    if (devices < 0) {
        throw std::invalid_argument("device count must be non-negative");
    }
    if (slots < 1) {
        throw std::invalid_argument("frame needs at least one slot");
    }
    if (omega.max_degree() > slots) {
        throw std::invalid_argument("maximum replica degree "
                                    + std::to_string(omega.max_degree())
                                    + " exceeds the frame length " + std::to_string(slots));
    }
    std::iota(perm_.begin(), perm_.end(), 0);
}

void FrameGenerator::generate(double activation_prob, Rng& rng, FrameInstance& out)
{
    out.devices = devices_;
    out.slots = slots_;
    out.active.clear();
    out.replica_offsets.assign(1, 0);
    out.replica_slots.clear();

    for (int i = 0; i < devices_; ++i) {
        if (rng.bernoulli(activation_prob)) {
            out.active.push_back(i);
        }
    }
    for (std::size_t a = 0; a < out.active.size(); ++a) {
        const int degree = omega_.sample(rng);
        draw_subset(degree, perm_, swaps_, rng, out.replica_slots);
        out.replica_offsets.push_back(static_cast<int>(out.replica_slots.size()));
    }
}

FrameInstance generate_frame(int devices, double activation_prob,
                             const DegreeDistribution& omega, int slots, Rng& rng)
{
    FrameGenerator gen(devices, omega, slots);
    FrameInstance out;
    gen.generate(activation_prob, rng, out);
    return out;
}

CsaGraph::CsaGraph(std::vector<int> device_ids, int receivers, int slots,
                   std::vector<std::pair<int, int>> edges)
    : receivers_(receivers), slots_(slots), device_ids_(std::move(device_ids))
{
    const std::size_t n_dev = device_ids_.size();
    const std::size_t n_slot = slot_node_count();
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    device_offsets_.assign(n_dev + 1, 0);
    slot_offsets_.assign(n_slot + 1, 0);
    for (const auto& [d, s] : edges) {
        if (d < 0 || static_cast<std::size_t>(d) >= n_dev || s < 0
            || static_cast<std::size_t>(s) >= n_slot) {
            throw std::out_of_range("edge endpoint outside the graph");
        }
        ++device_offsets_[static_cast<std::size_t>(d) + 1];
        ++slot_offsets_[static_cast<std::size_t>(s) + 1];
    }
    std::partial_sum(device_offsets_.begin(), device_offsets_.end(), device_offsets_.begin());
    std::partial_sum(slot_offsets_.begin(), slot_offsets_.end(), slot_offsets_.begin());

    device_adj_.resize(edges.size());
    slot_adj_.resize(edges.size());
    std::vector<std::size_t> dev_fill(device_offsets_.begin(), device_offsets_.end() - 1);
    std::vector<std::size_t> slot_fill(slot_offsets_.begin(), slot_offsets_.end() - 1);
    // Edges are sorted by (device, slot), so both adjacency lists come out ascending.
    for (const auto& [d, s] : edges) {
        device_adj_[dev_fill[static_cast<std::size_t>(d)]++] = s;
        slot_adj_[slot_fill[static_cast<std::size_t>(s)]++] = d;
    }
}

CsaGraph build_graph(const FrameInstance& frame, const GainMatrix& gains)
{
    if (gains.devices() != static_cast<std::size_t>(frame.devices)) {
        throw std::invalid_argument("gain matrix rows do not match the frame's device count");
    }
    const int receivers = static_cast<int>(gains.receivers());
    std::vector<std::pair<int, int>> edges;
    for (std::size_t a = 0; a < frame.active.size(); ++a) {
        const auto row = gains.row(static_cast<std::size_t>(frame.active[a]));
        for (int j = 0; j < receivers; ++j) {
            if (!(row[static_cast<std::size_t>(j)] > 0.0)) {
                continue;
            }
            for (int k : frame.slots_of(a)) {
                edges.emplace_back(static_cast<int>(a), slot_node(j, k, frame.slots));
            }
        }
    }
    return CsaGraph(frame.active, receivers, frame.slots, std::move(edges));
}

GraphDegreeDistributions measure_degree_distributions(const CsaGraph& graph)
{
    auto histogram = [](std::size_t nodes, auto degree_of) {
        DegreeHistogram h;
        h.nodes = nodes;
        std::vector<std::size_t> counts;
        for (std::size_t v = 0; v < nodes; ++v) {
            const std::size_t d = degree_of(v);
            if (d >= counts.size()) {
                counts.resize(d + 1, 0);
            }
            ++counts[d];
        }
        h.fractions.reserve(counts.size());
        for (std::size_t c : counts) {
            h.fractions.push_back(static_cast<double>(c) / static_cast<double>(nodes));
        }
        return h;
    };

    GraphDegreeDistributions out;
    out.device = histogram(graph.device_node_count(),
                           [&](std::size_t v) { return graph.slots_of(v).size(); });
    out.slot = histogram(graph.slot_node_count(),
                         [&](std::size_t v) { return graph.devices_of(v).size(); });
    return out;
}

}  // namespace owcsim
