#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "owcsim/geometry.hpp"
#include "owcsim/random.hpp"

namespace owcsim {

/// Replica degree distribution Omega(x) = sum_d Omega_d x^d, d = 1..D.
class DegreeDistribution
{
public:
    /// Normalizes raw weights keyed by degree. Throws std::invalid_argument
    /// on a negative or non-finite weight, a degree < 1, or an all-zero map.
    static DegreeDistribution normalized(const std::map<int, double>& raw);

    int max_degree() const noexcept { return static_cast<int>(pmf_.size()); }

    /// Omega_d; zero outside 1..D.
    double probability(int degree) const noexcept
    {
        return degree >= 1 && degree <= max_degree() ? pmf_[static_cast<std::size_t>(degree - 1)]
                                                     : 0.0;
    }

    /// Sum of the raw weights before normalization.
    double raw_sum() const noexcept { return raw_sum_; }

    double mean_degree() const noexcept;

    /// Inverse-CDF draw; consumes exactly one uniform.
    int sample(Rng& rng) const noexcept;

    std::map<int, double> weights() const;

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    double raw_sum_ = 0.0;
};

DegreeDistribution normalize_distribution(const std::map<int, double>& raw);

/// Ascending indices of devices active in this frame; one Bernoulli draw per
/// device in index order.
std::vector<int> sample_activity(int devices, double activation_prob, Rng& rng);

int sample_degree(const DegreeDistribution& omega, Rng& rng);

/// Uniform d-subset of {0..slots-1}, ascending. Throws std::invalid_argument
/// unless 1 <= d <= slots.
std::vector<int> place_replicas(int degree, int slots, Rng& rng);

/// One frame's random realization: who is active and where each replica goes.
struct FrameInstance
{
    int devices = 0;
    int slots = 0;
    std::vector<int> active;           // ascending global device indices
    std::vector<int> replica_offsets;  // size active.size() + 1
    std::vector<int> replica_slots;    // ascending within each device

    std::span<const int> slots_of(std::size_t a) const noexcept
    {
        return {replica_slots.data() + replica_offsets[a],
                static_cast<std::size_t>(replica_offsets[a + 1] - replica_offsets[a])};
    }
};

/**
 * Draws frames with the fixed stream order: one activity draw per device in
 * index order, then for each active device (ascending) its degree followed by
 * its slot draws. Holds scratch buffers so repeated frames do not allocate.
 */
class FrameGenerator
{
public:
    FrameGenerator(int devices, const DegreeDistribution& omega, int slots);

    void generate(double activation_prob, Rng& rng, FrameInstance& out);

    int devices() const noexcept { return devices_; }
    int slots() const noexcept { return slots_; }

private:
    int devices_;
    int slots_;
    DegreeDistribution omega_;
    std::vector<int> perm_;
    std::vector<int> swaps_;
};

FrameInstance generate_frame(int devices, double activation_prob,
                             const DegreeDistribution& omega, int slots, Rng& rng);

/// Slot node index for slot k at receiver j.
constexpr int slot_node(int receiver, int slot, int slots) noexcept
{
    return receiver * slots + slot;
}

/**
 * Bipartite graph between active device nodes and (receiver, slot) nodes.
 * Edge (i, jk) exists iff device i reaches receiver j and put a replica in
 * slot k. Adjacency is stored in both directions as CSR.
 */
class CsaGraph
{
public:
    CsaGraph() = default;

    /// Builds from an explicit edge list of (device node, slot node) pairs.
    /// Duplicate pairs collapse to one edge.
    CsaGraph(std::vector<int> device_ids, int receivers, int slots,
             std::vector<std::pair<int, int>> edges);

    int receivers() const noexcept { return receivers_; }
    int slots() const noexcept { return slots_; }

    std::size_t device_node_count() const noexcept { return device_ids_.size(); }
    std::size_t slot_node_count() const noexcept
    {
        return static_cast<std::size_t>(receivers_) * static_cast<std::size_t>(slots_);
    }
    std::size_t edge_count() const noexcept { return device_adj_.size(); }

    int device_id(std::size_t node) const noexcept { return device_ids_[node]; }
    std::span<const int> device_ids() const noexcept { return device_ids_; }

    std::span<const int> slots_of(std::size_t device_node) const noexcept
    {
        return {device_adj_.data() + device_offsets_[device_node],
                device_offsets_[device_node + 1] - device_offsets_[device_node]};
    }
    std::span<const int> devices_of(std::size_t slot_node) const noexcept
    {
        return {slot_adj_.data() + slot_offsets_[slot_node],
                slot_offsets_[slot_node + 1] - slot_offsets_[slot_node]};
    }

    template <class F>
    void for_each_slot_of(std::size_t device_node, F&& f) const
    {
        for (int s : slots_of(device_node)) {
            f(s);
        }
    }

private:
    int receivers_ = 0;
    int slots_ = 0;
    std::vector<int> device_ids_;
    std::vector<std::size_t> device_offsets_{0};
    std::vector<int> device_adj_;
    std::vector<std::size_t> slot_offsets_{0};
    std::vector<int> slot_adj_;
};

CsaGraph build_graph(const FrameInstance& frame, const GainMatrix& gains);

/// Empirical node-degree histogram; fractions[d] is the share of nodes with
/// degree d (d = 0 included).
struct DegreeHistogram
{
    std::size_t nodes = 0;
    std::vector<double> fractions;

    bool empty() const noexcept { return nodes == 0; }
    double at(std::size_t degree) const noexcept
    {
        return degree < fractions.size() ? fractions[degree] : 0.0;
    }
};

struct GraphDegreeDistributions
{
    DegreeHistogram device;  // Lambda
    DegreeHistogram slot;    // P
};

GraphDegreeDistributions measure_degree_distributions(const CsaGraph& graph);

}  // namespace owcsim
