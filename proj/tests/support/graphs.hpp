#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "owcsim/decoder.hpp"
#include "owcsim/random.hpp"

namespace owcsim::testing {

struct Instance
{
    CsaGraph graph;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> ids;
    int receivers = 0;
    int slots = 0;
};

// Random active devices over N <= 10, M <= 2, L <= 4, some left uncovered.
inline Instance random_instance(Rng& rng)
{
    Instance in;
    const int n = 1 + static_cast<int>(rng.below(10));
    in.receivers = 1 + static_cast<int>(rng.below(2));
    in.slots = 1 + static_cast<int>(rng.below(4));
    for (int v = 0; v < n; ++v) {
        in.ids.push_back(3 * v + 1);
        std::vector<int> aps;
        for (int j = 0; j < in.receivers; ++j) {
            if (rng.bernoulli(0.7)) {
                aps.push_back(j);
            }
        }
        const int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(in.slots)));
        std::vector<int> perm(static_cast<std::size_t>(in.slots));
        std::iota(perm.begin(), perm.end(), 0);
        for (int k = 0; k < d; ++k) {
            const auto r = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(in.slots - k)));
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(r)]);
            for (int j : aps) {
                in.edges.emplace_back(v, slot_node(j, perm[static_cast<std::size_t>(k)], in.slots));
            }
        }
    }
    in.graph = CsaGraph(in.ids, in.receivers, in.slots, in.edges);
    return in;
}

// Sequential peeling with a random choice of singleton at every step.
inline std::vector<int> random_order_decode(const CsaGraph& g, Rng& rng)
{
    std::vector<char> done(g.device_node_count(), 0);
    for (;;) {
        std::vector<int> candidates;
        const auto states = classify_slots(g, done);
        for (const auto& s : states) {
            if (s.classification == SlotClass::singleton) {
                candidates.push_back(s.residual.front());
            }
        }
        if (candidates.empty()) {
            break;
        }
        done[static_cast<std::size_t>(candidates[rng.below(candidates.size())])] = 1;
    }
    std::vector<int> out;
    for (std::size_t v = 0; v < done.size(); ++v) {
        if (done[v]) {
            out.push_back(g.device_id(v));
        }
    }
    return out;
}

}  // namespace owcsim::testing
