#include "owcsim/decoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace owcsim {

std::vector<SlotState> classify_slots(const CsaGraph& graph, std::span<const char> decoded)
{
    if (decoded.size() != graph.device_node_count()) {
        throw std::invalid_argument("decoded mask size does not match the device node count");
    }
    std::vector<SlotState> states(graph.slot_node_count());
    for (std::size_t s = 0; s < states.size(); ++s) {
        auto& state = states[s];
        for (int v : graph.devices_of(s)) {
            if (!decoded[static_cast<std::size_t>(v)]) {
                state.residual.push_back(v);
            }
        }
        switch (state.residual.size()) {
        case 0:
            state.classification = SlotClass::empty;
            break;
        case 1:
            state.classification = SlotClass::singleton;
            break;
        default:
            state.classification = SlotClass::collision;
            break;
        }
    }
    return states;
}

DecodeResult peel_decode(const CsaGraph& graph, const DecodeTrace* trace)
{
    Peeler peeler;
    DecodeResult result;
    peeler.decode(graph, &result, trace);
    return result;
}

DecodeResult reference_decode(const CsaGraph& graph)
{
    DecodeResult result;
    std::vector<char> decoded(graph.device_node_count(), 0);
    std::size_t total = 0;
    while (total < decoded.size()) {
        std::vector<int> fresh;
        for (const auto& state : classify_slots(graph, decoded)) {
            if (state.classification == SlotClass::singleton) {
                fresh.push_back(state.residual.front());
            }
        }
        std::sort(fresh.begin(), fresh.end());
        fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
        if (fresh.empty()) {
            break;
        }
        for (int v : fresh) {
            decoded[static_cast<std::size_t>(v)] = 1;
        }
        total += fresh.size();
        ++result.iterations;
        result.per_iteration.push_back(static_cast<int>(fresh.size()));
    }
    for (std::size_t v = 0; v < decoded.size(); ++v) {
        if (decoded[v]) {
            result.decoded.push_back(graph.device_id(v));
        }
    }
    std::sort(result.decoded.begin(), result.decoded.end());
    return result;
}

}  // namespace owcsim
