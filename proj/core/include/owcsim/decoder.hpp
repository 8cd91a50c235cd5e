#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "owcsim/protocol.hpp"

namespace owcsim {

enum class SlotClass { empty, singleton, collision };

struct SlotState
{
    SlotClass classification = SlotClass::empty;
    std::vector<int> residual;  // undecoded device nodes still in the slot
};

/// Classifies every slot node given which device nodes are already decoded
/// (and therefore cancelled). `decoded` is indexed by device node.
std::vector<SlotState> classify_slots(const CsaGraph& graph, std::span<const char> decoded);

struct DecodeResult
{
    std::vector<int> decoded;         // global device ids, ascending
    int iterations = 0;               // productive iterations only
    std::vector<int> per_iteration;   // devices decoded in each iteration
};

/// Called once per productive iteration with the device ids it decoded.
using DecodeTrace = std::function<void(int iteration, std::span<const int> device_ids)>;

/**
 * Synchronous peeling decoder with reusable buffers.
 *
 * Works on any graph type exposing device_node_count(), slot_node_count(),
 * device_id(node) and for_each_slot_of(node, f). Each slot keeps its residual
 * degree and the XOR of its residual device nodes, so a singleton's device is
 * read off directly and cancellation is O(degree) per decoded device.
 *
 * Per iteration, every slot that is a singleton at the start is decoded as a
 * batch; then all edges of the newly decoded devices are removed across every
 * receiver and slot. Stops when no singleton remains or everything decoded.
 */
class Peeler
{
public:
    template <class Graph>
    std::size_t decode(const Graph& graph, DecodeResult* result = nullptr,
                       const DecodeTrace* trace = nullptr);

    /// Device nodes decoded by the last call, indexed by device node.
    std::span<const char> decoded_mask() const noexcept { return done_; }

private:
    std::vector<int> count_;
    std::vector<int> xor_;
    std::vector<char> done_;
    std::vector<int> frontier_;
    std::vector<int> next_;
    std::vector<int> batch_;
};

DecodeResult peel_decode(const CsaGraph& graph, const DecodeTrace* trace = nullptr);

/// Independent rescan decoder: every iteration recomputes every slot's
/// residual set from scratch. Slow; exists to cross-check peel_decode.
DecodeResult reference_decode(const CsaGraph& graph);

template <class Graph>
std::size_t Peeler::decode(const Graph& graph, DecodeResult* result, const DecodeTrace* trace)
{
    const std::size_t devices = graph.device_node_count();
    const std::size_t slots = graph.slot_node_count();
    count_.assign(slots, 0);
    xor_.assign(slots, 0);
    done_.assign(devices, 0);
    frontier_.clear();

    for (std::size_t v = 0; v < devices; ++v) {
        const int node = static_cast<int>(v);
        graph.for_each_slot_of(v, [&](int s) {
            ++count_[static_cast<std::size_t>(s)];
            xor_[static_cast<std::size_t>(s)] ^= node;
        });
    }
    for (std::size_t s = 0; s < slots; ++s) {
        if (count_[s] == 1) {
            frontier_.push_back(static_cast<int>(s));
        }
    }

    if (result) {
        *result = DecodeResult{};
    }
    std::size_t decoded = 0;
    int iteration = 0;
    while (!frontier_.empty() && decoded < devices) {
        batch_.clear();
        for (int s : frontier_) {
            if (count_[static_cast<std::size_t>(s)] != 1) {
                continue;
            }
            const int v = xor_[static_cast<std::size_t>(s)];
            if (!done_[static_cast<std::size_t>(v)]) {
                done_[static_cast<std::size_t>(v)] = 1;
                batch_.push_back(v);
            }
        }
        if (batch_.empty()) {
            break;
        }
        ++iteration;
        decoded += batch_.size();

        next_.clear();
        for (int v : batch_) {
            graph.for_each_slot_of(static_cast<std::size_t>(v), [&](int s) {
                auto& c = count_[static_cast<std::size_t>(s)];
                --c;
                xor_[static_cast<std::size_t>(s)] ^= v;
                if (c == 1) {
                    next_.push_back(s);
                }
            });
        }
        frontier_.swap(next_);

        if (result || trace) {
            std::vector<int> ids;
            ids.reserve(batch_.size());
            for (int v : batch_) {
                ids.push_back(graph.device_id(static_cast<std::size_t>(v)));
            }
            std::sort(ids.begin(), ids.end());
            if (trace && *trace) {
                (*trace)(iteration, ids);
            }
            if (result) {
                result->per_iteration.push_back(static_cast<int>(ids.size()));
                result->decoded.insert(result->decoded.end(), ids.begin(), ids.end());
            }
        }
    }
    if (result) {
        result->iterations = iteration;
        std::sort(result->decoded.begin(), result->decoded.end());
    }
    return decoded;
}

}  // namespace owcsim
