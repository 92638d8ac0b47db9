#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sqlfuzz/detector.hpp"
#include "sqlfuzz/mutations.hpp"
#include "sqlfuzz/rng.hpp"
#include "sqlfuzz/threads.hpp"

namespace sqlfuzz {

struct MutationTreeNode {
    std::string payload;
    double confidence = 1.0;
    std::optional<std::size_t> parent;  // index into the pool's node store
    std::optional<MutationOp> op;       // operator that produced this node
    std::uint32_t round = 0;
    double created_at_ms = 0.0;  // monotonic, relative to search start
};

/// Mutation tree stored as a min-priority queue keyed by confidence, with
/// (round, insertion sequence) as the tie-break. Nothing is ever evicted:
/// expanding the head leaves it in the pool, which is what lets the search
/// backtrack to older payloads when a branch dries up.
class PayloadPool {
public:
    /// Inserts iff the node is the root or strictly improves on its parent.
    /// Returns whether the node was kept.
    bool enqueue(MutationTreeNode node);

    const MutationTreeNode& peek() const;  // node with minimal confidence
    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }

    const MutationTreeNode& node(std::size_t index) const { return nodes_[index]; }
    std::size_t peek_index() const;

private:
    struct Key {
        double confidence;
        std::uint32_t round;
        std::uint64_t seq;
        bool operator<(const Key& o) const {
            if (confidence != o.confidence) return confidence < o.confidence;
            if (round != o.round) return round < o.round;
            return seq < o.seq;
        }
    };
    std::deque<MutationTreeNode> nodes_;
    std::set<std::pair<Key, std::size_t>> order_;
    std::uint64_t next_seq_ = 0;
};

struct EvasionConfig {
    double threshold = 0.5;
    std::uint32_t max_rounds = 1000;
    std::uint32_t round_size = 16;
    std::uint64_t seed = 0;
    std::optional<double> time_budget_ms;
    MutationOptions mutation_options;
    /// When set, snapshot elapsed_ms is derived from the cumulative
    /// evaluation count instead of the wall clock, so emitted traces are
    /// bit-reproducible. time_budget_ms always uses the wall clock.
    std::function<double(std::uint64_t)> trace_time;
};

struct TraceSnapshot {
    std::uint32_t round = 0;
    double elapsed_ms = 0.0;
    double best_confidence = 1.0;
    std::string payload;
    std::uint64_t evaluations = 0;  // cumulative classifier calls so far
};

struct EvasionResult {
    std::string best_payload;
    double best_confidence = 1.0;
    bool success = false;  // best_confidence <= threshold
    std::uint32_t rounds_used = 0;
    double elapsed_ms = 0.0;
    std::uint64_t evaluations = 0;
    std::vector<TraceSnapshot> trace;
};

/// Optional streaming sink for trace snapshots (consumed by bench and cli).
using TraceSink = std::function<void(const TraceSnapshot&)>;

/// Guided search: expand the pool head each round into round_size mutants,
/// classify them (in parallel when pmap allows), keep only strict
/// improvements, stop at threshold or when the budget runs out.
/// Throws std::runtime_error naming the payload if the classifier throws.
EvasionResult evade(const Detector& model, const std::string& initial_payload,
                    const EvasionConfig& cfg, const ParallelMap& pmap = serial_map(),
                    const TraceSink& sink = {});

/// Unguided baseline: a random walk of single mutations, scoring each step
/// and tracking the best-ever confidence. Step budget equals the guided
/// evaluation budget (max_rounds * round_size).
EvasionResult evade_unguided(const Detector& model, const std::string& initial_payload,
                             const EvasionConfig& cfg, const TraceSink& sink = {});

/// Best-so-far confidence of a trace at a given evaluation count.
double best_confidence_at(const std::vector<TraceSnapshot>& trace, std::uint64_t evaluations);

}  // namespace sqlfuzz
