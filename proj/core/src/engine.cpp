#include "sqlfuzz/engine.hpp"

#include <chrono>
#include <stdexcept>

namespace sqlfuzz {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double classify_checked(const Detector& model, const std::string& payload) {
    double v;
    try {
        v = model.classify(payload);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("classifier failed on payload \"") + payload +
                                 "\": " + e.what());
    }
    if (!(v >= 0.0 && v <= 1.0))
        throw std::runtime_error("classifier returned out-of-range confidence on payload \"" +
                                 payload + "\"");
    return v;
}

}  // namespace

bool PayloadPool::enqueue(MutationTreeNode node) {
    if (node.parent) {
        if (!(node.confidence < nodes_[*node.parent].confidence)) return false;
    }
    std::size_t index = nodes_.size();
    Key key{node.confidence, node.round, next_seq_++};
    nodes_.push_back(std::move(node));
    order_.emplace(key, index);
    return true;
}

const MutationTreeNode& PayloadPool::peek() const {
    return nodes_[peek_index()];
}

std::size_t PayloadPool::peek_index() const {
    if (order_.empty()) throw std::logic_error("peek on empty pool");
    return order_.begin()->second;
}

EvasionResult evade(const Detector& model, const std::string& initial_payload,
                    const EvasionConfig& cfg, const ParallelMap& pmap, const TraceSink& sink) {
    const auto t0 = Clock::now();
    Rng rng(cfg.seed);
    PayloadPool pool;
    EvasionResult result;

    double v0 = classify_checked(model, initial_payload);
    result.evaluations = 1;
    pool.enqueue({initial_payload, v0, std::nullopt, std::nullopt, 0, ms_since(t0)});

    auto snapshot = [&](std::uint32_t round) {
        const MutationTreeNode& best = pool.peek();
        double t = cfg.trace_time ? cfg.trace_time(result.evaluations) : ms_since(t0);
        TraceSnapshot s{round, t, best.confidence, best.payload, result.evaluations};
        result.trace.push_back(s);
        if (sink) sink(s);
    };
    snapshot(0);

    std::uint32_t round = 0;
    while (pool.peek().confidence > cfg.threshold && round < cfg.max_rounds) {
        if (cfg.time_budget_ms && ms_since(t0) > *cfg.time_budget_ms) break;
        ++round;
        std::size_t head = pool.peek_index();
        const std::string parent_payload = pool.node(head).payload;

        std::vector<std::string> mutants(cfg.round_size);
        std::vector<std::optional<MutationOp>> ops(cfg.round_size);
        for (std::uint32_t i = 0; i < cfg.round_size; ++i) {
            MutationResult m = random_mutation(parent_payload, rng, cfg.mutation_options);
            mutants[i] = std::move(m.payload);
            ops[i] = m.op;
        }

        std::vector<double> scores(cfg.round_size);
        std::vector<std::string> errors(cfg.round_size);
        pmap(cfg.round_size, [&](std::size_t i) {
            try {
                scores[i] = classify_checked(model, mutants[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        for (std::uint32_t i = 0; i < cfg.round_size; ++i)
            if (!errors[i].empty()) throw std::runtime_error(errors[i]);
        result.evaluations += cfg.round_size;

        double now = ms_since(t0);
        for (std::uint32_t i = 0; i < cfg.round_size; ++i)
            pool.enqueue({std::move(mutants[i]), scores[i], head, ops[i], round, now});
        snapshot(round);
    }

    const MutationTreeNode& best = pool.peek();
    result.best_payload = best.payload;
    result.best_confidence = best.confidence;
    result.success = best.confidence <= cfg.threshold;
    result.rounds_used = round;
    result.elapsed_ms = ms_since(t0);
    return result;
}

EvasionResult evade_unguided(const Detector& model, const std::string& initial_payload,
                             const EvasionConfig& cfg, const TraceSink& sink) {
    const auto t0 = Clock::now();
    Rng rng(cfg.seed);
    EvasionResult result;

    std::string current = initial_payload;
    double best = classify_checked(model, current);
    std::string best_payload = current;
    result.evaluations = 1;

    auto snapshot = [&](std::uint32_t step) {
        double t = cfg.trace_time ? cfg.trace_time(result.evaluations) : ms_since(t0);
        TraceSnapshot s{step, t, best, best_payload, result.evaluations};
        result.trace.push_back(s);
        if (sink) sink(s);
    };
    snapshot(0);

    const std::uint64_t max_steps =
        static_cast<std::uint64_t>(cfg.max_rounds) * cfg.round_size;
    std::uint64_t step = 0;
    while (best > cfg.threshold && step < max_steps) {
        if (cfg.time_budget_ms && ms_since(t0) > *cfg.time_budget_ms) break;
        ++step;
        current = random_mutation(current, rng, cfg.mutation_options).payload;
        double v = classify_checked(model, current);
        ++result.evaluations;
        if (v < best) {
            best = v;
            best_payload = current;
            snapshot(static_cast<std::uint32_t>(step));
        }
    }

    result.best_payload = best_payload;
    result.best_confidence = best;
    result.success = best <= cfg.threshold;
    result.rounds_used = static_cast<std::uint32_t>(step);
    result.elapsed_ms = ms_since(t0);
    if (result.trace.empty() || result.trace.back().evaluations != result.evaluations)
        snapshot(static_cast<std::uint32_t>(step));
    return result;
}

double best_confidence_at(const std::vector<TraceSnapshot>& trace, std::uint64_t evaluations) {
    double best = 1.0;
    bool any = false;
    for (const TraceSnapshot& s : trace) {
        if (s.evaluations <= evaluations) {
            best = s.best_confidence;
            any = true;
        } else {
            break;
        }
    }
    return any ? best : 1.0;
}

}  // namespace sqlfuzz
