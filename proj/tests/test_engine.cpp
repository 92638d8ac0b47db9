#include <doctest.h>

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sqlfuzz/engine.hpp"
#include "sqlfuzz/models.hpp"
#include "sqlfuzz/threads.hpp"

using namespace sqlfuzz;

namespace {

/// Deterministic pseudo-random confidence landscape for search tests.
class HashDetector : public Detector {
public:
    double classify(const std::string& payload) const override {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : payload) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return static_cast<double>(h % 100000) / 99999.0;
    }
    std::string kind() const override { return "test-hash"; }
    void save(std::ostream&) const override { throw std::logic_error("not serializable"); }
};

class ThrowingDetector : public Detector {
public:
    double classify(const std::string&) const override {
        throw std::runtime_error("boom");
    }
    std::string kind() const override { return "test-throw"; }
    void save(std::ostream&) const override {}
};

class OutOfRangeDetector : public Detector {
public:
    double classify(const std::string&) const override { return 1.5; }
    std::string kind() const override { return "test-oob"; }
    void save(std::ostream&) const override {}
};

void check_trace_laws(const EvasionResult& r, const EvasionConfig& cfg) {
    REQUIRE(!r.trace.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i].best_confidence <= r.trace[i - 1].best_confidence);
    CHECK(r.trace.back().best_confidence == doctest::Approx(r.best_confidence));
    CHECK(r.evaluations <= 1 + static_cast<std::uint64_t>(cfg.max_rounds) * cfg.round_size);
    CHECK(r.success == (r.best_confidence <= cfg.threshold));
}

}  // namespace

TEST_CASE("pool enqueue requires strict improvement over the parent") {
    PayloadPool pool;
    CHECK(pool.enqueue({"root", 0.5, std::nullopt, std::nullopt, 0, 0.0}));
    CHECK(pool.enqueue({"better", 0.4, 0, MutationOp::CS, 1, 0.0}));
    CHECK_FALSE(pool.enqueue({"equal", 0.5, 0, MutationOp::CS, 1, 0.0}));
    CHECK_FALSE(pool.enqueue({"worse", 0.6, 0, MutationOp::CS, 1, 0.0}));
    CHECK(pool.size() == 2);
    CHECK(pool.peek().payload == "better");
}

TEST_CASE("pool peeks the global minimum") {
    PayloadPool pool;
    pool.enqueue({"a", 0.9, std::nullopt, std::nullopt, 0, 0.0});
    pool.enqueue({"b", 0.2, 0, MutationOp::WS, 1, 0.0});
    pool.enqueue({"c", 0.6, 0, MutationOp::WS, 1, 0.0});
    CHECK(pool.peek().confidence == doctest::Approx(0.2));
    CHECK(pool.peek().payload == "b");
    CHECK(pool.empty() == false);
    CHECK_THROWS_AS(PayloadPool{}.peek(), std::logic_error);
}

TEST_CASE("pool heap law against a sorted-list oracle") {
    // Randomized enqueues; nothing is ever evicted, so min-tracking is exact.
    PayloadPool pool;
    Rng rng(17);
    std::vector<double> accepted;
    pool.enqueue({"root", 1.0, std::nullopt, std::nullopt, 0, 0.0});
    accepted.push_back(1.0);
    for (int i = 0; i < 2000; ++i) {
        std::size_t parent = rng.below(pool.size());
        double conf = rng.uniform();
        bool kept = pool.enqueue({"p", conf, parent, MutationOp::CS, 1, 0.0});
        CHECK(kept == (conf < pool.node(parent).confidence));
        if (kept) accepted.push_back(conf);
        CHECK(pool.peek().confidence ==
              doctest::Approx(*std::min_element(accepted.begin(), accepted.end())));
    }
    // Monotone path: every parent chain strictly decreases.
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const MutationTreeNode* n = &pool.node(i);
        while (n->parent) {
            const MutationTreeNode* p = &pool.node(*n->parent);
            CHECK(n->confidence < p->confidence);
            n = p;
        }
    }
}

TEST_CASE("evade succeeds immediately on a constant-0 model") {
    auto model = make_stub("stub:zero");
    EvasionConfig cfg;
    EvasionResult r = evade(*model, "admin' OR 1=1#", cfg);
    CHECK(r.success);
    CHECK(r.rounds_used == 0);
    CHECK(r.evaluations == 1);
    CHECK(r.best_payload == "admin' OR 1=1#");
    CHECK(r.trace.size() == 1);
}

TEST_CASE("evade fails flat on a constant-1 model") {
    auto model = make_stub("stub:one");
    EvasionConfig cfg;
    cfg.max_rounds = 5;
    cfg.round_size = 4;
    EvasionResult r = evade(*model, "admin' OR 1=1#", cfg);
    CHECK_FALSE(r.success);
    CHECK(r.rounds_used == 5);
    CHECK(r.best_confidence == doctest::Approx(1.0));
    CHECK(r.best_payload == "admin' OR 1=1#");  // no mutant ever improves
    check_trace_laws(r, cfg);
}

TEST_CASE("evade flips length parity within a few rounds") {
    auto model = make_stub("stub:lenparity");
    EvasionConfig cfg;
    cfg.seed = 3;
    cfg.max_rounds = 10;
    const std::string odd = "admin' OR 1=1#x";  // 15 chars
    REQUIRE(model->classify(odd) == doctest::Approx(1.0));
    EvasionResult r = evade(*model, odd, cfg);
    CHECK(r.success);
    CHECK(r.best_confidence == doctest::Approx(0.0));
    CHECK(r.rounds_used <= 3);
}

TEST_CASE("evade trace laws and determinism on a hash landscape") {
    HashDetector model;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        EvasionConfig cfg;
        cfg.seed = seed;
        cfg.threshold = 0.05;
        cfg.max_rounds = 20;
        cfg.round_size = 8;
        EvasionResult a = evade(model, "admin' OR 1=1#", cfg);
        check_trace_laws(a, cfg);
        EvasionResult b = evade(model, "admin' OR 1=1#", cfg);
        CHECK(a.best_payload == b.best_payload);
        CHECK(a.best_confidence == b.best_confidence);
        CHECK(a.evaluations == b.evaluations);
        REQUIRE(a.trace.size() == b.trace.size());
        // A worker pool must not change what gets enqueued.
        EvasionResult c = evade(model, "admin' OR 1=1#", cfg, pooled_map(2));
        CHECK(a.best_payload == c.best_payload);
        CHECK(a.evaluations == c.evaluations);
    }
}

TEST_CASE("evade honors max_rounds = 0") {
    HashDetector model;
    EvasionConfig cfg;
    cfg.max_rounds = 0;
    cfg.threshold = 1e-9;
    EvasionResult r = evade(model, "admin' OR 1=1#", cfg);
    CHECK(r.evaluations == 1);
    CHECK(r.rounds_used == 0);
}

TEST_CASE("unguided walk: immediate success, determinism, trace laws") {
    auto zero = make_stub("stub:zero");
    EvasionConfig cfg;
    EvasionResult r = evade_unguided(*zero, "x' OR 1=1#", cfg);
    CHECK(r.success);
    CHECK(r.evaluations == 1);

    HashDetector model;
    cfg.seed = 5;
    cfg.threshold = 0.02;
    cfg.max_rounds = 10;
    cfg.round_size = 16;
    EvasionResult a = evade_unguided(model, "admin' OR 1=1#", cfg);
    EvasionResult b = evade_unguided(model, "admin' OR 1=1#", cfg);
    check_trace_laws(a, cfg);
    CHECK(a.best_payload == b.best_payload);
    CHECK(a.evaluations == b.evaluations);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
        CHECK(a.trace[i].payload == b.trace[i].payload);
}

TEST_CASE("classifier failures carry the payload in the diagnostic") {
    ThrowingDetector model;
    EvasionConfig cfg;
    CHECK_THROWS_WITH_AS(evade(model, "p0-payload", cfg),
                         doctest::Contains("p0-payload"), std::runtime_error);
    OutOfRangeDetector oob;
    CHECK_THROWS_AS(evade(oob, "p0", cfg), std::runtime_error);
    CHECK_THROWS_AS(evade_unguided(oob, "p0", cfg), std::runtime_error);
}

TEST_CASE("best_confidence_at steps through a trace") {
    std::vector<TraceSnapshot> trace = {
        {0, 0.0, 0.9, "a", 1},
        {1, 1.0, 0.7, "b", 17},
        {2, 2.0, 0.4, "c", 33},
    };
    CHECK(best_confidence_at(trace, 0) == doctest::Approx(1.0));  // before any data
    CHECK(best_confidence_at(trace, 1) == doctest::Approx(0.9));
    CHECK(best_confidence_at(trace, 20) == doctest::Approx(0.7));
    CHECK(best_confidence_at(trace, 100) == doctest::Approx(0.4));
}

TEST_CASE("deterministic trace timebase replaces the wall clock") {
    auto model = make_stub("stub:one");
    EvasionConfig cfg;
    cfg.max_rounds = 3;
    cfg.round_size = 2;
    cfg.trace_time = [](std::uint64_t evals) { return static_cast<double>(evals); };
    EvasionResult r = evade(*model, "x' OR 1=1#", cfg);
    for (const TraceSnapshot& s : r.trace)
        CHECK(s.elapsed_ms == doctest::Approx(static_cast<double>(s.evaluations)));
}
