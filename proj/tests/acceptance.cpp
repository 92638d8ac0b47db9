// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria 5-7 share one generated dataset and one set of
// trained models, so the whole binary runs in a single process.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "sql_oracle.hpp"
#include "sqlfuzz/bench.hpp"
#include "sqlfuzz/dataset.hpp"
#include "sqlfuzz/engine.hpp"
#include "sqlfuzz/features.hpp"
#include "sqlfuzz/lexer.hpp"
#include "sqlfuzz/models.hpp"
#include "sqlfuzz/mutations.hpp"
#include "sqlfuzz/rng.hpp"

namespace fs = std::filesystem;
using namespace sqlfuzz;
using sqlfuzz::testing::SqlOracle;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

// Deterministic confidence landscape for engine-law tests: plenty of local
// structure, no training required.
class HashDetector : public Detector {
public:
    double classify(const std::string& p) const override {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : p) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return static_cast<double>(h % 100000) / 99999.0;
    }
    std::string kind() const override { return "hash"; }
    void save(std::ostream&) const override {}
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(SQLFUZZ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// ---------------------------------------------------------------------------
// Criterion 1: mutation chains preserve the injected query's result set.

Outcome criterion_semantic_preservation() {
    auto t0 = Clock::now();
    const std::vector<std::string> seeds = {
        "admin' OR 1=1#",
        "admin' OR 1=1 #",
        "root' OR 2>1#",
        "x' OR 1 LIKE 1#",
        "eve' OR 1=1 AND 2<>3#",
        "a' OR 0x1De=478#",
        "bob' OR 5<=5#",
        "alice' OR 1=1 OR 7=7#",
        "u' OR 3>=2#",
        "guest' OR 1<2#",
    };
    Schema schema = fixture_schema();
    SqlOracle oracle(schema);
    auto inject = [](const std::string& p) {
        return "SELECT * FROM users WHERE name='" + p + "' AND pw='y'";
    };

    std::uint64_t checked = 0, mismatches = 0;
    std::string first_bad;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        auto base = oracle.run(inject(seeds[s]));
        if (!base) return {false, "seed payload does not execute: " + seeds[s]};
        for (std::uint64_t chain = 0; chain < 1000; ++chain) {
            Rng rng(derive_seed(101, "chain", s * 100000 + chain));
            std::string payload = seeds[s];
            std::uint64_t depth = 1 + rng.below(10);
            for (std::uint64_t d = 0; d < depth; ++d)
                payload = random_mutation(payload, rng).payload;
            auto mutated = oracle.run(inject(payload));
            ++checked;
            if (!mutated || *mutated != *base) {
                ++mismatches;
                if (first_bad.empty()) first_bad = payload;
            }
        }
    }
    double secs = seconds_since(t0);
    bool pass = mismatches == 0 && secs <= 300.0;
    std::string detail = std::to_string(checked) + " chains, " + std::to_string(mismatches) +
                         " result-set mismatches, " + fmt(secs) + "s";
    if (!first_bad.empty()) detail += "; first failing payload: " + first_bad;
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 2: lexer round trip on random bytes and the attack corpus.

Outcome criterion_lexer_roundtrip() {
    Rng rng(202);
    std::uint64_t failures = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        std::string s;
        std::size_t len = rng.below(120);
        for (std::size_t j = 0; j < len; ++j) s.push_back(static_cast<char>(rng.below(256)));
        TokenStream ts = lex(s);
        std::string back;
        for (std::size_t t = 0; t < ts.size(); ++t) back += std::string(ts.text(t));
        if (back != s) ++failures;
    }
    AttackCorpus corpus = AttackCorpus::load(std::string(SQLFUZZ_DATA_DIR) +
                                             "/attack_payloads.txt");
    for (const std::string& p : corpus.payloads) {
        TokenStream ts = lex(p);
        std::string back;
        for (std::size_t t = 0; t < ts.size(); ++t) back += std::string(ts.text(t));
        if (back != p) ++failures;
    }
    return {failures == 0, "100000 random byte strings + " +
                               std::to_string(corpus.payloads.size()) +
                               " corpus payloads, " + std::to_string(failures) + " failures"};
}

// ---------------------------------------------------------------------------
// Criterion 3: metric formulas against an inline oracle.

Outcome criterion_metric_formulas() {
    Rng rng(303);
    std::uint64_t failures = 0;
    for (int i = 0; i < 1000; ++i) {
        ConfusionCounts c{rng.below(200), rng.below(200), rng.below(200), rng.below(200)};
        if (c.total() == 0) c.tn = 1;
        MetricValues m = metrics(c);
        double total = double(c.tp + c.tn + c.fp + c.fn);
        if (m.accuracy != (double(c.tp) + double(c.tn)) / total) ++failures;
        if (c.tp + c.fn > 0) {
            if (!m.recall || *m.recall != double(c.tp) / double(c.tp + c.fn)) ++failures;
        } else if (m.recall) {
            ++failures;
        }
        if (c.tp + c.fp > 0) {
            if (!m.precision || *m.precision != double(c.tp) / double(c.tp + c.fp)) ++failures;
        } else if (m.precision) {
            ++failures;
        }
    }
    return {failures == 0,
            "1000 random confusion tables, " + std::to_string(failures) + " mismatches"};
}

// ---------------------------------------------------------------------------
// Criterion 4: engine laws (heap order, strict monotone paths, best-so-far
// monotonicity, budget safety).

Outcome criterion_engine_laws() {
    std::uint64_t violations = 0;
    std::string what;
    auto fail = [&](const std::string& w) {
        ++violations;
        if (what.empty()) what = w;
    };

    // Heap order + strict improvement over 10^4 random enqueues.
    {
        PayloadPool pool;
        Rng rng(404);
        std::vector<double> accepted;  // mirror of kept confidences
        pool.enqueue({"root", 1.0, std::nullopt, std::nullopt, 0, 0.0});
        accepted.push_back(1.0);
        for (int i = 0; i < 10000; ++i) {
            std::size_t parent = rng.below(pool.size());
            double pc = pool.node(parent).confidence;
            double child = pc * (0.5 + rng.uniform());  // sometimes above parent
            bool kept = pool.enqueue({"p" + std::to_string(i), child, parent, MutationOp::CS,
                                      static_cast<std::uint32_t>(i % 7), 0.0});
            if (kept != (child < pc)) fail("strict-improvement law");
            if (kept) accepted.push_back(child);
            double want = *std::min_element(accepted.begin(), accepted.end());
            if (pool.peek().confidence != want) fail("heap order");
        }
        // Monotone parent chains.
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const MutationTreeNode& n = pool.node(i);
            if (n.parent && !(n.confidence < pool.node(*n.parent).confidence))
                fail("monotone path");
        }
    }

    // Best-so-far monotonicity + budget safety over randomized evade runs,
    // > 10^4 evaluations in total.
    HashDetector hash;
    std::uint64_t total_evals = 0;
    for (int trial = 0; trial < 40; ++trial) {
        EvasionConfig cfg;
        Rng r(derive_seed(404, "laws", trial));
        cfg.seed = r.below(1u << 30);
        cfg.max_rounds = static_cast<std::uint32_t>(1 + r.below(30));
        cfg.round_size = static_cast<std::uint32_t>(1 + r.below(12));
        cfg.threshold = r.uniform() * 0.3;
        cfg.trace_time = [](std::uint64_t e) { return double(e); };
        for (bool guided : {true, false}) {
            EvasionResult res = guided
                                    ? evade(hash, "admin' OR 1=1#", cfg)
                                    : evade_unguided(hash, "admin' OR 1=1#", cfg);
            total_evals += res.evaluations;
            std::uint64_t budget = 1ull + std::uint64_t(cfg.max_rounds) * cfg.round_size;
            if (res.evaluations > budget) fail("budget safety");
            // Guided rounds are mutation rounds; unguided "rounds" are steps.
            std::uint64_t round_cap =
                guided ? cfg.max_rounds : std::uint64_t(cfg.max_rounds) * cfg.round_size;
            if (res.rounds_used > round_cap) fail("round budget");
            for (std::size_t i = 1; i < res.trace.size(); ++i)
                if (res.trace[i].best_confidence > res.trace[i - 1].best_confidence)
                    fail("best-so-far monotonicity");
            if (!res.trace.empty() &&
                res.trace.back().best_confidence != res.best_confidence)
                fail("trace/result agreement");
            if (res.success != (res.best_confidence <= cfg.threshold))
                fail("success flag");
        }
    }
    std::string detail = "10000 pool ops + " + std::to_string(total_evals) +
                         " engine evaluations, " + std::to_string(violations) + " violations";
    if (!what.empty()) detail += " (first: " + what + ")";
    return {violations == 0, detail};
}

// ---------------------------------------------------------------------------
// Shared dataset + trained models for criteria 5-7 and 9.

struct TrainedModels {
    Dataset train, held_out;
    std::vector<std::pair<std::string, std::unique_ptr<Detector>>> models;
    std::string training_log;

    const Detector* find(const std::string& name) const {
        for (const auto& [n, m] : models)
            if (n == name) return m.get();
        return nullptr;
    }
};

TrainedModels build_models() {
    TrainedModels out;
    Schema schema = fixture_schema();
    AttackCorpus corpus =
        AttackCorpus::load(std::string(SQLFUZZ_DATA_DIR) + "/attack_payloads.txt");
    Dataset benign = generate_benign(2000, schema, ValueDictionaries::builtin(),
                                     derive_seed(500, "benign"));
    Dataset malicious = generate_malicious(2000, schema, corpus, derive_seed(500, "malicious"));

    // Stratified 70/30 split.
    Rng split_rng(derive_seed(500, "split"));
    auto split = [&](Dataset& src) {
        std::shuffle(src.records.begin(), src.records.end(), split_rng.engine());
        std::size_t cut = src.size() * 7 / 10;
        for (std::size_t i = 0; i < src.size(); ++i)
            (i < cut ? out.train : out.held_out).records.push_back(std::move(src.records[i]));
    };
    split(benign);
    split(malicious);

    TokenVocabulary vocab = TokenVocabulary::standard();
    std::ostringstream log;
    auto timed = [&](const std::string& name, auto&& fn) {
        auto t0 = Clock::now();
        out.models.emplace_back(name, fn());
        log << name << " " << fmt(seconds_since(t0)) << "s; ";
    };

    timed("naive-bayes", [&] { return train_naive_bayes(out.train, vocab); });
    timed("linear-svm",
          [&] { return train_linear_svm(out.train, vocab, 19.30, derive_seed(500, "lin")); });
    timed("random-forest",
          [&] { return train_random_forest(out.train, vocab, 25, derive_seed(500, "rf")); });
    timed("char-ngram", [&] { return train_char_ngram(out.train, 5, 0.1); });
    timed("gaussian-svm", [&] {
        FeatureExtractor fx;
        return train_gaussian_svm(out.train, fx, 278.25, 0.013, derive_seed(500, "rbf"));
    });
    timed("graph-svm", [&] {
        FeatureExtractor fx;
        fx.mode = FeatureExtractor::Mode::Graph;
        fx.graph = {Directedness::Directed, Weighting::Proportional};
        return train_gaussian_svm(out.train, fx, 4.64, 0.71, derive_seed(500, "graph"));
    });
    out.training_log = log.str();
    return out;
}

// Criterion 5: held-out accuracy/precision floors for the main classifiers.

Outcome criterion_classifier_sanity(const TrainedModels& tm, double train_secs) {
    auto t0 = Clock::now();
    std::vector<NamedModel> named;
    for (const auto& [name, model] : tm.models)
        if (name != "graph-svm") named.push_back({name, model.get()});
    BenchmarkReport report = run_benchmark(named, tm.held_out, 0.5);

    bool pass = true;
    std::ostringstream detail;
    for (const BenchmarkRow& row : report.rows) {
        double prec = row.values.precision ? *row.values.precision : 0.0;
        detail << row.model_id << " A=" << fmt(row.values.accuracy) << " P=" << fmt(prec)
               << "; ";
        bool floored = row.model_id == "linear-svm" || row.model_id == "gaussian-svm" ||
                       row.model_id == "random-forest";
        if (floored && (row.values.accuracy < 0.85 || prec < 0.90)) pass = false;
    }
    double secs = train_secs + seconds_since(t0);
    if (secs > 600.0) pass = false;
    detail << fmt(secs) << "s incl. training";
    return {pass, detail.str()};
}

// Criterion 6: guided evasion beats each trained model from a fixed payload.

Outcome criterion_evasion_effectiveness(const TrainedModels& tm) {
    auto t0 = Clock::now();
    const std::string payload = "admin' OR 1=1#";
    bool pass = true;
    std::ostringstream detail;
    for (const auto& [name, model] : tm.models) {
        if (name == "graph-svm") continue;  // covered by the dominance criterion
        double initial = model->classify(payload);
        int successes = 0;
        for (int trial = 0; trial < 10; ++trial) {
            EvasionConfig cfg;
            cfg.threshold = 0.5;
            cfg.max_rounds = 1000;
            cfg.round_size = 16;
            cfg.seed = derive_seed(600, name, trial);
            cfg.trace_time = [](std::uint64_t e) { return double(e); };
            if (evade(*model, payload, cfg).success) ++successes;
        }
        detail << name << " init=" << fmt(initial) << " " << successes << "/10; ";
        if (initial < 0.9 || successes < 8) pass = false;
    }
    double secs = seconds_since(t0);
    if (secs > 900.0) pass = false;
    detail << fmt(secs) << "s";
    return {pass, detail.str()};
}

// Criterion 7: guided search dominates the unguided pointwise minimum.

Outcome criterion_guided_dominates(const TrainedModels& tm) {
    auto t0 = Clock::now();
    const std::string payload = "admin' OR 1=1#";
    const std::vector<std::uint64_t> checkpoints = {500, 2000, 10000};
    int cells = 0, dominated = 0;
    std::ostringstream detail;
    for (const auto& [name, model] : tm.models) {
        EvasionConfig cfg;
        cfg.threshold = -1.0;   // never stop early: we want the full budget
        cfg.max_rounds = 2500;  // 2500 * 4 = 10,000 evaluations
        // Small rounds maximize selection pressure per evaluation: the
        // comparison is at fixed evaluation counts, and wide rounds spend
        // the budget on siblings of one parent instead of deeper selection.
        cfg.round_size = 4;
        cfg.trace_time = [](std::uint64_t e) { return double(e); };

        std::vector<EvasionResult> guided(10), unguided(20);
        for (int i = 0; i < 10; ++i) {
            cfg.seed = derive_seed(700, name + "/guided", i);
            guided[i] = evade(*model, payload, cfg);
        }
        for (int i = 0; i < 20; ++i) {
            cfg.seed = derive_seed(700, name + "/unguided", i);
            unguided[i] = evade_unguided(*model, payload, cfg);
        }

        detail << name << ":";
        for (std::uint64_t n : checkpoints) {
            std::vector<double> g;
            for (const EvasionResult& r : guided)
                g.push_back(best_confidence_at(r.trace, n));
            double u = 1.0;
            for (const EvasionResult& r : unguided)
                u = std::min(u, best_confidence_at(r.trace, n));
            bool ok = median(g) <= u;
            ++cells;
            dominated += ok;
            detail << (ok ? " +" : " -") << n;
        }
        detail << "; ";
    }
    bool pass = dominated * 100 >= cells * 80;
    detail << dominated << "/" << cells << " cells, " << fmt(seconds_since(t0)) << "s";
    return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 8: CLI reruns are byte-identical with --threads 1.

Outcome criterion_cli_determinism() {
    fs::path dir = fs::temp_directory_path() / "sqlfuzz_acceptance_c8";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto p = [&](const std::string& name) { return (dir / name).string(); };
    std::vector<std::string> mismatches;

    for (int run = 0; run < 2; ++run) {
        std::string d = p("gen" + std::to_string(run));
        if (run_cli("--seed 3 --threads 1 generate --benign 60 --malicious 60 -o " + d) != 0)
            return {false, "generate failed"};
    }
    for (const char* f : {"benign.tsv", "malicious.tsv"})
        if (slurp(p("gen0") / fs::path(f)) != slurp(p("gen1") / fs::path(f)))
            mismatches.push_back(std::string("generate/") + f);

    for (int run = 0; run < 2; ++run) {
        std::string m = p("nb" + std::to_string(run) + ".model");
        if (run_cli("--seed 3 --threads 1 train --kind naive-bayes --dataset " +
                    p("gen0") + "/benign.tsv --dataset " + p("gen0") +
                    "/malicious.tsv -o " + m) != 0)
            return {false, "train failed"};
    }
    if (slurp(p("nb0.model")) != slurp(p("nb1.model"))) mismatches.push_back("train/model");
    if (slurp(p("nb0.model.report.csv")) != slurp(p("nb1.model.report.csv")))
        mismatches.push_back("train/report");

    for (int run = 0; run < 2; ++run) {
        if (run_cli("--seed 3 --threads 1 benchmark --model " + p("nb0.model") +
                    " --dataset " + p("gen0") + "/malicious.tsv -o " +
                    p("bench" + std::to_string(run) + ".csv")) != 0)
            return {false, "benchmark failed"};
        run_cli("--seed 3 --threads 1 evade --model stub:lenparity --payload \"admin' OR "
                "1=1#x\" --max-rounds 20 --round-size 4 -o " +
                p("trace" + std::to_string(run) + ".csv"));
    }
    if (slurp(p("bench0.csv")) != slurp(p("bench1.csv"))) mismatches.push_back("benchmark/csv");
    if (slurp(p("trace0.csv")) != slurp(p("trace1.csv"))) mismatches.push_back("evade/trace");

    fs::remove_all(dir);
    if (!mismatches.empty()) {
        std::string d = "differing outputs:";
        for (const std::string& m : mismatches) d += " " + m;
        return {false, d};
    }
    return {true, "generate/train/benchmark/evade reruns byte-identical"};
}

// ---------------------------------------------------------------------------
// Criterion 9: save/load round trip preserves classify outputs exactly.

Outcome criterion_serialization(const TrainedModels& tm) {
    AttackCorpus corpus =
        AttackCorpus::load(std::string(SQLFUZZ_DATA_DIR) + "/attack_payloads.txt");
    Rng rng(909);
    std::vector<std::string> payloads;
    for (int i = 0; i < 100; ++i) {
        std::string p = corpus.payloads[rng.below(corpus.payloads.size())];
        for (std::uint64_t d = rng.below(3); d > 0; --d) p = random_mutation(p, rng).payload;
        payloads.push_back(p);
    }

    std::uint64_t failures = 0;
    std::string bad;
    for (const auto& [name, model] : tm.models) {
        std::stringstream buf;
        model->save(buf);
        std::unique_ptr<Detector> back = load_detector(buf);
        if (back->kind() != model->kind()) ++failures;
        for (const std::string& p : payloads)
            if (back->classify(p) != model->classify(p)) {
                ++failures;
                if (bad.empty()) bad = name;
            }
    }
    std::string detail = std::to_string(tm.models.size()) + " models x 100 payloads, " +
                         std::to_string(failures) + " mismatches";
    if (!bad.empty()) detail += " (first: " + bad + ")";
    return {failures == 0, detail};
}

// ---------------------------------------------------------------------------
// Criterion 10: token histograms invariant under WS and CS mutations.

Outcome criterion_feature_invariance() {
    AttackCorpus corpus =
        AttackCorpus::load(std::string(SQLFUZZ_DATA_DIR) + "/attack_payloads.txt");
    TokenVocabulary vocab = TokenVocabulary::standard();
    Rng rng(1010);
    std::uint64_t failures = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string p = corpus.payloads[rng.below(corpus.payloads.size())];
        for (std::uint64_t d = rng.below(4); d > 0; --d) p = random_mutation(p, rng).payload;
        std::string q = rng.chance(0.5) ? whitespace_sub(p, rng) : case_swap(p, rng);
        FeatureVector a = extract_token_histogram(p, vocab);
        FeatureVector b = extract_token_histogram(q, vocab);
        if (a.values != b.values) ++failures;
    }
    return {failures == 0,
            "1000 seeded (payload, mutation) pairs, " + std::to_string(failures) +
                " histogram changes"};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int n, const Outcome& o) {
        std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " — "
                  << o.detail << "\n"
                  << std::flush;
        if (!o.pass) ++failed;
    };

    report(1, criterion_semantic_preservation());
    report(2, criterion_lexer_roundtrip());
    report(3, criterion_metric_formulas());
    report(4, criterion_engine_laws());

    auto t0 = Clock::now();
    TrainedModels tm = build_models();
    double train_secs = seconds_since(t0);
    std::cout << "(shared setup: " << tm.train.size() << " train / " << tm.held_out.size()
              << " held-out records; " << tm.training_log << "total " << fmt(train_secs)
              << "s)\n";

    report(5, criterion_classifier_sanity(tm, train_secs));
    report(6, criterion_evasion_effectiveness(tm));
    report(7, criterion_guided_dominates(tm));
    report(8, criterion_cli_determinism());
    report(9, criterion_serialization(tm));
    report(10, criterion_feature_invariance());

    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
              << "\n";
    return failed == 0 ? 0 : 1;
}
