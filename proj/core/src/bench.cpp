#include "sqlfuzz/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <stdexcept>

#include "sqlfuzz/base64.hpp"
#include "sqlfuzz/rng.hpp"

namespace sqlfuzz {

MetricValues metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw std::invalid_argument("empty confusion table");
    MetricValues m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    return m;
}

BenchmarkReport run_benchmark(const std::vector<NamedModel>& models, const Dataset& ds,
                              double threshold, const ParallelMap& pmap) {
    BenchmarkReport report;
    for (const NamedModel& nm : models) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<int> predicted(ds.records.size());
        pmap(ds.records.size(), [&](std::size_t i) {
            predicted[i] = nm.model->classify(ds.records[i].query) > threshold ? 1 : 0;
        });
        ConfusionCounts c;
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            bool actual = ds.records[i].label == Label::Malicious;
            if (predicted[i] && actual) ++c.tp;
            else if (predicted[i] && !actual) ++c.fp;
            else if (!predicted[i] && actual) ++c.fn;
            else ++c.tn;
        }
        double wall = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        report.rows.push_back({nm.id, metrics(c), c.total(), wall});
    }
    return report;
}

namespace {

void write_metric(std::ostream& out, const std::optional<double>& v) {
    if (v) out << *v;
    else out << "NA";
}

}  // namespace

void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out) {
    out << "model,accuracy,recall,precision,n,wall_ms\n";
    for (const BenchmarkRow& row : report.rows) {
        out << row.model_id << "," << row.values.accuracy << ",";
        write_metric(out, row.values.recall);
        out << ",";
        write_metric(out, row.values.precision);
        out << "," << row.n << "," << row.wall_ms << "\n";
    }
}

EvasionExperiment run_evasion_experiment(const Detector& model, const std::string& initial_payload,
                                         const EvasionConfig& cfg, int n_unguided,
                                         const ParallelMap& pmap, std::ostream* warnings) {
    EvasionExperiment exp;
    exp.initial_confidence = model.classify(initial_payload);
    if (warnings && exp.initial_confidence < 0.9)
        *warnings << "warning: initial payload confidence " << exp.initial_confidence
                  << " < 0.9; the evasion experiment expects a confidently detected start\n";

    EvasionConfig guided_cfg = cfg;
    guided_cfg.seed = derive_seed(cfg.seed, "guided");
    exp.guided = evade(model, initial_payload, guided_cfg, pmap);

    exp.unguided.resize(n_unguided);
    std::vector<std::string> errors(n_unguided);
    pmap(static_cast<std::size_t>(n_unguided), [&](std::size_t i) {
        EvasionConfig ucfg = cfg;
        ucfg.seed = derive_seed(cfg.seed, "unguided", i);
        try {
            exp.unguided[i] = evade_unguided(model, initial_payload, ucfg);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const std::string& e : errors)
        if (!e.empty()) throw std::runtime_error(e);

    // pointwise minimum of best-so-far over the instances, by eval count
    std::vector<const TraceSnapshot*> events;
    for (const EvasionResult& r : exp.unguided)
        for (const TraceSnapshot& s : r.trace) events.push_back(&s);
    std::sort(events.begin(), events.end(), [](const TraceSnapshot* a, const TraceSnapshot* b) {
        return a->evaluations < b->evaluations;
    });
    double best = 1.0;
    for (const TraceSnapshot* s : events) {
        if (s->best_confidence < best) {
            best = s->best_confidence;
            TraceSnapshot merged = *s;
            exp.unguided_min.push_back(merged);
        }
    }
    return exp;
}

void write_trace_csv(const EvasionExperiment& exp, std::ostream& out) {
    out << "trial,strategy,round,elapsed_ms,confidence,payload_b64\n";
    auto emit = [&out](int trial, const char* strategy, const std::vector<TraceSnapshot>& trace) {
        for (const TraceSnapshot& s : trace)
            out << trial << "," << strategy << "," << s.round << "," << s.elapsed_ms << ","
                << s.best_confidence << "," << base64_encode(s.payload) << "\n";
    };
    emit(0, "guided", exp.guided.trace);
    for (std::size_t i = 0; i < exp.unguided.size(); ++i)
        emit(static_cast<int>(i) + 1, "unguided", exp.unguided[i].trace);
}

}  // namespace sqlfuzz
