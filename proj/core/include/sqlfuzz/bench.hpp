#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqlfuzz/dataset.hpp"
#include "sqlfuzz/detector.hpp"
#include "sqlfuzz/engine.hpp"
#include "sqlfuzz/threads.hpp"

namespace sqlfuzz {

struct ConfusionCounts {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::uint64_t total() const { return tp + tn + fp + fn; }
};

/// Accuracy, recall, precision. Recall/precision are nullopt (reported as NA)
/// when their denominator is zero. Throws std::invalid_argument on an empty
/// table.
struct MetricValues {
    double accuracy = 0.0;
    std::optional<double> recall;
    std::optional<double> precision;
};

MetricValues metrics(const ConfusionCounts& c);

struct BenchmarkRow {
    std::string model_id;
    MetricValues values;
    std::uint64_t n = 0;
    double wall_ms = 0.0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
};

struct NamedModel {
    std::string id;
    const Detector* model;
};

/// Classifies every record with every model at the threshold and tabulates
/// accuracy/recall/precision (malicious = positive class).
BenchmarkReport run_benchmark(const std::vector<NamedModel>& models, const Dataset& ds,
                              double threshold = 0.5,
                              const ParallelMap& pmap = serial_map());

/// CSV with header "model,accuracy,recall,precision,n,wall_ms"; undefined
/// metrics are emitted as the literal NA.
void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out);

struct EvasionExperiment {
    EvasionResult guided;
    std::vector<EvasionResult> unguided;
    /// Pointwise minimum of best-so-far confidence across the unguided
    /// instances, keyed by evaluation count.
    std::vector<TraceSnapshot> unguided_min;
    double initial_confidence = 1.0;
};

/// One guided run plus n_unguided unguided runs from distinct derived seeds.
/// Warns on `warnings` when the initial payload scores below 0.9.
EvasionExperiment run_evasion_experiment(const Detector& model, const std::string& initial_payload,
                                         const EvasionConfig& cfg, int n_unguided = 100,
                                         const ParallelMap& pmap = serial_map(),
                                         std::ostream* warnings = nullptr);

/// CSV with header "trial,strategy,round,elapsed_ms,confidence,payload_b64":
/// the guided run as trial 0 and each unguided instance as trials 1..n.
void write_trace_csv(const EvasionExperiment& exp, std::ostream& out);

}  // namespace sqlfuzz
