#pragma once

// Internal model classes behind the Detector interface. The public surface
// is the trainers in sqlfuzz/models.hpp and Detector (de)serialization.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sqlfuzz/detector.hpp"
#include "sqlfuzz/features.hpp"

namespace sqlfuzz::detail {

/// Platt sigmoid: P(malicious | margin) = 1 / (1 + exp(A*margin + B)).
/// Fitted with the standard regularized Newton procedure. A is forced
/// non-positive so calibrated scores are monotone in the margin.
struct PlattScaling {
    double a = -1.0;
    double b = 0.0;
    double apply(double margin) const;
    static PlattScaling fit(const std::vector<double>& margins,
                            const std::vector<int>& labels);
};

class NaiveBayesModel final : public Detector {
public:
    FeatureExtractor extractor;
    std::array<double, 2> log_prior{};              // [sane, malicious]
    std::array<std::vector<double>, 2> log_lik{};   // per-class, per-category

    double classify(const std::string& payload) const override;
    std::string kind() const override { return "naive-bayes"; }
    void save(std::ostream& out) const override;
    static std::unique_ptr<NaiveBayesModel> load_body(std::istream& in);
};

class LinearSvmModel final : public Detector {
public:
    FeatureExtractor extractor;
    std::vector<double> mean, scale;  // feature standardization
    std::vector<double> weights;
    double bias = 0.0;
    double c = 1.0;
    PlattScaling platt;

    double margin(const std::vector<double>& features) const;
    double classify(const std::string& payload) const override;
    std::string kind() const override { return "linear-svm"; }
    void save(std::ostream& out) const override;
    static std::unique_ptr<LinearSvmModel> load_body(std::istream& in);
};

class GaussianSvmModel final : public Detector {
public:
    FeatureExtractor extractor;
    double gamma = 0.01;
    double c = 1.0;
    std::vector<SparseVector> support_vectors;
    std::vector<double> coefficients;  // alpha_i * y_i
    double bias = 0.0;
    PlattScaling platt;

    double margin(const SparseVector& x) const;
    double classify(const std::string& payload) const override;
    std::string kind() const override { return "gaussian-svm"; }
    void save(std::ostream& out) const override;
    static std::unique_ptr<GaussianSvmModel> load_body(std::istream& in);
};

class RandomForestModel final : public Detector {
public:
    struct Node {
        std::int32_t feature = -1;  // -1: leaf
        double threshold = 0.0;
        std::int32_t left = -1, right = -1;
        std::int32_t vote = 0;  // leaf class
    };
    FeatureExtractor extractor;
    std::vector<std::vector<Node>> trees;

    int tree_vote(const std::vector<Node>& tree, const std::vector<double>& x) const;
    double classify(const std::string& payload) const override;
    std::string kind() const override { return "random-forest"; }
    void save(std::ostream& out) const override;
    static std::unique_ptr<RandomForestModel> load_body(std::istream& in);
};

class CharNgramModel final : public Detector {
public:
    int n = 5;          // context length
    double alpha = 0.1; // Laplace smoothing over a 256-symbol alphabet
    // context bytes packed little-endian into a u64 -> (next byte -> count)
    std::map<std::uint64_t, std::map<std::uint8_t, std::uint32_t>> counts;
    std::map<std::uint64_t, std::uint64_t> context_totals;

    double mean_error(const std::string& payload) const;
    double classify(const std::string& payload) const override;
    std::string kind() const override { return "char-ngram"; }
    void save(std::ostream& out) const override;
    static std::unique_ptr<CharNgramModel> load_body(std::istream& in);
};

class StubModel final : public Detector {
public:
    explicit StubModel(std::string name) : name_(std::move(name)) {}
    double classify(const std::string& payload) const override;
    std::string kind() const override { return name_; }
    void save(std::ostream& out) const override;
    static std::unique_ptr<StubModel> load_body(std::istream& in);

private:
    std::string name_;  // "stub:zero", "stub:one", "stub:lenparity"
};

}  // namespace sqlfuzz::detail
