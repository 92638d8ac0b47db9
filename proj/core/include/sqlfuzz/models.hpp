#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "sqlfuzz/dataset.hpp"
#include "sqlfuzz/detector.hpp"
#include "sqlfuzz/features.hpp"

namespace sqlfuzz {

/// Multinomial Naive Bayes over token histograms, Laplace alpha=1,
/// equalized class priors. Throws std::invalid_argument on a single-class
/// dataset.
std::unique_ptr<Detector> train_naive_bayes(const Dataset& ds, const TokenVocabulary& vocab);

/// L2-regularized hinge-loss linear model (deterministic seeded subgradient
/// descent, inverse-frequency class weights), Platt-calibrated on a held-out
/// 15% split.
std::unique_ptr<Detector> train_linear_svm(const Dataset& ds, const TokenVocabulary& vocab,
                                           double C, std::uint64_t seed = 1);

/// RBF-kernel SVM trained by SMO with per-class C weighting; stores support
/// vectors only; Platt-calibrated on a held-out 15% split. Works over any
/// extractor (token histogram or graph variant).
std::unique_ptr<Detector> train_gaussian_svm(const Dataset& ds, const FeatureExtractor& fx,
                                             double C, double gamma, std::uint64_t seed = 1);

/// Bagged CART forest on token histograms: Gini impurity, sqrt(d) features
/// per split, class-weighted; confidence = fraction of malicious votes.
std::unique_ptr<Detector> train_random_forest(const Dataset& ds, const TokenVocabulary& vocab,
                                              int n_trees = 25, std::uint64_t seed = 1);

/// Count-based character n-gram next-character predictor with Laplace
/// smoothing, trained on the malicious records only. Confidence is one minus
/// the mean prediction error over the payload.
std::unique_ptr<Detector> train_char_ngram(const Dataset& ds, int n = 5, double alpha = 0.1);

/// Mean prediction error of a char-ngram model on a payload (the quantity
/// the detector maps to 1 - confidence). The model must be a char-ngram.
double char_ngram_mean_error(const Detector& model, const std::string& payload);

struct FoldMetrics {
    double accuracy = 0.0;
    std::optional<double> recall;
    std::optional<double> precision;
};

struct CrossValidation {
    std::vector<FoldMetrics> folds;
    double mean_accuracy = 0.0;
    double stddev_accuracy = 0.0;
};

using Trainer = std::function<std::unique_ptr<Detector>(const Dataset&)>;

/// Stratified, seeded k-fold cross-validation at the given threshold.
CrossValidation cross_validate(const Dataset& ds, const Trainer& trainer, int k = 5,
                               std::uint64_t seed = 1, double threshold = 0.5);

struct DedupReport {
    Dataset dataset;
    std::size_t kept_sane = 0, kept_malicious = 0;
    std::size_t dropped_sane = 0, dropped_malicious = 0;
};

/// Keeps one representative per distinct feature vector per class.
DedupReport deduplicate_features(const Dataset& ds, const FeatureExtractor& fx);

/// Built-in stub detectors for engine testing: "stub:zero", "stub:one",
/// "stub:lenparity" (0 when the payload length is even, else 1).
std::unique_ptr<Detector> make_stub(const std::string& name);

}  // namespace sqlfuzz
