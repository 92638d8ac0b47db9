#include <cmath>
#include <map>
#include <stdexcept>

#include "sqlfuzz/bench.hpp"
#include "sqlfuzz/models.hpp"
#include "train_util.hpp"

namespace sqlfuzz {

CrossValidation cross_validate(const Dataset& ds, const Trainer& trainer, int k,
                               std::uint64_t seed, double threshold) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    std::size_t n_sane = ds.count(Label::Sane), n_mal = ds.count(Label::Malicious);
    if (n_sane < static_cast<std::size_t>(k) || n_mal < static_cast<std::size_t>(k))
        throw std::invalid_argument("dataset too small: need >= k samples per class");

    Rng rng(seed);
    std::vector<int> fold = detail::stratified_folds(ds, k, rng);

    CrossValidation cv;
    for (int f = 0; f < k; ++f) {
        Dataset train, test;
        for (std::size_t i = 0; i < ds.records.size(); ++i)
            (fold[i] == f ? test : train).records.push_back(ds.records[i]);
        auto model = trainer(train);
        ConfusionCounts c;
        for (const Record& r : test.records) {
            bool predicted = model->classify(r.query) > threshold;
            bool actual = r.label == Label::Malicious;
            if (predicted && actual) ++c.tp;
            else if (predicted && !actual) ++c.fp;
            else if (!predicted && actual) ++c.fn;
            else ++c.tn;
        }
        MetricValues m = metrics(c);
        cv.folds.push_back({m.accuracy, m.recall, m.precision});
    }

    double sum = 0.0;
    for (const FoldMetrics& f : cv.folds) sum += f.accuracy;
    cv.mean_accuracy = sum / static_cast<double>(k);
    double var = 0.0;
    for (const FoldMetrics& f : cv.folds) {
        double d = f.accuracy - cv.mean_accuracy;
        var += d * d;
    }
    cv.stddev_accuracy = std::sqrt(var / static_cast<double>(k));
    return cv;
}

DedupReport deduplicate_features(const Dataset& ds, const FeatureExtractor& fx) {
    DedupReport report;
    std::map<std::pair<int, std::vector<double>>, bool> seen;
    for (const Record& r : ds.records) {
        int c = r.label == Label::Malicious ? 1 : 0;
        auto key = std::make_pair(c, fx.extract(r.query).values);
        if (seen.emplace(std::move(key), true).second) {
            report.dataset.records.push_back(r);
            (c ? report.kept_malicious : report.kept_sane) += 1;
        } else {
            (c ? report.dropped_malicious : report.dropped_sane) += 1;
        }
    }
    return report;
}

}  // namespace sqlfuzz
