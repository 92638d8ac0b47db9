#include <cmath>
#include <stdexcept>

#include "model_io.hpp"
#include "models_impl.hpp"
#include "sqlfuzz/models.hpp"

namespace sqlfuzz {

using namespace detail;

namespace detail {

double NaiveBayesModel::classify(const std::string& payload) const {
    FeatureVector fv = extractor.extract(payload);
    double score[2] = {log_prior[0], log_prior[1]};
    for (std::size_t k = 0; k < fv.values.size(); ++k) {
        if (fv.values[k] == 0.0) continue;
        score[0] += fv.values[k] * log_lik[0][k];
        score[1] += fv.values[k] * log_lik[1][k];
    }
    // posterior P(malicious | x), stable two-class softmax
    double m = std::max(score[0], score[1]);
    double e0 = std::exp(score[0] - m), e1 = std::exp(score[1] - m);
    return e1 / (e0 + e1);
}

void NaiveBayesModel::save(std::ostream& out) const {
    out << kModelMagic << " " << kModelFormatVersion << "\n";
    out << "kind naive-bayes\n";
    extractor.save(out);
    out << "priors ";
    write_double(out, log_prior[0]);
    out << " ";
    write_double(out, log_prior[1]);
    out << "\n";
    for (int c = 0; c < 2; ++c) {
        out << "loglik " << c << " " << log_lik[c].size() << "\n";
        for (double v : log_lik[c]) {
            write_double(out, v);
            out << "\n";
        }
    }
    out << "end\n";
}

std::unique_ptr<NaiveBayesModel> NaiveBayesModel::load_body(std::istream& in) {
    auto m = std::make_unique<NaiveBayesModel>();
    m->extractor = FeatureExtractor::load(in);
    expect_tag(in, "priors");
    m->log_prior[0] = read_double(in);
    m->log_prior[1] = read_double(in);
    for (int c = 0; c < 2; ++c) {
        expect_tag(in, "loglik");
        int cc = -1;
        std::size_t k = 0;
        in >> cc >> k;
        if (cc != c) throw std::runtime_error("bad loglik block order");
        m->log_lik[c].resize(k);
        for (std::size_t i = 0; i < k; ++i) m->log_lik[c][i] = read_double(in);
    }
    return m;
}

}  // namespace detail

std::unique_ptr<Detector> train_naive_bayes(const Dataset& ds, const TokenVocabulary& vocab) {
    auto model = std::make_unique<NaiveBayesModel>();
    model->extractor.mode = FeatureExtractor::Mode::TokenHistogram;
    model->extractor.vocab = vocab;

    const std::size_t dim = vocab.size();
    std::array<std::vector<double>, 2> counts = {std::vector<double>(dim, 0.0),
                                                 std::vector<double>(dim, 0.0)};
    std::size_t per_class[2] = {0, 0};
    for (const Record& r : ds.records) {
        int c = r.label == Label::Malicious ? 1 : 0;
        ++per_class[c];
        FeatureVector fv = model->extractor.extract(r.query);
        for (std::size_t k = 0; k < dim; ++k) counts[c][k] += fv.values[k];
    }
    if (per_class[0] == 0 || per_class[1] == 0)
        throw std::invalid_argument("naive bayes needs both classes present");

    // Equalized priors handle the class imbalance at the prior level.
    model->log_prior = {std::log(0.5), std::log(0.5)};
    const double alpha = 1.0;
    for (int c = 0; c < 2; ++c) {
        double total = 0.0;
        for (double v : counts[c]) total += v;
        model->log_lik[c].resize(dim);
        for (std::size_t k = 0; k < dim; ++k)
            model->log_lik[c][k] =
                std::log((counts[c][k] + alpha) / (total + alpha * static_cast<double>(dim)));
    }
    return model;
}

}  // namespace sqlfuzz
