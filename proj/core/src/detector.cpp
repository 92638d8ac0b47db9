#include "sqlfuzz/detector.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "model_io.hpp"
#include "models_impl.hpp"

namespace sqlfuzz {

using namespace detail;

std::unique_ptr<Detector> load_detector(std::istream& in) {
    std::string magic;
    int version = -1;
    if (!(in >> magic >> version)) throw std::runtime_error("not a model file");
    if (magic != kModelMagic) throw std::runtime_error("not a model file: bad magic");
    if (version != kModelFormatVersion)
        throw std::runtime_error("unsupported model format version " + std::to_string(version));
    expect_tag(in, "kind");
    std::string kind;
    in >> kind;

    std::unique_ptr<Detector> model;
    if (kind == "naive-bayes") model = NaiveBayesModel::load_body(in);
    else if (kind == "linear-svm") model = LinearSvmModel::load_body(in);
    else if (kind == "gaussian-svm") model = GaussianSvmModel::load_body(in);
    else if (kind == "random-forest") model = RandomForestModel::load_body(in);
    else if (kind == "char-ngram") model = CharNgramModel::load_body(in);
    else if (kind.rfind("stub:", 0) == 0) model = std::make_unique<StubModel>(kind);
    else throw std::runtime_error("unknown model kind: " + kind);

    expect_tag(in, "end");
    return model;
}

std::unique_ptr<Detector> load_detector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_detector(in);
}

void save_detector_file(const Detector& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    model.save(out);
}

namespace detail {

double PlattScaling::apply(double margin) const {
    double z = a * margin + b;
    // numerically stable logistic
    if (z >= 0) {
        double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

PlattScaling PlattScaling::fit(const std::vector<double>& margins,
                               const std::vector<int>& labels) {
    // Lin, Lin & Weng's robust Newton variant of Platt's procedure.
    const std::size_t n = margins.size();
    double np = 0, nn = 0;
    for (int y : labels) (y > 0 ? np : nn) += 1;
    if (n == 0 || np == 0 || nn == 0) return {-1.0, 0.0};

    const double hi = (np + 1.0) / (np + 2.0);
    const double lo = 1.0 / (nn + 2.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] > 0 ? hi : lo;

    double a = 0.0, b = std::log((nn + 1.0) / (np + 1.0));
    const double sigma = 1e-12;
    double fval = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fApB = a * margins[i] + b;
        if (fApB >= 0)
            fval += target[i] * fApB + std::log1p(std::exp(-fApB));
        else
            fval += (target[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double fApB = a * margins[i] + b;
            double p, q;
            if (fApB >= 0) {
                p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
                q = 1.0 / (1.0 + std::exp(-fApB));
            } else {
                p = 1.0 / (1.0 + std::exp(fApB));
                q = std::exp(fApB) / (1.0 + std::exp(fApB));
            }
            double d2 = p * q;
            h11 += margins[i] * margins[i] * d2;
            h22 += d2;
            h21 += margins[i] * d2;
            double d1 = target[i] - p;
            g1 += margins[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-10 && std::abs(g2) < 1e-10) break;
        double det = h11 * h22 - h21 * h21;
        double dA = -(h22 * g1 - h21 * g2) / det;
        double dB = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * dA + g2 * dB;
        double step = 1.0;
        bool stepped = false;
        while (step >= 1e-10) {
            double na = a + step * dA, nb = b + step * dB;
            double nf = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double fApB = na * margins[i] + nb;
                if (fApB >= 0)
                    nf += target[i] * fApB + std::log1p(std::exp(-fApB));
                else
                    nf += (target[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
            }
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                stepped = true;
                break;
            }
            step /= 2.0;
        }
        if (!stepped) break;
    }
    if (a > 0.0) a = 0.0;  // keep calibrated score monotone in the margin
    return {a, b};
}

double StubModel::classify(const std::string& payload) const {
    if (name_ == "stub:zero") return 0.0;
    if (name_ == "stub:one") return 1.0;
    if (name_ == "stub:lenparity") return payload.size() % 2 == 0 ? 0.0 : 1.0;
    throw std::runtime_error("unknown stub model: " + name_);
}

void StubModel::save(std::ostream& out) const {
    out << kModelMagic << " " << kModelFormatVersion << "\n";
    out << "kind " << name_ << "\n";
    out << "end\n";
}

std::unique_ptr<StubModel> StubModel::load_body(std::istream&) {
    return nullptr;  // dispatch constructs directly from the kind tag
}

}  // namespace detail

std::unique_ptr<Detector> make_stub(const std::string& name) {
    if (name != "stub:zero" && name != "stub:one" && name != "stub:lenparity")
        throw std::runtime_error("unknown stub model: " + name);
    return std::make_unique<detail::StubModel>(name);
}

}  // namespace sqlfuzz
