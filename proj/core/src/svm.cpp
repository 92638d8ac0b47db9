#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "model_io.hpp"
#include "models_impl.hpp"
#include "sqlfuzz/models.hpp"
#include "train_util.hpp"

namespace sqlfuzz {

using namespace detail;

namespace detail {

// ---------------------------------------------------------------------------
// Linear SVM

double LinearSvmModel::margin(const std::vector<double>& features) const {
    double m = bias;
    for (std::size_t k = 0; k < weights.size(); ++k)
        m += weights[k] * (features[k] - mean[k]) / scale[k];
    return m;
}

double LinearSvmModel::classify(const std::string& payload) const {
    return platt.apply(margin(extractor.extract(payload).values));
}

void LinearSvmModel::save(std::ostream& out) const {
    out << kModelMagic << " " << kModelFormatVersion << "\n";
    out << "kind linear-svm\n";
    extractor.save(out);
    out << "c ";
    write_double(out, c);
    out << "\nplatt ";
    write_double(out, platt.a);
    out << " ";
    write_double(out, platt.b);
    out << "\nbias ";
    write_double(out, bias);
    out << "\ndim " << weights.size() << "\n";
    for (std::size_t k = 0; k < weights.size(); ++k) {
        write_double(out, weights[k]);
        out << " ";
        write_double(out, mean[k]);
        out << " ";
        write_double(out, scale[k]);
        out << "\n";
    }
    out << "end\n";
}

std::unique_ptr<LinearSvmModel> LinearSvmModel::load_body(std::istream& in) {
    auto m = std::make_unique<LinearSvmModel>();
    m->extractor = FeatureExtractor::load(in);
    expect_tag(in, "c");
    m->c = read_double(in);
    expect_tag(in, "platt");
    m->platt.a = read_double(in);
    m->platt.b = read_double(in);
    expect_tag(in, "bias");
    m->bias = read_double(in);
    expect_tag(in, "dim");
    std::size_t dim = 0;
    in >> dim;
    m->weights.resize(dim);
    m->mean.resize(dim);
    m->scale.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        m->weights[k] = read_double(in);
        m->mean[k] = read_double(in);
        m->scale[k] = read_double(in);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Gaussian SVM

double GaussianSvmModel::margin(const SparseVector& x) const {
    double m = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        m += coefficients[i] * rbf_kernel(support_vectors[i], x, gamma);
    return m;
}

double GaussianSvmModel::classify(const std::string& payload) const {
    return platt.apply(margin(to_sparse(extractor.extract(payload).values)));
}

void GaussianSvmModel::save(std::ostream& out) const {
    out << kModelMagic << " " << kModelFormatVersion << "\n";
    out << "kind gaussian-svm\n";
    extractor.save(out);
    out << "c ";
    write_double(out, c);
    out << "\ngamma ";
    write_double(out, gamma);
    out << "\nplatt ";
    write_double(out, platt.a);
    out << " ";
    write_double(out, platt.b);
    out << "\nbias ";
    write_double(out, bias);
    out << "\nsupport_vectors " << support_vectors.size() << "\n";
    for (std::size_t i = 0; i < support_vectors.size(); ++i) {
        write_double(out, coefficients[i]);
        out << " " << support_vectors[i].entries.size();
        for (const auto& [idx, v] : support_vectors[i].entries) {
            out << " " << idx << " ";
            write_double(out, v);
        }
        out << "\n";
    }
    out << "end\n";
}

std::unique_ptr<GaussianSvmModel> GaussianSvmModel::load_body(std::istream& in) {
    auto m = std::make_unique<GaussianSvmModel>();
    m->extractor = FeatureExtractor::load(in);
    expect_tag(in, "c");
    m->c = read_double(in);
    expect_tag(in, "gamma");
    m->gamma = read_double(in);
    expect_tag(in, "platt");
    m->platt.a = read_double(in);
    m->platt.b = read_double(in);
    expect_tag(in, "bias");
    m->bias = read_double(in);
    expect_tag(in, "support_vectors");
    std::size_t n_sv = 0;
    in >> n_sv;
    m->support_vectors.resize(n_sv);
    m->coefficients.resize(n_sv);
    for (std::size_t i = 0; i < n_sv; ++i) {
        m->coefficients[i] = read_double(in);
        std::size_t nnz = 0;
        in >> nnz;
        SparseVector& sv = m->support_vectors[i];
        sv.entries.resize(nnz);
        sv.squared_norm = 0.0;
        for (std::size_t j = 0; j < nnz; ++j) {
            in >> sv.entries[j].first;
            sv.entries[j].second = read_double(in);
            sv.squared_norm += sv.entries[j].second * sv.entries[j].second;
        }
    }
    return m;
}

}  // namespace detail

namespace {

struct LabeledFeatures {
    std::vector<std::vector<double>> x;
    std::vector<int> y;  // +1 malicious, -1 sane
};

LabeledFeatures extract_all(const Dataset& ds, const FeatureExtractor& fx,
                            const std::vector<std::size_t>& indices) {
    LabeledFeatures out;
    out.x.reserve(indices.size());
    out.y.reserve(indices.size());
    for (std::size_t i : indices) {
        out.x.push_back(fx.extract(ds.records[i].query).values);
        out.y.push_back(ds.records[i].label == Label::Malicious ? 1 : -1);
    }
    return out;
}

void require_both_classes(const Dataset& ds) {
    if (ds.count(Label::Sane) == 0 || ds.count(Label::Malicious) == 0)
        throw std::invalid_argument("training needs both classes present");
}

}  // namespace

std::unique_ptr<Detector> train_linear_svm(const Dataset& ds, const TokenVocabulary& vocab,
                                           double C, std::uint64_t seed) {
    if (C <= 0) throw std::invalid_argument("C must be > 0");
    require_both_classes(ds);

    auto model = std::make_unique<LinearSvmModel>();
    model->extractor.mode = FeatureExtractor::Mode::TokenHistogram;
    model->extractor.vocab = vocab;
    model->c = C;

    Rng rng(seed);
    Split split = stratified_split(ds, 0.15, rng);
    LabeledFeatures train = extract_all(ds, model->extractor, split.train);
    const std::size_t n = train.x.size();
    const std::size_t dim = model->extractor.dimension();

    // Raw token counts, no per-feature standardization: rescaling by the
    // inverse standard deviation hands rare categories effective weights an
    // order of magnitude above everything else, and the resulting model
    // hinges on a handful of near-constant features instead of the class
    // profile. Counts already share a scale (small non-negative integers).
    model->mean.assign(dim, 0.0);
    model->scale.assign(dim, 1.0);
    const std::vector<std::vector<double>>& z = train.x;

    // inverse-frequency class weights on the training split
    double n_pos = 0, n_neg = 0;
    for (int y : train.y) (y > 0 ? n_pos : n_neg) += 1;
    double w_pos = static_cast<double>(n) / (2.0 * n_pos);
    double w_neg = static_cast<double>(n) / (2.0 * n_neg);

    // Pegasos-style subgradient descent on the class-weighted hinge loss.
    const double lambda = 1.0 / (C * static_cast<double>(n));
    model->weights.assign(dim, 0.0);
    model->bias = 0.0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::size_t t = 0;
    const int epochs = 40;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t oi = 0; oi < n; ++oi) {
            std::size_t i = order[oi];
            ++t;
            double eta = 1.0 / (lambda * static_cast<double>(t));
            double m = model->bias;
            for (std::size_t k = 0; k < dim; ++k) m += model->weights[k] * z[i][k];
            double shrink = 1.0 - eta * lambda;
            if (shrink < 0) shrink = 0;
            for (std::size_t k = 0; k < dim; ++k) model->weights[k] *= shrink;
            if (train.y[i] * m < 1.0) {
                double cw = train.y[i] > 0 ? w_pos : w_neg;
                double step = eta * cw * train.y[i];
                for (std::size_t k = 0; k < dim; ++k) model->weights[k] += step * z[i][k];
                model->bias += step;
            }
        }
    }

    // Platt calibration on the held-out split (training margins as fallback
    // when the dataset is too small to spare a validation record).
    const auto& calib_idx = split.validation.empty() ? split.train : split.validation;
    std::vector<double> margins;
    std::vector<int> labels;
    for (std::size_t i : calib_idx) {
        margins.push_back(model->margin(model->extractor.extract(ds.records[i].query).values));
        labels.push_back(ds.records[i].label == Label::Malicious ? 1 : -1);
    }
    model->platt = PlattScaling::fit(margins, labels);
    return model;
}

std::unique_ptr<Detector> train_gaussian_svm(const Dataset& ds, const FeatureExtractor& fx,
                                             double C, double gamma, std::uint64_t seed) {
    if (C <= 0) throw std::invalid_argument("C must be > 0");
    if (gamma <= 0) throw std::invalid_argument("gamma must be > 0");
    require_both_classes(ds);

    auto model = std::make_unique<GaussianSvmModel>();
    model->extractor = fx;
    model->c = C;
    model->gamma = gamma;

    Rng rng(seed);
    Split split = stratified_split(ds, 0.15, rng);
    const std::size_t n = split.train.size();
    if (n > 4500)
        throw std::invalid_argument("gaussian SVM training capped at ~4000 samples, got " +
                                    std::to_string(n));

    std::vector<SparseVector> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = to_sparse(fx.extract(ds.records[split.train[i]].query).values);
        y[i] = ds.records[split.train[i]].label == Label::Malicious ? 1.0 : -1.0;
    }

    double n_pos = 0, n_neg = 0;
    for (double yi : y) (yi > 0 ? n_pos : n_neg) += 1;
    std::vector<double> c_i(n);
    for (std::size_t i = 0; i < n; ++i)
        c_i[i] = C * (y[i] > 0 ? static_cast<double>(n) / (2.0 * n_pos)
                               : static_cast<double>(n) / (2.0 * n_neg));

    // cached kernel matrix (float to halve memory; n is desk-scale)
    std::vector<float> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        kmat[i * n + i] = 1.0f;
        for (std::size_t j = i + 1; j < n; ++j) {
            float k = static_cast<float>(rbf_kernel(x[i], x[j], gamma));
            kmat[i * n + j] = k;
            kmat[j * n + i] = k;
        }
    }
    auto kern = [&](std::size_t i, std::size_t j) -> double { return kmat[i * n + j]; };

    // SMO with an error cache; second choice maximizes |E1 - E2|.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> err(n);
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) err[i] = -y[i];
    const double tol = 1e-3, eps = 1e-10;

    auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
        if (i1 == i2) return false;
        double a1 = alpha[i1], a2 = alpha[i2];
        double y1 = y[i1], y2 = y[i2];
        double e1 = err[i1], e2 = err[i2];
        double s = y1 * y2;
        double lo, hi;
        if (s < 0) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c_i[i2], c_i[i1] + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c_i[i1]);
            hi = std::min(c_i[i2], a1 + a2);
        }
        if (lo >= hi) return false;
        double k11 = kern(i1, i1), k12 = kern(i1, i2), k22 = kern(i2, i2);
        double eta = k11 + k22 - 2.0 * k12;
        double a2_new;
        if (eta > 0) {
            a2_new = a2 + y2 * (e1 - e2) / eta;
            a2_new = std::clamp(a2_new, lo, hi);
        } else {
            // degenerate direction: step to the better bound
            double l_obj = y2 * (e1 - e2) * lo;
            double h_obj = y2 * (e1 - e2) * hi;
            if (l_obj < h_obj - eps) a2_new = lo;
            else if (l_obj > h_obj + eps) a2_new = hi;
            else return false;
        }
        if (std::abs(a2_new - a2) < eps * (a2_new + a2 + eps)) return false;
        double a1_new = a1 + s * (a2 - a2_new);
        if (a1_new < 0) a1_new = 0;
        if (a1_new > c_i[i1]) a1_new = c_i[i1];

        double b1 = b - e1 - y1 * (a1_new - a1) * k11 - y2 * (a2_new - a2) * k12;
        double b2 = b - e2 - y1 * (a1_new - a1) * k12 - y2 * (a2_new - a2) * k22;
        double b_new;
        bool a1_free = a1_new > eps && a1_new < c_i[i1] - eps;
        bool a2_free = a2_new > eps && a2_new < c_i[i2] - eps;
        if (a1_free) b_new = b1;
        else if (a2_free) b_new = b2;
        else b_new = (b1 + b2) / 2.0;

        double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2), db = b_new - b;
        for (std::size_t k = 0; k < n; ++k)
            err[k] += d1 * kern(i1, k) + d2 * kern(i2, k) + db;
        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        b = b_new;
        return true;
    };

    auto examine = [&](std::size_t i2) -> bool {
        double y2 = y[i2], a2 = alpha[i2], e2 = err[i2];
        double r2 = e2 * y2;
        if ((r2 < -tol && a2 < c_i[i2] - eps) || (r2 > tol && a2 > eps)) {
            // 1st heuristic: maximize |E1 - E2| over free multipliers
            std::size_t best = n;
            double best_gap = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (alpha[i] <= eps || alpha[i] >= c_i[i] - eps) continue;
                double gap = std::abs(err[i] - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
            if (best < n && take_step(best, i2)) return true;
            std::size_t start = rng.below(n);
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t i = (start + k) % n;
                if (alpha[i] > eps && alpha[i] < c_i[i] - eps && take_step(i, i2)) return true;
            }
            start = rng.below(n);
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t i = (start + k) % n;
                if (take_step(i, i2)) return true;
            }
        }
        return false;
    };

    const std::size_t max_sweeps = 2000;
    std::size_t sweeps = 0;
    bool examine_all = true;
    std::size_t changed = 0;
    do {
        changed = 0;
        if (examine_all) {
            for (std::size_t i = 0; i < n; ++i) changed += examine(i);
        } else {
            for (std::size_t i = 0; i < n; ++i)
                if (alpha[i] > eps && alpha[i] < c_i[i] - eps) changed += examine(i);
        }
        if (examine_all) examine_all = false;
        else if (changed == 0) examine_all = true;
        ++sweeps;
    } while ((changed > 0 || examine_all) && sweeps < max_sweeps);

    for (std::size_t i = 0; i < n; ++i)
        assert(alpha[i] >= -1e-9 && alpha[i] <= c_i[i] + 1e-9);

    if (sweeps >= max_sweeps) {
        // duality gap = sum of KKT violations, reported for diagnosis
        double gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = err[i] * y[i];
            if (r < -tol && alpha[i] < c_i[i] - eps) gap += -r - tol;
            if (r > tol && alpha[i] > eps) gap += r - tol;
        }
        // Duplicated samples with conflicting labels leave an irreducible
        // violation, so tolerate a small per-sample residual.
        if (gap > 5e-2 * static_cast<double>(n))
            throw std::runtime_error("gaussian SVM did not converge; duality gap " +
                                     std::to_string(gap));
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-10) {
            model->support_vectors.push_back(x[i]);
            model->coefficients.push_back(alpha[i] * y[i]);
        }
    }
    model->bias = b;

    const auto& calib_idx = split.validation.empty() ? split.train : split.validation;
    std::vector<double> margins;
    std::vector<int> labels;
    for (std::size_t i : calib_idx) {
        margins.push_back(model->margin(to_sparse(fx.extract(ds.records[i].query).values)));
        labels.push_back(ds.records[i].label == Label::Malicious ? 1 : -1);
    }
    model->platt = PlattScaling::fit(margins, labels);
    return model;
}

}  // namespace sqlfuzz
