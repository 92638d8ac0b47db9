#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "model_io.hpp"
#include "models_impl.hpp"
#include "sqlfuzz/models.hpp"

namespace sqlfuzz {

using namespace detail;

namespace detail {

int RandomForestModel::tree_vote(const std::vector<Node>& tree,
                                 const std::vector<double>& x) const {
    std::int32_t at = 0;
    for (;;) {
        const Node& node = tree[at];
        if (node.feature < 0) return node.vote;
        at = x[node.feature] <= node.threshold ? node.left : node.right;
    }
}

double RandomForestModel::classify(const std::string& payload) const {
    std::vector<double> x = extractor.extract(payload).values;
    int malicious = 0;
    for (const auto& tree : trees) malicious += tree_vote(tree, x);
    return static_cast<double>(malicious) / static_cast<double>(trees.size());
}

void RandomForestModel::save(std::ostream& out) const {
    out << kModelMagic << " " << kModelFormatVersion << "\n";
    out << "kind random-forest\n";
    extractor.save(out);
    out << "trees " << trees.size() << "\n";
    for (const auto& tree : trees) {
        out << "tree " << tree.size() << "\n";
        for (const Node& n : tree) {
            out << n.feature << " ";
            write_double(out, n.threshold);
            out << " " << n.left << " " << n.right << " " << n.vote << "\n";
        }
    }
    out << "end\n";
}

std::unique_ptr<RandomForestModel> RandomForestModel::load_body(std::istream& in) {
    auto m = std::make_unique<RandomForestModel>();
    m->extractor = FeatureExtractor::load(in);
    expect_tag(in, "trees");
    std::size_t n_trees = 0;
    in >> n_trees;
    m->trees.resize(n_trees);
    for (auto& tree : m->trees) {
        expect_tag(in, "tree");
        std::size_t n_nodes = 0;
        in >> n_nodes;
        tree.resize(n_nodes);
        for (Node& n : tree) {
            in >> n.feature;
            n.threshold = read_double(in);
            in >> n.left >> n.right >> n.vote;
        }
        if (!in) throw std::runtime_error("truncated random-forest model");
    }
    return m;
}

}  // namespace detail

namespace {

using Node = RandomForestModel::Node;

struct TreeBuilder {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;  // 0 sane, 1 malicious
    const double* class_weight; // [2]
    std::size_t n_features_per_split;
    // Splits that carve off fewer than min_leaf samples are rejected: single
    // outliers otherwise get dedicated pure leaves, and the vote becomes a
    // lookup table of training noise instead of a class profile.
    std::size_t min_leaf = 5;
    Rng& rng;
    std::vector<Node> nodes;

    double weighted_gini(double w0, double w1) const {
        double total = w0 + w1;
        if (total <= 0) return 0.0;
        double p0 = w0 / total, p1 = w1 / total;
        return 1.0 - p0 * p0 - p1 * p1;
    }

    std::int32_t build(std::vector<std::size_t>& idx) {
        double w[2] = {0, 0};
        for (std::size_t i : idx) w[y[i]] += class_weight[y[i]];
        std::int32_t self = static_cast<std::int32_t>(nodes.size());
        nodes.push_back({});
        if (w[0] == 0.0 || w[1] == 0.0 || idx.size() < 2 * min_leaf) {
            nodes[self].vote = w[1] >= w[0] ? 1 : 0;
            return self;
        }

        const std::size_t dim = x[0].size();
        std::vector<std::size_t> feats(dim);
        for (std::size_t k = 0; k < dim; ++k) feats[k] = k;
        for (std::size_t k = dim; k > 1; --k)
            std::swap(feats[k - 1], feats[rng.below(k)]);

        double parent_impurity = weighted_gini(w[0], w[1]);
        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;

        // Examine sqrt(d) random features, but keep going past the quota
        // until at least one valid split has been found (or all features
        // are exhausted), so a node never degenerates to a leaf just
        // because the sampled subset was uninformative.
        std::size_t examined = 0;
        std::vector<std::pair<double, std::size_t>> vals;
        for (std::size_t f : feats) {
            if (examined >= n_features_per_split && best_feature >= 0) break;
            ++examined;
            vals.clear();
            for (std::size_t i : idx) vals.emplace_back(x[i][f], i);
            std::sort(vals.begin(), vals.end());
            double left[2] = {0, 0}, right[2] = {w[0], w[1]};
            double total_w = w[0] + w[1];
            for (std::size_t p = 0; p + 1 < vals.size(); ++p) {
                std::size_t i = vals[p].second;
                left[y[i]] += class_weight[y[i]];
                right[y[i]] -= class_weight[y[i]];
                if (vals[p].first == vals[p + 1].first) continue;
                if (p + 1 < min_leaf || vals.size() - p - 1 < min_leaf) continue;
                double lw = left[0] + left[1], rw = right[0] + right[1];
                double impurity = (lw * weighted_gini(left[0], left[1]) +
                                   rw * weighted_gini(right[0], right[1])) /
                                  total_w;
                double gain = parent_impurity - impurity;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = (vals[p].first + vals[p + 1].first) / 2.0;
                }
            }
        }

        if (best_feature < 0) {
            nodes[self].vote = w[1] >= w[0] ? 1 : 0;
            return self;
        }
        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx)
            (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
        if (left_idx.empty() || right_idx.empty()) {
            nodes[self].vote = w[1] >= w[0] ? 1 : 0;
            return self;
        }
        nodes[self].feature = best_feature;
        nodes[self].threshold = best_threshold;
        nodes[self].left = build(left_idx);
        nodes[self].right = build(right_idx);
        return self;
    }
};

}  // namespace

std::unique_ptr<Detector> train_random_forest(const Dataset& ds, const TokenVocabulary& vocab,
                                              int n_trees, std::uint64_t seed) {
    if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    std::size_t n_sane = ds.count(Label::Sane), n_mal = ds.count(Label::Malicious);
    if (n_sane == 0 || n_mal == 0)
        throw std::invalid_argument("random forest needs both classes present");

    auto model = std::make_unique<RandomForestModel>();
    model->extractor.mode = FeatureExtractor::Mode::TokenHistogram;
    model->extractor.vocab = vocab;

    const std::size_t n = ds.records.size();
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    x.reserve(n);
    y.reserve(n);
    for (const Record& r : ds.records) {
        x.push_back(model->extractor.extract(r.query).values);
        y.push_back(r.label == Label::Malicious ? 1 : 0);
    }

    double class_weight[2] = {static_cast<double>(n) / (2.0 * n_sane),
                              static_cast<double>(n) / (2.0 * n_mal)};
    std::size_t n_split = static_cast<std::size_t>(
        std::max(1.0, std::round(std::sqrt(static_cast<double>(vocab.size())))));

    Rng root(seed);
    for (int t = 0; t < n_trees; ++t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t) + 1);
        std::vector<std::size_t> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.below(n);
        TreeBuilder builder{x, y, class_weight, n_split, 5, rng, {}};
        builder.build(bootstrap);
        model->trees.push_back(std::move(builder.nodes));
    }
    return model;
}

}  // namespace sqlfuzz
