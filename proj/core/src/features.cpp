#include "sqlfuzz/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "sqlfuzz/lexer.hpp"

namespace sqlfuzz {

namespace {

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return out;
}

constexpr const char* kComparisons[] = {"=", "<", ">", "<=", ">=", "<>", "!="};
constexpr const char* kPunctuation[] = {"(", ")", ",", ";", "*", "."};

}  // namespace

TokenVocabulary TokenVocabulary::standard() {
    TokenVocabulary v;
    for (const std::string& kw : keyword_table()) v.categories_.push_back("KW:" + kw);
    for (const char* c : kComparisons) v.categories_.push_back(std::string("CMP:") + c);
    for (const char* c : kPunctuation) v.categories_.push_back(std::string("PUNCT:") + c);
    v.categories_.push_back("NUMBER");
    v.categories_.push_back("STRING");
    v.categories_.push_back("IDENTIFIER");
    v.categories_.push_back("OPERATOR");
    v.categories_.push_back("INLINE_COMMENT");
    v.categories_.push_back("LINE_COMMENT");
    v.categories_.push_back("OVERFLOW");
    v.rebuild_index();
    return v;
}

void TokenVocabulary::rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < categories_.size(); ++i) index_[categories_[i]] = i;
}

std::size_t TokenVocabulary::index_of(int token_kind, std::string_view text) const {
    auto find = [this](const std::string& cat) -> std::size_t {
        auto it = index_.find(cat);
        return it == index_.end() ? overflow_index() : it->second;
    };
    switch (static_cast<TokenKind>(token_kind)) {
        case TokenKind::Keyword: return find("KW:" + to_upper(text));
        case TokenKind::Comparison: return find("CMP:" + std::string(text));
        case TokenKind::Punctuation: return find("PUNCT:" + std::string(text));
        case TokenKind::Number: return find("NUMBER");
        case TokenKind::String: return find("STRING");
        case TokenKind::Identifier: return find("IDENTIFIER");
        case TokenKind::Operator: return find("OPERATOR");
        case TokenKind::InlineComment: return find("INLINE_COMMENT");
        case TokenKind::LineComment: return find("LINE_COMMENT");
        default: return overflow_index();
    }
}

void TokenVocabulary::save(std::ostream& out) const {
    out << "vocab " << categories_.size() << "\n";
    for (const std::string& c : categories_) out << c << "\n";
}

TokenVocabulary TokenVocabulary::load(std::istream& in) {
    std::string tag;
    std::size_t n = 0;
    in >> tag >> n;
    if (tag != "vocab" || !in) throw std::runtime_error("bad vocabulary header");
    in.ignore();
    TokenVocabulary v;
    v.categories_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, v.categories_[i]))
            throw std::runtime_error("truncated vocabulary");
    }
    v.rebuild_index();
    return v;
}

const char* graph_variant_tag(const GraphVariant& v) {
    if (v.directedness == Directedness::Directed)
        return v.weighting == Weighting::Proportional ? "dir-prop" : "dir-unif";
    return v.weighting == Weighting::Proportional ? "undir-prop" : "undir-unif";
}

SparseVector to_sparse(const std::vector<double>& dense) {
    SparseVector s;
    for (std::uint32_t i = 0; i < dense.size(); ++i) {
        if (dense[i] != 0.0) {
            s.entries.emplace_back(i, dense[i]);
            s.squared_norm += dense[i] * dense[i];
        }
    }
    return s;
}

double sparse_dot(const SparseVector& a, const SparseVector& b) {
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        if (a.entries[i].first < b.entries[j].first) {
            ++i;
        } else if (a.entries[i].first > b.entries[j].first) {
            ++j;
        } else {
            dot += a.entries[i].second * b.entries[j].second;
            ++i;
            ++j;
        }
    }
    return dot;
}

double rbf_kernel(const SparseVector& a, const SparseVector& b, double gamma) {
    double d2 = a.squared_norm + b.squared_norm - 2.0 * sparse_dot(a, b);
    if (d2 < 0.0) d2 = 0.0;
    return std::exp(-gamma * d2);
}

namespace {

std::vector<std::size_t> category_sequence(const std::string& payload,
                                           const TokenVocabulary& vocab) {
    TokenStream ts = lex(payload);
    std::vector<std::size_t> seq;
    seq.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].kind == TokenKind::Whitespace) continue;
        seq.push_back(vocab.index_of(static_cast<int>(ts[i].kind), ts.text(i)));
    }
    return seq;
}

}  // namespace

FeatureVector extract_token_histogram(const std::string& payload,
                                      const TokenVocabulary& vocab) {
    FeatureVector fv;
    fv.schema_id = "tokhist-v1";
    fv.values.assign(vocab.size(), 0.0);
    for (std::size_t cat : category_sequence(payload, vocab)) fv.values[cat] += 1.0;
    return fv;
}

FeatureVector extract_graph(const std::string& payload, const GraphVariant& variant,
                            const TokenVocabulary& vocab, std::size_t window) {
    const std::size_t n = vocab.size();
    FeatureVector fv;
    fv.schema_id = std::string("graph-") + graph_variant_tag(variant) + "-v1";

    const bool directed = variant.directedness == Directedness::Directed;
    fv.values.assign(directed ? n * n : n * (n + 1) / 2, 0.0);

    auto flat_index = [&](std::size_t u, std::size_t v) -> std::size_t {
        if (directed) return u * n + v;
        if (u > v) std::swap(u, v);
        // upper triangle incl. diagonal, row-major
        return u * n - u * (u - 1) / 2 + (v - u);
    };

    std::vector<std::size_t> seq = category_sequence(payload, vocab);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        for (std::size_t d = 1; d < window && i + d < seq.size(); ++d) {
            double w = variant.weighting == Weighting::Uniform
                           ? 1.0
                           : static_cast<double>(window - d);
            fv.values[flat_index(seq[i], seq[i + d])] += w;
        }
    }

    double sq = 0.0;
    for (double v : fv.values) sq += v * v;
    if (sq > 0.0) {
        double inv = 1.0 / std::sqrt(sq);
        for (double& v : fv.values) v *= inv;
    }
    return fv;
}

std::string FeatureExtractor::schema_id() const {
    if (mode == Mode::TokenHistogram) return "tokhist-v1";
    return std::string("graph-") + graph_variant_tag(graph) + "-v1";
}

std::size_t FeatureExtractor::dimension() const {
    std::size_t n = vocab.size();
    if (mode == Mode::TokenHistogram) return n;
    return graph.directedness == Directedness::Directed ? n * n : n * (n + 1) / 2;
}

FeatureVector FeatureExtractor::extract(const std::string& payload) const {
    if (mode == Mode::TokenHistogram) return extract_token_histogram(payload, vocab);
    return extract_graph(payload, graph, vocab, window);
}

void FeatureExtractor::save(std::ostream& out) const {
    out << "extractor " << (mode == Mode::TokenHistogram ? "tokhist" : "graph") << " ";
    out << graph_variant_tag(graph) << " " << window << "\n";
    vocab.save(out);
}

FeatureExtractor FeatureExtractor::load(std::istream& in) {
    std::string tag, mode, variant;
    std::size_t window = 5;
    in >> tag >> mode >> variant >> window;
    if (tag != "extractor" || !in) throw std::runtime_error("bad extractor header");
    FeatureExtractor fx;
    fx.mode = mode == "graph" ? Mode::Graph : Mode::TokenHistogram;
    if (variant == "dir-prop") fx.graph = {Directedness::Directed, Weighting::Proportional};
    else if (variant == "dir-unif") fx.graph = {Directedness::Directed, Weighting::Uniform};
    else if (variant == "undir-prop") fx.graph = {Directedness::Undirected, Weighting::Proportional};
    else fx.graph = {Directedness::Undirected, Weighting::Uniform};
    fx.window = window;
    fx.vocab = TokenVocabulary::load(in);
    return fx;
}

}  // namespace sqlfuzz
