#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace sqlfuzz {

/// Ordered token-category vocabulary: each keyword, each comparison operator
/// and punctuation character individually, plus the literal/comment classes
/// and a final overflow bucket for anything uncategorized.
class TokenVocabulary {
public:
    /// Vocabulary fixed from the lexer's category tables.
    static TokenVocabulary standard();

    std::size_t size() const { return categories_.size(); }
    const std::vector<std::string>& categories() const { return categories_; }

    /// Category index for a lexed token, by (kind, uppercased text).
    /// Uncategorized tokens map to the overflow bucket (last index).
    std::size_t index_of(int token_kind, std::string_view text) const;
    std::size_t overflow_index() const { return categories_.size() - 1; }

    void save(std::ostream& out) const;
    static TokenVocabulary load(std::istream& in);

    bool operator==(const TokenVocabulary& o) const { return categories_ == o.categories_; }

private:
    void rebuild_index();
    std::vector<std::string> categories_;
    std::unordered_map<std::string, std::size_t> index_;  // category name -> position
};

struct FeatureVector {
    std::vector<double> values;
    std::string schema_id;
};

enum class Directedness { Directed, Undirected };
enum class Weighting { Proportional, Uniform };

struct GraphVariant {
    Directedness directedness = Directedness::Directed;
    Weighting weighting = Weighting::Proportional;
};

const char* graph_variant_tag(const GraphVariant& v);  // "dir-prop", ...

/// Sparse form used internally by the kernel models; index-sorted.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;
    double squared_norm = 0.0;
};

SparseVector to_sparse(const std::vector<double>& dense);
double sparse_dot(const SparseVector& a, const SparseVector& b);
double rbf_kernel(const SparseVector& a, const SparseVector& b, double gamma);

/// Counts of each vocabulary category over the payload's tokens, whitespace
/// excluded; uncategorized tokens land in the overflow bucket.
FeatureVector extract_token_histogram(const std::string& payload, const TokenVocabulary& vocab);

/// Sliding-window (W=5) graph of token categories, flattened adjacency,
/// L2-normalized when nonzero. Directed keeps the full matrix; Undirected
/// folds (u,v) and (v,u) into the upper triangle including the diagonal.
FeatureVector extract_graph(const std::string& payload, const GraphVariant& variant,
                            const TokenVocabulary& vocab, std::size_t window = 5);

/// Extractor binding stored inside feature-based models.
struct FeatureExtractor {
    enum class Mode { TokenHistogram, Graph };
    Mode mode = Mode::TokenHistogram;
    GraphVariant graph;
    TokenVocabulary vocab = TokenVocabulary::standard();
    std::size_t window = 5;

    std::string schema_id() const;
    std::size_t dimension() const;
    FeatureVector extract(const std::string& payload) const;

    void save(std::ostream& out) const;
    static FeatureExtractor load(std::istream& in);
};

}  // namespace sqlfuzz
