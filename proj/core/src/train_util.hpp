#pragma once

// Internal training helpers: seeded stratified splits shared by the SVM
// trainers and cross-validation.

#include <cstdint>
#include <vector>

#include "sqlfuzz/dataset.hpp"
#include "sqlfuzz/rng.hpp"

namespace sqlfuzz::detail {

/// Index split keeping each class's ratio; validation_fraction of each class
/// (rounded down, but at least one record stays in train per class).
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

inline Split stratified_split(const Dataset& ds, double validation_fraction, Rng& rng) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        by_class[ds.records[i].label == Label::Malicious ? 1 : 0].push_back(i);
    Split split;
    for (auto& idx : by_class) {
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.below(i)]);
        std::size_t n_val = static_cast<std::size_t>(idx.size() * validation_fraction);
        if (n_val >= idx.size() && !idx.empty()) n_val = idx.size() - 1;
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_val ? split.validation : split.train).push_back(idx[i]);
    }
    return split;
}

/// Stratified k-fold assignment: fold id per record, class ratios within one
/// sample of the global ratio.
inline std::vector<int> stratified_folds(const Dataset& ds, int k, Rng& rng) {
    std::vector<int> fold(ds.records.size(), 0);
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        by_class[ds.records[i].label == Label::Malicious ? 1 : 0].push_back(i);
    for (auto& idx : by_class) {
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.below(i)]);
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold[idx[i]] = static_cast<int>(i % k);
    }
    return fold;
}

}  // namespace sqlfuzz::detail
