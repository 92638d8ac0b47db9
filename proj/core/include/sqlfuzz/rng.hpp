#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sqlfuzz {

/// Deterministic RNG. Same seed yields the same draw sequence on every
/// platform (mt19937_64 is fully specified by the standard).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    bool chance(double p) { return uniform() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& xs) {
        return xs[below(xs.size())];
    }

    std::string alnum(std::size_t len) {
        static constexpr char chars[] =
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
        std::string out;
        out.reserve(len);
        for (std::size_t i = 0; i < len; ++i) out.push_back(chars[below(62)]);
        return out;
    }

    std::string lower_alpha(std::size_t len) {
        std::string out;
        out.reserve(len);
        for (std::size_t i = 0; i < len; ++i)
            out.push_back(static_cast<char>('a' + below(26)));
        return out;
    }

    /// Derive an independent child generator. Used to split one root seed
    /// across subcommands and trial indices reproducibly.
    Rng split(std::uint64_t salt) {
        std::uint64_t s = seed_ ^ (salt * 0x9e3779b97f4a7c15ull);
        s ^= s >> 30;
        s *= 0xbf58476d1ce4e5b9ull;
        s ^= s >> 27;
        s *= 0x94d049bb133111ebull;
        s ^= s >> 31;
        return Rng(s);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

/// Stable seed derivation from a root seed and a textual scope (subcommand
/// name, trial label, ...). FNV-1a over the scope, mixed with the root.
std::uint64_t derive_seed(std::uint64_t root, std::string_view scope, std::uint64_t index = 0);

}  // namespace sqlfuzz
