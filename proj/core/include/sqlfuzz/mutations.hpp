#pragma once

#include <optional>
#include <string>

#include "sqlfuzz/rng.hpp"

namespace sqlfuzz {

/// The seven semantics-preserving mutation operators.
enum class MutationOp { CS, WS, CI, CR, IE, OS, LI };

inline constexpr int kMutationOpCount = 7;

const char* mutation_op_name(MutationOp op);
std::optional<MutationOp> mutation_op_from_name(std::string_view name);

struct MutationOptions {
    /// When set, case swapping may also touch Identifier tokens. Off by
    /// default: identifier case sensitivity is dialect-dependent.
    bool case_insensitive_identifiers = false;
};

/// Randomly flips letter case in one keyword (or the hex digits of one hex
/// number). Returns the input unchanged when nothing is flippable.
std::string case_swap(const std::string& payload, Rng& rng,
                      const MutationOptions& opts = {});

/// Replaces one whitespace run with a random non-empty sequence drawn from
/// the whitespace alphabet.
std::string whitespace_sub(const std::string& payload, Rng& rng);

/// Inserts an inline comment at one token boundary.
std::string comment_inject(const std::string& payload, Rng& rng);

/// Rewrites the body of one comment (inline body or line-comment tail).
std::string comment_rewrite(const std::string& payload, Rng& rng);

/// Rewrites one numeric literal among equivalent forms: decimal <-> hex,
/// or wrapped as (SELECT n).
std::string integer_encode(const std::string& payload, Rng& rng);

/// Swaps one comparison operator for an equivalent form (= <-> LIKE guarded
/// against wildcard operands, != <-> <>).
std::string operator_swap(const std::string& payload, Rng& rng);

/// Attaches an opaque predicate to one boolean expression: either
/// "... AND <true>" appended after a comparison, or the comparison wrapped
/// as "(l op r OR <false>)".
std::string logical_invariant(const std::string& payload, Rng& rng);

struct MutationResult {
    std::string payload;
    /// Operator that produced the mutant; nullopt when every operator was an
    /// identity on the input and the payload is returned unchanged.
    std::optional<MutationOp> op;
};

/// Picks an operator uniformly at random and applies it; if the pick is an
/// identity on this payload, retries the remaining operators in random order.
MutationResult random_mutation(const std::string& payload, Rng& rng,
                               const MutationOptions& opts = {});

/// Opaque predicate generators, exposed for property tests.
std::string make_true_predicate(Rng& rng);
std::string make_false_predicate(Rng& rng);

}  // namespace sqlfuzz
