#include "sqlfuzz/mutations.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "sqlfuzz/lexer.hpp"

namespace sqlfuzz {

const char* mutation_op_name(MutationOp op) {
    switch (op) {
        case MutationOp::CS: return "CS";
        case MutationOp::WS: return "WS";
        case MutationOp::CI: return "CI";
        case MutationOp::CR: return "CR";
        case MutationOp::IE: return "IE";
        case MutationOp::OS: return "OS";
        case MutationOp::LI: return "LI";
    }
    return "?";
}

std::optional<MutationOp> mutation_op_from_name(std::string_view name) {
    static constexpr std::array<MutationOp, 7> ops = {
        MutationOp::CS, MutationOp::WS, MutationOp::CI, MutationOp::CR,
        MutationOp::IE, MutationOp::OS, MutationOp::LI};
    for (MutationOp op : ops)
        if (name == mutation_op_name(op)) return op;
    return std::nullopt;
}

namespace {

std::string splice(const std::string& s, std::size_t begin, std::size_t end,
                   std::string_view replacement) {
    std::string out;
    out.reserve(s.size() + replacement.size());
    out.append(s, 0, begin);
    out.append(replacement);
    out.append(s, end, s.size() - end);
    return out;
}

bool is_hex_number(std::string_view text) {
    return text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
}

/// Previous non-separator token index, or npos.
std::size_t prev_solid(const TokenStream& ts, std::size_t i) {
    while (i-- > 0) {
        TokenKind k = ts[i].kind;
        if (k != TokenKind::Whitespace && k != TokenKind::InlineComment) return i;
    }
    return std::string::npos;
}

std::size_t next_solid(const TokenStream& ts, std::size_t i) {
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
        TokenKind k = ts[j].kind;
        if (k != TokenKind::Whitespace && k != TokenKind::InlineComment) return j;
    }
    return std::string::npos;
}

bool is_atom(TokenKind k) {
    return k == TokenKind::Number || k == TokenKind::String || k == TokenKind::Identifier;
}

bool string_has_wildcard(std::string_view text) {
    return text.find('%') != std::string_view::npos ||
           text.find('_') != std::string_view::npos;
}

}  // namespace

std::string case_swap(const std::string& payload, Rng& rng, const MutationOptions& opts) {
    TokenStream ts = lex(payload);
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const Token& t = ts[i];
        if (t.kind == TokenKind::Keyword ||
            (t.kind == TokenKind::Identifier && opts.case_insensitive_identifiers) ||
            (t.kind == TokenKind::Number && is_hex_number(ts.text(i)))) {
            std::string_view text = ts.text(i);
            if (std::any_of(text.begin(), text.end(), [](unsigned char c) {
                    return std::isalpha(c);
                }))
                sites.push_back(i);
        }
    }
    if (sites.empty()) return payload;

    std::size_t i = sites[rng.below(sites.size())];
    std::string text(ts.text(i));
    std::vector<std::size_t> letters;
    for (std::size_t j = 0; j < text.size(); ++j)
        if (std::isalpha(static_cast<unsigned char>(text[j]))) letters.push_back(j);
    auto flip = [](char c) {
        return std::isupper(static_cast<unsigned char>(c))
                   ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                   : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    };
    bool changed = false;
    for (std::size_t j : letters) {
        if (rng.chance(0.5)) {
            text[j] = flip(text[j]);
            changed = true;
        }
    }
    if (!changed) {
        std::size_t j = letters[rng.below(letters.size())];
        text[j] = flip(text[j]);
    }
    return splice(payload, ts[i].begin, ts[i].end, text);
}

std::string whitespace_sub(const std::string& payload, Rng& rng) {
    TokenStream ts = lex(payload);
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i].kind == TokenKind::Whitespace) sites.push_back(i);
    if (sites.empty()) return payload;

    std::size_t i = sites[rng.below(sites.size())];
    std::size_t len = 1 + rng.below(3);
    std::string replacement;
    for (std::size_t j = 0; j < len; ++j)
        replacement.push_back(kWhitespaceAlphabet[rng.below(kWhitespaceAlphabet.size())]);
    return splice(payload, ts[i].begin, ts[i].end, replacement);
}

std::string comment_inject(const std::string& payload, Rng& rng) {
    if (payload.empty()) return payload;
    TokenStream ts = lex(payload);
    // Any boundary between tokens (or the ends) is outside String and comment
    // tokens by construction.
    std::size_t boundary = rng.below(ts.size() + 1);
    std::size_t offset = boundary < ts.size() ? ts[boundary].begin : payload.size();
    std::string body = rng.chance(0.5) ? std::string() : rng.alnum(1 + rng.below(3));
    return splice(payload, offset, offset, "/*" + body + "*/");
}

std::string comment_rewrite(const std::string& payload, Rng& rng) {
    TokenStream ts = lex(payload);
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i].kind == TokenKind::InlineComment || ts[i].kind == TokenKind::LineComment)
            sites.push_back(i);
    if (sites.empty()) return payload;

    std::size_t i = sites[rng.below(sites.size())];
    std::string_view text = ts.text(i);
    std::string replacement;
    if (ts[i].kind == TokenKind::InlineComment) {
        // Alphanumeric body can never contain "*/".
        replacement = "/*" + rng.alnum(1 + rng.below(6)) + "*/";
    } else {
        std::string_view marker = text[0] == '#' ? text.substr(0, 1) : text.substr(0, 2);
        replacement = std::string(marker) + rng.alnum(1 + rng.below(6));
    }
    return splice(payload, ts[i].begin, ts[i].end, replacement);
}

std::string integer_encode(const std::string& payload, Rng& rng) {
    TokenStream ts = lex(payload);
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i].kind == TokenKind::Number && ts[i].end - ts[i].begin <= 15)
            sites.push_back(i);
    if (sites.empty()) return payload;

    std::size_t i = sites[rng.below(sites.size())];
    std::string text(ts.text(i));
    bool hex = is_hex_number(text);
    unsigned long long value = std::stoull(hex ? text.substr(2) : text, nullptr, hex ? 16 : 10);

    std::string replacement;
    if (rng.chance(0.5)) {
        // Switch base.
        if (hex) {
            replacement = std::to_string(value);
        } else {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "0x%llx", value);
            replacement = buf;
        }
    } else {
        replacement = "(SELECT " + text + ")";
    }
    return splice(payload, ts[i].begin, ts[i].end, replacement);
}

std::string operator_swap(const std::string& payload, Rng& rng) {
    TokenStream ts = lex(payload);
    struct Swap {
        std::size_t begin, end;
        std::string replacement;
    };
    std::vector<Swap> swaps;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const Token& t = ts[i];
        std::string_view text = ts.text(i);
        if (t.kind == TokenKind::Comparison && text == "=") {
            std::size_t l = prev_solid(ts, i), r = next_solid(ts, i);
            auto wildcard = [&](std::size_t j) {
                return j != std::string::npos && ts[j].kind == TokenKind::String &&
                       string_has_wildcard(ts.text(j));
            };
            if (wildcard(l) || wildcard(r)) continue;
            // LIKE is a word: keep it separated from its operands.
            std::string rep = "LIKE";
            if (t.begin > 0 && !std::isspace(static_cast<unsigned char>(payload[t.begin - 1])))
                rep.insert(rep.begin(), ' ');
            if (t.end < payload.size() &&
                !std::isspace(static_cast<unsigned char>(payload[t.end])))
                rep.push_back(' ');
            swaps.push_back({t.begin, t.end, rep});
        } else if (t.kind == TokenKind::Comparison && (text == "!=" || text == "<>")) {
            swaps.push_back({t.begin, t.end, text == "!=" ? "<>" : "!="});
        } else if (t.kind == TokenKind::Keyword) {
            std::string up(text);
            std::transform(up.begin(), up.end(), up.begin(),
                           [](unsigned char c) { return std::toupper(c); });
            if (up == "LIKE") {
                std::size_t l = prev_solid(ts, i), r = next_solid(ts, i);
                // LIKE -> = is only value-preserving for numeric operands
                // (string comparison under LIKE is case-insensitive).
                if (l != std::string::npos && r != std::string::npos &&
                    ts[l].kind == TokenKind::Number && ts[r].kind == TokenKind::Number)
                    swaps.push_back({t.begin, t.end, "="});
            }
        }
    }
    if (swaps.empty()) return payload;
    const Swap& s = swaps[rng.below(swaps.size())];
    return splice(payload, s.begin, s.end, s.replacement);
}

// Opaque predicates stay quote-free on purpose: a payload often carries an
// odd number of quotes, so any quoted literal added here would pair up
// differently inside the full query than in the payload lexed in isolation,
// and later boundary-based mutations could then edit the inside of a
// context string. The templates span flat comparisons, IN lists, scalar
// subqueries, and parenthesized combinations so a single application can
// change the token profile in several categories at once.
std::string make_true_predicate(Rng& rng) {
    long a = rng.range(1, 9998);
    long b = a + 1 + rng.range(0, 9999 - a - 1);  // a < b always
    std::string sa = std::to_string(a), sb = std::to_string(b);
    switch (rng.below(9)) {
        case 0: return sa + (rng.chance(0.5) ? "<>" : "!=") + sb;
        case 1: return sa + "=" + sa;
        case 2: return sa + ">=" + sa;
        case 3: return sa + "<" + sb;
        case 4: return sa + " IN (" + sa + "," + sb + ")";
        case 5: return sa + " NOT IN (" + sb + ")";
        case 6: return "(SELECT " + sa + ")=" + sa;
        case 7: return "ABS(" + sa + ")=" + sa;
        default: return "(" + sa + "=" + sa + " OR " + sa + ">" + sb + ")";
    }
}

std::string make_false_predicate(Rng& rng) {
    long a = rng.range(1, 9998);
    long b = a + 1 + rng.range(0, 9999 - a - 1);  // a < b always
    std::string sa = std::to_string(a), sb = std::to_string(b);
    switch (rng.below(9)) {
        case 0: return sa + "=" + sb;
        case 1: return sa + ">" + sb;
        case 2: return sa + "<" + sa;
        case 3: return sa + (rng.chance(0.5) ? "<>" : "!=") + sa;
        case 4: return sa + " IN (" + sb + ")";
        case 5: return sa + " NOT IN (" + sa + "," + sb + ")";
        case 6: return "(SELECT " + sa + ")<>" + sa;
        case 7: return "ABS(" + sa + ")<" + sa;
        default: return "(" + sa + "<" + sa + " OR " + sb + "<" + sa + ")";
    }
}

std::string logical_invariant(const std::string& payload, Rng& rng) {
    TokenStream ts = lex(payload);
    struct Site {
        std::size_t left, op, right;  // token indices; left may be npos
    };
    std::vector<Site> sites;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        bool comparison = ts[i].kind == TokenKind::Comparison;
        if (ts[i].kind == TokenKind::Keyword) {
            std::string up(ts.text(i));
            std::transform(up.begin(), up.end(), up.begin(),
                           [](unsigned char c) { return std::toupper(c); });
            comparison = up == "LIKE";
        }
        if (!comparison) continue;
        std::size_t r = next_solid(ts, i);
        if (r == std::string::npos || !is_atom(ts[r].kind)) continue;
        std::size_t l = prev_solid(ts, i);
        if (l != std::string::npos && !is_atom(ts[l].kind)) l = std::string::npos;
        sites.push_back({l, i, r});
    }
    if (sites.empty()) return payload;

    const Site& s = sites[rng.below(sites.size())];
    // AND binds tighter than OR, so "<cmp> AND <true>" can be appended in
    // place. An OR'd false predicate must be parenthesized with the
    // comparison, or a surrounding AND would capture it.
    if (s.left == std::string::npos || rng.chance(0.6)) {
        std::string insert = " AND " + make_true_predicate(rng);
        return splice(payload, ts[s.right].end, ts[s.right].end, insert);
    }
    std::size_t begin = ts[s.left].begin, end = ts[s.right].end;
    std::string inner = payload.substr(begin, end - begin);
    return splice(payload, begin, end, "(" + inner + " OR " + make_false_predicate(rng) + ")");
}

MutationResult random_mutation(const std::string& payload, Rng& rng,
                               const MutationOptions& opts) {
    std::array<MutationOp, 7> order = {MutationOp::CS, MutationOp::WS, MutationOp::CI,
                                       MutationOp::CR, MutationOp::IE, MutationOp::OS,
                                       MutationOp::LI};
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);

    for (MutationOp op : order) {
        std::string out;
        switch (op) {
            case MutationOp::CS: out = case_swap(payload, rng, opts); break;
            case MutationOp::WS: out = whitespace_sub(payload, rng); break;
            case MutationOp::CI: out = comment_inject(payload, rng); break;
            case MutationOp::CR: out = comment_rewrite(payload, rng); break;
            case MutationOp::IE: out = integer_encode(payload, rng); break;
            case MutationOp::OS: out = operator_swap(payload, rng); break;
            case MutationOp::LI: out = logical_invariant(payload, rng); break;
        }
        if (out != payload) return {std::move(out), op};
    }
    return {payload, std::nullopt};
}

}  // namespace sqlfuzz
