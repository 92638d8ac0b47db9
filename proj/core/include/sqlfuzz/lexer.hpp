#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sqlfuzz {

enum class TokenKind {
    Keyword,
    Identifier,
    Number,
    String,
    Operator,
    Comparison,
    Punctuation,
    Whitespace,
    InlineComment,
    LineComment,
    Unknown,
};

const char* token_kind_name(TokenKind k);

struct Token {
    TokenKind kind;
    std::size_t begin;  // byte offset, inclusive
    std::size_t end;    // byte offset, exclusive
};

/// Token stream over a payload. Owns the source string; token text is a view
/// into it. Concatenating all token texts reproduces the source byte-for-byte.
class TokenStream {
public:
    TokenStream() = default;
    TokenStream(std::string source, std::vector<Token> tokens)
        : source_(std::move(source)), tokens_(std::move(tokens)) {}

    const std::string& source() const { return source_; }
    const std::vector<Token>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }
    const Token& operator[](std::size_t i) const { return tokens_[i]; }

    std::string_view text(std::size_t i) const {
        const Token& t = tokens_[i];
        return std::string_view(source_).substr(t.begin, t.end - t.begin);
    }
    std::string_view text(const Token& t) const {
        return std::string_view(source_).substr(t.begin, t.end - t.begin);
    }

private:
    std::string source_;
    std::vector<Token> tokens_;
};

/// Error-tolerant SQL lexer. Total: every input produces a stream whose token
/// texts concatenate back to the input. Unrecognized bytes become Unknown
/// tokens; a quote with no closing partner is a single-byte Unknown token; an
/// unterminated inline comment runs to end of input.
TokenStream lex(std::string_view payload);

/// True iff token i can serve as a separator between SQL tokens
/// (whitespace or an inline comment). Throws std::out_of_range on a bad index.
bool is_separator_position(const TokenStream& ts, std::size_t i);

/// Fixed, case-insensitive keyword table. Uppercase spellings.
const std::vector<std::string>& keyword_table();

bool is_keyword(std::string_view word);

/// Whitespace alphabet recognized by the lexer (and used by the WS mutation).
inline constexpr std::string_view kWhitespaceAlphabet = " \t\n\r\f\v";

}  // namespace sqlfuzz
