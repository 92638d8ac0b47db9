#include "sqlfuzz/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace sqlfuzz {

const char* token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::Keyword: return "Keyword";
        case TokenKind::Identifier: return "Identifier";
        case TokenKind::Number: return "Number";
        case TokenKind::String: return "String";
        case TokenKind::Operator: return "Operator";
        case TokenKind::Comparison: return "Comparison";
        case TokenKind::Punctuation: return "Punctuation";
        case TokenKind::Whitespace: return "Whitespace";
        case TokenKind::InlineComment: return "InlineComment";
        case TokenKind::LineComment: return "LineComment";
        case TokenKind::Unknown: return "Unknown";
    }
    return "?";
}

const std::vector<std::string>& keyword_table() {
    static const std::vector<std::string> kw = {
        "SELECT", "FROM", "WHERE", "UPDATE", "SET",   "DELETE", "INSERT",
        "INTO",   "VALUES", "LIMIT", "AND",  "OR",    "NOT",    "LIKE",
        "IN",     "UNION",  "ORDER", "BY",   "TRUE",  "FALSE",  "NULL",
    };
    return kw;
}

namespace {

bool is_ws_char(char c) {
    return kWhitespaceAlphabet.find(c) != std::string_view::npos;
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_hex_digit(char c) {
    return std::isxdigit(static_cast<unsigned char>(c));
}

bool is_punct_char(char c) {
    switch (c) {
        case '(': case ')': case ',': case ';': case '*': case '.':
            return true;
        default:
            return false;
    }
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return out;
}

}  // namespace

bool is_keyword(std::string_view word) {
    std::string up = to_upper(word);
    const auto& kw = keyword_table();
    return std::find(kw.begin(), kw.end(), up) != kw.end();
}

TokenStream lex(std::string_view payload) {
    std::vector<Token> tokens;
    const std::size_t n = payload.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = payload[i];
        std::size_t start = i;
        if (is_ws_char(c)) {
            while (i < n && is_ws_char(payload[i])) ++i;
            tokens.push_back({TokenKind::Whitespace, start, i});
        } else if (c == '/' && i + 1 < n && payload[i + 1] == '*') {
            i += 2;
            while (i < n && !(payload[i] == '*' && i + 1 < n && payload[i + 1] == '/')) ++i;
            if (i < n) i += 2;  // consume "*/"; otherwise ran to end of input
            tokens.push_back({TokenKind::InlineComment, start, i});
        } else if (c == '#' || (c == '-' && i + 1 < n && payload[i + 1] == '-')) {
            while (i < n && payload[i] != '\n') ++i;
            tokens.push_back({TokenKind::LineComment, start, i});
        } else if (c == '\'' || c == '"') {
            std::size_t close = payload.find(c, i + 1);
            if (close == std::string_view::npos) {
                // Lone quote: emit it alone and keep lexing, so keywords and
                // literals after an injected quote stay visible to mutations.
                tokens.push_back({TokenKind::Unknown, start, start + 1});
                i = start + 1;
            } else {
                tokens.push_back({TokenKind::String, start, close + 1});
                i = close + 1;
            }
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            if (c == '0' && i + 1 < n && (payload[i + 1] == 'x' || payload[i + 1] == 'X') &&
                i + 2 < n && is_hex_digit(payload[i + 2])) {
                i += 2;
                while (i < n && is_hex_digit(payload[i])) ++i;
            } else {
                while (i < n && std::isdigit(static_cast<unsigned char>(payload[i]))) ++i;
            }
            tokens.push_back({TokenKind::Number, start, i});
        } else if (is_ident_start(c)) {
            while (i < n && is_ident_char(payload[i])) ++i;
            std::string_view word = payload.substr(start, i - start);
            tokens.push_back({is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier,
                              start, i});
        } else if (c == '<' || c == '>' || c == '=' || c == '!') {
            if (i + 1 < n) {
                const char d = payload[i + 1];
                if ((c == '<' && (d == '=' || d == '>')) || (c == '>' && d == '=') ||
                    (c == '!' && d == '=')) {
                    tokens.push_back({TokenKind::Comparison, start, i + 2});
                    i += 2;
                    continue;
                }
            }
            if (c == '!') {
                tokens.push_back({TokenKind::Unknown, start, i + 1});
            } else {
                tokens.push_back({TokenKind::Comparison, start, i + 1});
            }
            ++i;
        } else if (is_punct_char(c)) {
            tokens.push_back({TokenKind::Punctuation, start, i + 1});
            ++i;
        } else if (c == '+' || c == '-' || c == '/' || c == '%' || c == '&' || c == '|' ||
                   c == '^' || c == '~') {
            tokens.push_back({TokenKind::Operator, start, i + 1});
            ++i;
        } else {
            tokens.push_back({TokenKind::Unknown, start, i + 1});
            ++i;
        }
    }
    return TokenStream(std::string(payload), std::move(tokens));
}

bool is_separator_position(const TokenStream& ts, std::size_t i) {
    if (i >= ts.size()) throw std::out_of_range("token index out of range");
    const TokenKind k = ts[i].kind;
    return k == TokenKind::Whitespace || k == TokenKind::InlineComment;
}

}  // namespace sqlfuzz
