#pragma once

// Internal helpers shared by the model implementations: bit-exact double
// round-tripping (hexfloat text) and the model file header.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sqlfuzz::detail {

inline constexpr const char* kModelMagic = "sqlfuzz-model";
inline constexpr int kModelFormatVersion = 1;

inline void write_double(std::ostream& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    out << buf;
}

inline double read_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("truncated model file: missing number");
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error("bad number in model file: " + tok);
    return v;
}

inline void expect_tag(std::istream& in, const std::string& expected) {
    std::string tok;
    if (!(in >> tok) || tok != expected)
        throw std::runtime_error("bad model file: expected \"" + expected + "\", got \"" +
                                 tok + "\"");
}

}  // namespace sqlfuzz::detail
