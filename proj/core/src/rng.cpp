#include "sqlfuzz/rng.hpp"

namespace sqlfuzz {

std::uint64_t derive_seed(std::uint64_t root, std::string_view scope, std::uint64_t index) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t byte) {
        h ^= byte;
        h *= 0x100000001b3ull;
    };
    for (char c : scope) mix(static_cast<unsigned char>(c));
    for (int i = 0; i < 8; ++i) mix((index >> (8 * i)) & 0xff);
    for (int i = 0; i < 8; ++i) mix((root >> (8 * i)) & 0xff);
    return h;
}

}  // namespace sqlfuzz
