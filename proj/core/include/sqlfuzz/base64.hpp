#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sqlfuzz {

std::string base64_encode(std::string_view data);

/// Strict decode; nullopt on bad characters or padding.
std::optional<std::string> base64_decode(std::string_view data);

}  // namespace sqlfuzz
