#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bankdial {

// Canonical text normalization used everywhere text meets the model:
// lowercase, punctuation detached as its own token, whitespace collapsed.
std::vector<std::string> tokenize(std::string_view text);

// tokenize() then re-join with single spaces.
std::string normalize_text(std::string_view text);

}  // namespace bankdial
