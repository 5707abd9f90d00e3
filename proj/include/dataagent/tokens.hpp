#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace dataagent {

/// ceil(characters / 4). Characters are counted as bytes.
std::size_t estimate_tokens(std::string_view text);

/// Extension point for exact tokenizers.
using TokenEstimator = std::function<std::size_t(std::string_view)>;

}  // namespace dataagent
