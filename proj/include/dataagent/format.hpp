#pragma once

#include <string>
#include <string_view>

namespace dataagent {

/// Shortest decimal text that round-trips to the same double ("9", "30.7625").
std::string format_number(double value);

/// Compact scientific notation for reasons and diagnostics ("5e-6", "2.1e-6").
std::string format_sci(double value);

std::string_view trim(std::string_view s);

/// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace dataagent
