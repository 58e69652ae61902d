#pragma once

#include <string>
#include <string_view>

namespace genprof {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace genprof
