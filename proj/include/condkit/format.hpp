#pragma once

#include <charconv>
#include <string>

namespace condkit {

/// Formats a double with 17 significant digits; parsing the result recovers
/// the identical binary value.
inline std::string format_significant17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace condkit
