#pragma once

#include <charconv>
#include <string>

namespace isac {

/// Shortest decimal that round-trips to the same double.
inline std::string format_shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace isac
