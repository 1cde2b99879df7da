#pragma once

#include <charconv>
#include <string>

namespace sls {

// Shortest round-trip decimal formatting; the single formatter used for all
// CSV output so reruns are byte-identical.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace sls
