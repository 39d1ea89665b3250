#pragma once

#include <charconv>
#include <string>

namespace wavemc {

// Shortest decimal form that round-trips to the same double. All text
// output (CSV cells, JSON numbers, expression printing) goes through
// this, which is what makes byte-identical output files meaningful.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace wavemc
