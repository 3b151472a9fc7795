#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace scwdr {

/// Fixed 12-significant-digit rendering used for every emitted number.
inline std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

/// The double nearest to format_number(value); JSON writers store these so
/// their shortest round-trip output carries at most 12 significant digits.
inline double round_to_output(double value) { return std::strtod(format_number(value).c_str(), nullptr); }

}  // namespace scwdr
