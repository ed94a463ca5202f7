#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace rvp {

/// Nine significant digits, the precision of every numeric output.
inline std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// Rounds to nine significant digits so serializers print at most that many.
inline double round9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

}  // namespace rvp
