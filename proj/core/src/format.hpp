#pragma once

#include <cstdio>
#include <string>

namespace ipwkit::detail {

// Shortest round-trip representation for machine-readable outputs.
inline std::string fmt_g(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

inline std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // "-0.00" reads as a sign where there is none.
  std::string out = buf;
  if (out[0] == '-' && out.find_first_not_of("-0.") == std::string::npos)
    out.erase(0, 1);
  return out;
}

}  // namespace ipwkit::detail
