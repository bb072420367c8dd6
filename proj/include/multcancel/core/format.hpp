#pragma once

#include <cstdio>
#include <span>
#include <string>

namespace multcancel {

// Shortest round-trippable decimal text ("%.17g").
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_point(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + format_number(x[i]);
  return s + ")";
}

}  // namespace multcancel
