#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "multcancel/core/errors.hpp"

namespace multcancel {

using MultiIndex = std::vector<int>;

inline int order(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

inline MultiIndex zero_index(int n) { return MultiIndex(static_cast<std::size_t>(n), 0); }

inline MultiIndex unit_index(int n, int c) {
  MultiIndex e = zero_index(n);
  e.at(static_cast<std::size_t>(c)) = 1;
  return e;
}

inline bool leq(const MultiIndex& b, const MultiIndex& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (b[i] > a[i]) return false;
  return true;
}

inline MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline MultiIndex subtract(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

// C(a, b) = prod_i C(a_i, b_i)
inline double binomial(const MultiIndex& a, const MultiIndex& b) {
  double r = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) r *= binomial(a[i], b[i]);
  return r;
}

inline double factorial(const MultiIndex& a) {
  double r = 1.0;
  for (int k : a)
    for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

inline double power(std::span<const double> x, const MultiIndex& a) {
  double r = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < a[i]; ++k) r *= x[i];
  return r;
}

// All multiindices of length n with |a| <= max_order, ordered by total order
// and then lexicographically (descending in the first component).
inline std::vector<MultiIndex> multiindices_up_to(int n, int max_order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_order; ++k) {
    MultiIndex a = zero_index(n);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
      if (pos == n - 1) {
        a[static_cast<std::size_t>(pos)] = remaining;
        out.push_back(a);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        a[static_cast<std::size_t>(pos)] = v;
        self(self, pos + 1, remaining - v);
      }
    };
    if (n == 0) {
      if (k == 0) out.push_back(a);
      continue;
    }
    rec(rec, 0, k);
  }
  return out;
}

inline std::vector<MultiIndex> multiindices_of_order(int n, int k) {
  std::vector<MultiIndex> out;
  for (auto& a : multiindices_up_to(n, k))
    if (order(a) == k) out.push_back(a);
  return out;
}

// Componentwise box {b : b <= a}, in lexicographic order.
inline std::vector<MultiIndex> box_below(const MultiIndex& a) {
  std::vector<MultiIndex> out;
  MultiIndex b = zero_index(static_cast<int>(a.size()));
  while (true) {
    out.push_back(b);
    std::size_t i = 0;
    for (; i < a.size(); ++i) {
      if (b[i] < a[i]) {
        ++b[i];
        break;
      }
      b[i] = 0;
    }
    if (i == a.size()) break;
  }
  return out;
}

inline std::string to_string(const MultiIndex& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(a[i]);
  }
  return s + ")";
}

inline MultiIndex parse_multiindex(const std::string& text, int n) {
  MultiIndex a;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    try {
      std::size_t used = 0;
      int v = std::stoi(cur, &used);
      if (used != cur.size() || v < 0) throw std::invalid_argument(cur);
      a.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("invalid multiindex component '" + cur + "' in '" + text + "'");
    }
    cur.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '(' || ch == ')') {
      flush();
    } else {
      cur.push_back(ch);
    }
  }
  flush();
  if (static_cast<int>(a.size()) != n)
    throw ConfigError("multiindex '" + text + "' must have " + std::to_string(n) + " components");
  return a;
}

}  // namespace multcancel
