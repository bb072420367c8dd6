#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "multcancel/symbols/symbol.hpp"

namespace multcancel {

using Params = std::map<std::string, std::string>;

namespace builtins_detail {

using expr::NodePtr;

inline NodePtr x(int n, int block, int comp) { return expr::variable(var_index(n, block, comp)); }

inline NodePtr norm_sq(int n, int block) {
  std::vector<NodePtr> t;
  for (int c = 0; c < n; ++c) t.push_back(expr::pow(x(n, block, c), 2));
  return expr::add(std::move(t));
}

inline NodePtr total_norm_sq(int m, int n) {
  std::vector<NodePtr> t;
  for (int j = 0; j < m; ++j) t.push_back(norm_sq(n, j));
  return expr::add(std::move(t));
}

// xi_1 eta_2 - xi_2 eta_1 for two blocks in R^2
inline NodePtr det2() { return expr::sub(expr::mul(x(2, 0, 0), x(2, 1, 1)), expr::mul(x(2, 0, 1), x(2, 1, 0))); }

inline int int_param(const Params& p, const std::string& key, int fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "' must be an integer, got '" + it->second + "'");
  }
}

inline std::vector<int> int_list(const std::string& text, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("parameter '" + key + "' has a malformed entry '" + item + "'");
    }
  }
  return out;
}

inline void check_known(const Params& p, std::initializer_list<const char*> allowed, const std::string& name) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("builtin '" + name + "' does not take parameter '" + k + "'");
  }
}

inline std::string suffix(const Params& p) {
  if (p.empty()) return {};
  std::string s = "(";
  bool first = true;
  for (const auto& [k, v] : p) {
    s += (first ? "" : "; ") + k + "=" + v;
    first = false;
  }
  return s + ")";
}

}  // namespace builtins_detail

inline std::vector<std::string> builtin_names() {
  return {"one",  "sigma0",  "sigma1",    "sigma2",     "sigma3",    "sigma_hessian_general",
          "riesz_product", "sum_sq_1d", "smooth_test", "mixed_demo"};
}

SymbolExpr builtin(const std::string& name, const Params& params = {});

namespace builtins_detail {

// terms: "coef:f_1,...,f_m;coef:...". f_j = 0 is the identity factor and
// f_j = c >= 1 the Riesz factor xi_{j,c}/|xi_j|.
inline SymbolExpr riesz_product(const Params& p) {
  check_known(p, {"n", "terms"}, "riesz_product");
  const int n = int_param(p, "n", 1);
  if (n < 1 || n > 3) throw ConfigError("riesz_product: n must be in 1..3");
  std::string spec = p.count("terms") ? p.at("terms") : "1:0,0;1:1,1";
  std::vector<NodePtr> terms;
  int m = -1;
  std::stringstream ss(spec);
  std::string term;
  while (std::getline(ss, term, ';')) {
    auto colon = term.find(':');
    if (colon == std::string::npos) throw ConfigError("riesz_product: term '" + term + "' lacks 'coef:'");
    double coef = 0.0;
    try {
      coef = std::stod(term.substr(0, colon));
    } catch (const std::exception&) {
      throw ConfigError("riesz_product: bad coefficient in '" + term + "'");
    }
    auto factors = int_list(term.substr(colon + 1), "terms");
    if (m < 0) m = static_cast<int>(factors.size());
    if (static_cast<int>(factors.size()) != m || m < 1)
      throw ConfigError("riesz_product: every term needs the same number of factors");
    std::vector<NodePtr> prod{expr::constant(coef)};
    for (int j = 0; j < m; ++j) {
      int c = factors[static_cast<std::size_t>(j)];
      if (c < 0 || c > n) throw ConfigError("riesz_product: factor component out of range in '" + term + "'");
      if (c == 0) continue;
      prod.push_back(expr::div(x(n, j, c - 1), expr::sqrt(norm_sq(n, j))));
    }
    terms.push_back(expr::mul(std::move(prod)));
  }
  if (terms.empty()) throw ConfigError("riesz_product: no terms");
  return SymbolExpr(m, n, expr::add(std::move(terms)), "riesz_product" + suffix(p));
}

inline SymbolExpr hessian_general(const Params& p) {
  check_known(p, {"n_js"}, "sigma_hessian_general");
  auto njs = int_list(p.count("n_js") ? p.at("n_js") : "1,1", "n_js");
  if (njs.empty()) throw ConfigError("sigma_hessian_general: n_js must be nonempty");
  std::vector<NodePtr> num;
  int total = 0;
  for (int k : njs) {
    if (k < 1) throw ConfigError("sigma_hessian_general: exponents n_j must be positive integers");
    total += k;
    num.push_back(expr::sub(expr::mul(expr::pow(x(2, 0, 0), k), expr::pow(x(2, 1, 1), k)),
                            expr::mul(expr::pow(x(2, 0, 1), k), expr::pow(x(2, 1, 0), k))));
  }
  auto den = expr::pow(total_norm_sq(2, 2), total);
  return SymbolExpr(2, 2, expr::div(expr::mul(std::move(num)), den), "sigma_hessian_general" + suffix(p));
}

}  // namespace builtins_detail

inline SymbolExpr builtin(const std::string& name, const Params& params) {
  using namespace builtins_detail;
  if (name == "one") {
    check_known(params, {"m", "n"}, name);
    int m = int_param(params, "m", 2), n = int_param(params, "n", 1);
    if (m < 1 || n < 1 || n > 3) throw ConfigError("one: need m >= 1 and 1 <= n <= 3");
    return SymbolExpr(m, n, expr::one(), "one" + suffix(params));
  }
  if (name == "sigma0") {
    check_known(params, {}, name);
    return SymbolExpr(2, 2, expr::div(det2(), total_norm_sq(2, 2)), "sigma0");
  }
  if (name == "sigma1") {
    check_known(params, {}, name);
    auto den = expr::mul(expr::sqrt(norm_sq(2, 0)), expr::sqrt(norm_sq(2, 1)));
    return SymbolExpr(2, 2, expr::div(det2(), den), "sigma1");
  }
  if (name == "sigma2") {
    check_known(params, {}, name);
    return SymbolExpr(2, 2, expr::div(expr::pow(det2(), 2), expr::pow(total_norm_sq(2, 2), 2)), "sigma2");
  }
  if (name == "sigma3") {
    check_known(params, {}, name);
    auto den = expr::mul(norm_sq(2, 0), norm_sq(2, 1));
    return SymbolExpr(2, 2, expr::div(expr::pow(det2(), 2), den), "sigma3");
  }
  if (name == "sigma_hessian_general") return hessian_general(params);
  if (name == "riesz_product") return riesz_product(params);
  if (name == "sum_sq_1d") {
    check_known(params, {}, name);
    auto num = expr::pow(expr::add(x(1, 0, 0), x(1, 1, 0)), 2);
    return SymbolExpr(2, 1, expr::div(num, total_norm_sq(2, 1)), "sum_sq_1d");
  }
  if (name == "smooth_test") {
    check_known(params, {"m", "n"}, name);
    int m = int_param(params, "m", 2), n = int_param(params, "n", 1);
    if (m < 1 || n < 1 || n > 3) throw ConfigError("smooth_test: need m >= 1 and 1 <= n <= 3");
    return SymbolExpr(m, n, expr::div(expr::one(), expr::add(expr::one(), total_norm_sq(m, n))),
                      "smooth_test" + suffix(params));
  }
  if (name == "mixed_demo") {
    // Coifman-Meyer in (xi_1, xi_2) times a Riesz factor in xi_3, plus a
    // product-form term across all three blocks.
    check_known(params, {}, name);
    auto cm = embed(builtin("sum_sq_1d"), {0, 1}, 3);
    auto riesz3 = embed(builtin("riesz_product", {{"terms", "1:1"}}), {2}, 3);
    auto prod = builtin("riesz_product", {{"terms", "0.5:1,0,1"}});
    return sum(product(cm, riesz3), prod).renamed("mixed_demo");
  }
  throw ConfigError("unknown builtin symbol '" + name + "'");
}

}  // namespace multcancel
