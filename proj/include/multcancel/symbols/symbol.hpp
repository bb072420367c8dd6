#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multcancel/core/errors.hpp"
#include "multcancel/core/multiindex.hpp"
#include "multcancel/symbols/expr.hpp"
#include "multcancel/symbols/tape.hpp"

namespace multcancel {

using expr::cplx;

inline constexpr int kDefaultDiffCap = 8;

// A multiplier sigma(xi_1, ..., xi_m) with xi_j in R^n. Variables are
// flattened block-major: index j*n + c. Immutable; copies share the
// compiled tape.
class SymbolExpr {
 public:
  SymbolExpr(int m, int n, expr::NodePtr root, std::string name = {})
      : m_(m), n_(n), root_(std::move(root)), name_(std::move(name)) {
    if (m < 0 || n < 1) throw ConfigError("symbol arity must have m >= 0 and n >= 1");
    tape_ = std::make_shared<const expr::Tape>(root_, m_ * n_, n_);
    if (name_.empty()) name_ = to_string();
  }

  int m() const { return m_; }
  int n() const { return n_; }
  int num_vars() const { return m_ * n_; }
  const expr::NodePtr& root() const { return root_; }
  const std::string& name() const { return name_; }
  const expr::Tape& tape() const { return *tape_; }
  bool is_real() const { return tape_->is_real(); }
  bool is_zero() const { return expr::is_zero(root_); }
  std::string to_string() const { return expr::to_string(root_, n_); }

  SymbolExpr renamed(std::string name) const { return SymbolExpr(m_, n_, root_, std::move(name)); }

  cplx evaluate(std::span<const double> x) const {
    check_point(x);
    cplx out;
    int guard = -1;
    auto status = run(x, out, &guard);
    if (status == expr::Tape::Status::Singular)
      throw DomainError("symbol '" + name_ + "' is singular at " + format(x) + ": '" +
                        tape_->guards()[static_cast<std::size_t>(guard)].text + "' vanishes");
    if (status == expr::Tape::Status::NegativeSqrt)
      throw DomainError("symbol '" + name_ + "' takes the square root of a negative value at " + format(x));
    return out;
  }

  std::optional<cplx> try_evaluate(std::span<const double> x) const {
    check_point(x);
    cplx out;
    auto status = run(x, out, nullptr);
    if (status == expr::Tape::Status::Singular) return std::nullopt;
    if (status == expr::Tape::Status::NegativeSqrt)
      throw DomainError("symbol '" + name_ + "' takes the square root of a negative value at " + format(x));
    return out;
  }

  bool singular(std::span<const double> x) const {
    check_point(x);
    cplx out;
    return run(x, out, nullptr) == expr::Tape::Status::Singular;
  }

  // True when x lies within roughly eps of the singular set: some guard
  // vanishes, or is smaller than its own variation across the eps-ball
  // probed along the coordinate axes (a first-order distance estimate).
  bool near_singular(std::span<const double> x, double eps) const {
    check_point(x);
    if (tape_->guards().empty()) return false;
    std::vector<cplx> regs, g0, g1;
    tape_->guard_values<cplx>(x, regs, g0);
    for (const auto& v : g0)
      if (v == cplx(0.0)) return true;
    if (eps <= 0.0) return false;
    std::vector<double> y(x.begin(), x.end());
    std::vector<double> variation(g0.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      for (double s : {eps, -eps}) {
        y[i] = x[i] + s;
        tape_->guard_values<cplx>(y, regs, g1);
        for (std::size_t g = 0; g < g0.size(); ++g) {
          if (g1[g] == cplx(0.0)) return true;
          if (g1[g].imag() == 0.0 && g0[g].imag() == 0.0 && (g1[g].real() > 0.0) != (g0[g].real() > 0.0))
            return true;
          variation[g] = std::max(variation[g], std::abs(g1[g] - g0[g]));
        }
      }
      y[i] = x[i];
    }
    for (std::size_t g = 0; g < g0.size(); ++g)
      if (std::abs(g0[g]) <= variation[g]) return true;
    return false;
  }

 private:
  void check_point(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_vars())
      throw ConfigError("symbol '" + name_ + "' expects " + std::to_string(num_vars()) + " coordinates, got " +
                        std::to_string(x.size()));
  }

  expr::Tape::Status run(std::span<const double> x, cplx& out, int* guard) const {
    if (tape_->is_real()) {
      std::vector<double> regs;
      double v = 0.0;
      auto s = tape_->eval<double>(x, v, regs, guard);
      out = v;
      return s;
    }
    std::vector<cplx> regs;
    return tape_->eval<cplx>(x, out, regs, guard);
  }

  static std::string format(std::span<const double> x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_number(x[i]);
    return s + ")";
  }

  int m_;
  int n_;
  expr::NodePtr root_;
  std::string name_;
  std::shared_ptr<const expr::Tape> tape_;
};

inline int var_index(int n, int block, int component) { return block * n + component; }

// d^alpha with respect to block `block` (0-based), |alpha| <= cap.
inline SymbolExpr diff(const SymbolExpr& s, int block, const MultiIndex& alpha, int cap = kDefaultDiffCap) {
  if (block < 0 || block >= s.m())
    throw ConfigError("block " + std::to_string(block + 1) + " out of range for symbol '" + s.name() + "'");
  if (static_cast<int>(alpha.size()) != s.n())
    throw ConfigError("multiindex " + to_string(alpha) + " does not match block dimension " + std::to_string(s.n()));
  if (order(alpha) > cap)
    throw ConfigError("derivative order " + std::to_string(order(alpha)) + " exceeds the differentiation cap " +
                      std::to_string(cap));
  expr::NodePtr e = s.root();
  for (int c = 0; c < s.n(); ++c)
    for (int k = 0; k < alpha[static_cast<std::size_t>(c)]; ++k) e = expr::differentiate(e, var_index(s.n(), block, c));
  if (order(alpha) == 0) return s;
  return SymbolExpr(s.m(), s.n(), e, "d_" + std::to_string(block + 1) + "^" + to_string(alpha) + " " + s.name());
}

// Mixed derivative over all blocks; alpha has m*n components.
inline SymbolExpr diff_all(const SymbolExpr& s, const MultiIndex& alpha, int cap = kDefaultDiffCap) {
  if (static_cast<int>(alpha.size()) != s.num_vars())
    throw ConfigError("multiindex " + to_string(alpha) + " must have m*n components");
  if (order(alpha) > cap)
    throw ConfigError("derivative order " + std::to_string(order(alpha)) + " exceeds the differentiation cap " +
                      std::to_string(cap));
  if (order(alpha) == 0) return s;
  expr::NodePtr e = s.root();
  for (int v = 0; v < s.num_vars(); ++v)
    for (int k = 0; k < alpha[static_cast<std::size_t>(v)]; ++k) e = expr::differentiate(e, v);
  return SymbolExpr(s.m(), s.n(), e, "d^" + to_string(alpha) + " " + s.name());
}

// Substitutes xi_m = -(xi_1 + ... + xi_{m-1}); the result has m-1 blocks.
inline SymbolExpr restrict_diag(const SymbolExpr& s) {
  if (s.m() < 1) throw ConfigError("restrict_diag needs at least one block");
  const int n = s.n();
  const int m = s.m();
  std::vector<expr::NodePtr> repl(static_cast<std::size_t>(m * n));
  for (int c = 0; c < n; ++c) {
    std::vector<expr::NodePtr> terms;
    for (int j = 0; j < m - 1; ++j) terms.push_back(expr::variable(var_index(n, j, c)));
    repl[static_cast<std::size_t>(var_index(n, m - 1, c))] = expr::neg(expr::add(std::move(terms)));
  }
  return SymbolExpr(m - 1, n, expr::substitute(s.root(), repl), "diag " + s.name());
}

// Places s (arity m_s) into an m_total-block symbol: block j of s becomes
// block targets[j].
inline SymbolExpr embed(const SymbolExpr& s, const std::vector<int>& targets, int m_total) {
  if (static_cast<int>(targets.size()) != s.m()) throw ConfigError("embed: one target block per symbol block");
  const int n = s.n();
  std::vector<expr::NodePtr> repl(static_cast<std::size_t>(s.num_vars()));
  for (int j = 0; j < s.m(); ++j) {
    int t = targets[static_cast<std::size_t>(j)];
    if (t < 0 || t >= m_total) throw ConfigError("embed: target block out of range");
    for (int c = 0; c < n; ++c)
      repl[static_cast<std::size_t>(var_index(n, j, c))] = expr::variable(var_index(n, t, c));
  }
  // Substitute through placeholders so that overlapping index ranges do not
  // collide: first shift all variables out of the way.
  const int shift = m_total * n + s.num_vars();
  std::vector<expr::NodePtr> to_temp(static_cast<std::size_t>(s.num_vars()));
  for (int v = 0; v < s.num_vars(); ++v) to_temp[static_cast<std::size_t>(v)] = expr::variable(shift + v);
  std::vector<expr::NodePtr> from_temp(static_cast<std::size_t>(shift + s.num_vars()));
  for (int v = 0; v < s.num_vars(); ++v) from_temp[static_cast<std::size_t>(shift + v)] = repl[static_cast<std::size_t>(v)];
  auto e = expr::substitute(expr::substitute(s.root(), to_temp), from_temp);
  return SymbolExpr(m_total, n, e, "embed " + s.name());
}

inline void check_same_arity(const SymbolExpr& a, const SymbolExpr& b) {
  if (a.m() != b.m() || a.n() != b.n())
    throw ConfigError("symbols '" + a.name() + "' and '" + b.name() + "' have different arity");
}

inline SymbolExpr sum(const SymbolExpr& a, const SymbolExpr& b) {
  check_same_arity(a, b);
  return SymbolExpr(a.m(), a.n(), expr::add(a.root(), b.root()), "(" + a.name() + ") + (" + b.name() + ")");
}

inline SymbolExpr product(const SymbolExpr& a, const SymbolExpr& b) {
  check_same_arity(a, b);
  return SymbolExpr(a.m(), a.n(), expr::mul(a.root(), b.root()), "(" + a.name() + ") * (" + b.name() + ")");
}

}  // namespace multcancel
