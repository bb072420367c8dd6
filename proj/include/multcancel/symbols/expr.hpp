#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "multcancel/core/errors.hpp"
#include "multcancel/core/format.hpp"

namespace multcancel::expr {

using cplx = std::complex<double>;

enum class Op { Const, Var, Add, Mul, Div, Pow, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// Immutable expression node. Children are shared, so derivatives reuse the
// subtrees of the expression they came from.
struct Node {
  Op op = Op::Const;
  cplx value{};           // Const
  int var = -1;           // Var: flat index j*n + c
  int exponent = 0;       // Pow
  std::vector<NodePtr> args;
};

inline NodePtr make_node(Op op, std::vector<NodePtr> args, cplx value = {}, int var = -1, int exponent = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  n->value = value;
  n->var = var;
  n->exponent = exponent;
  return n;
}

inline bool is_const(const NodePtr& n) { return n->op == Op::Const; }
inline bool is_const(const NodePtr& n, cplx v) { return n->op == Op::Const && n->value == v; }
inline bool is_zero(const NodePtr& n) { return is_const(n, 0.0); }
inline bool is_one(const NodePtr& n) { return is_const(n, 1.0); }

inline NodePtr constant(cplx v) { return make_node(Op::Const, {}, v); }
inline NodePtr zero() {
  static const NodePtr z = constant(0.0);
  return z;
}
inline NodePtr one() {
  static const NodePtr o = constant(1.0);
  return o;
}
inline NodePtr variable(int index) {
  if (index < 0) throw ConfigError("variable index must be nonnegative");
  return make_node(Op::Var, {}, {}, index);
}

inline NodePtr add(std::vector<NodePtr> terms) {
  std::vector<NodePtr> kept;
  cplx c = 0.0;
  for (auto& t : terms) {
    if (is_const(t))
      c += t->value;
    else
      kept.push_back(std::move(t));
  }
  if (c != cplx(0.0)) kept.push_back(constant(c));
  if (kept.empty()) return zero();
  if (kept.size() == 1) return kept.front();
  return make_node(Op::Add, std::move(kept));
}

inline NodePtr add(NodePtr a, NodePtr b) { return add(std::vector<NodePtr>{std::move(a), std::move(b)}); }

inline NodePtr mul(std::vector<NodePtr> factors) {
  std::vector<NodePtr> kept;
  cplx c = 1.0;
  for (auto& f : factors) {
    if (is_const(f))
      c *= f->value;
    else
      kept.push_back(std::move(f));
  }
  if (c == cplx(0.0)) return zero();
  if (c != cplx(1.0)) kept.insert(kept.begin(), constant(c));
  if (kept.empty()) return one();
  if (kept.size() == 1) return kept.front();
  return make_node(Op::Mul, std::move(kept));
}

inline NodePtr mul(NodePtr a, NodePtr b) { return mul(std::vector<NodePtr>{std::move(a), std::move(b)}); }

inline NodePtr neg(NodePtr a) { return mul(constant(-1.0), std::move(a)); }
inline NodePtr sub(NodePtr a, NodePtr b) { return add(std::move(a), neg(std::move(b))); }

inline NodePtr div(NodePtr a, NodePtr b) {
  if (is_zero(b)) throw DomainError("division by the constant zero");
  if (is_zero(a)) return zero();
  if (is_const(b)) return mul(std::move(a), constant(1.0 / b->value));
  return make_node(Op::Div, {std::move(a), std::move(b)});
}

inline NodePtr pow(NodePtr a, int k) {
  if (k == 0) return one();
  if (k == 1) return a;
  if (is_const(a)) {
    if (a->value == cplx(0.0) && k < 0) throw DomainError("negative power of the constant zero");
    cplx r = 1.0;
    cplx base = k > 0 ? a->value : 1.0 / a->value;
    for (int i = 0; i < std::abs(k); ++i) r *= base;
    return constant(r);
  }
  if (a->op == Op::Pow) {
    // (b^j)^k = b^(jk) is exact for integer exponents.
    return pow(a->args[0], a->exponent * k);
  }
  return make_node(Op::Pow, {std::move(a)}, {}, -1, k);
}

inline NodePtr sqrt(NodePtr a) {
  if (is_const(a) && a->value.imag() == 0.0 && a->value.real() >= 0.0)
    return constant(std::sqrt(a->value.real()));
  return make_node(Op::Sqrt, {std::move(a)});
}

using Memo = std::unordered_map<const Node*, NodePtr>;

inline NodePtr differentiate(const NodePtr& e, int var, Memo& memo) {
  if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
  NodePtr d;
  switch (e->op) {
    case Op::Const:
      d = zero();
      break;
    case Op::Var:
      d = e->var == var ? one() : zero();
      break;
    case Op::Add: {
      std::vector<NodePtr> terms;
      for (const auto& a : e->args) terms.push_back(differentiate(a, var, memo));
      d = add(std::move(terms));
      break;
    }
    case Op::Mul: {
      std::vector<NodePtr> terms;
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        NodePtr di = differentiate(e->args[i], var, memo);
        if (is_zero(di)) continue;
        std::vector<NodePtr> f = e->args;
        f[i] = di;
        terms.push_back(mul(std::move(f)));
      }
      d = add(std::move(terms));
      break;
    }
    case Op::Div: {
      const NodePtr& a = e->args[0];
      const NodePtr& b = e->args[1];
      NodePtr da = differentiate(a, var, memo);
      NodePtr db = differentiate(b, var, memo);
      // (a/b)' = a'/b - (a/b) b'/b, reusing this node for a/b
      NodePtr first = is_zero(da) ? zero() : div(da, b);
      NodePtr second = is_zero(db) ? zero() : div(mul(e, db), b);
      d = sub(first, second);
      break;
    }
    case Op::Pow: {
      const NodePtr& a = e->args[0];
      NodePtr da = differentiate(a, var, memo);
      d = is_zero(da) ? zero() : mul({constant(static_cast<double>(e->exponent)), pow(a, e->exponent - 1), da});
      break;
    }
    case Op::Sqrt: {
      NodePtr da = differentiate(e->args[0], var, memo);
      d = is_zero(da) ? zero() : div(da, mul(constant(2.0), e));
      break;
    }
  }
  memo.emplace(e.get(), d);
  return d;
}

inline NodePtr differentiate(const NodePtr& e, int var) {
  Memo memo;
  return differentiate(e, var, memo);
}

// Replaces Var(v) by replacement[v] wherever that entry is non-null. All
// replacements happen simultaneously.
inline NodePtr substitute(const NodePtr& e, const std::vector<NodePtr>& replacement, Memo& memo) {
  if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
  NodePtr r;
  switch (e->op) {
    case Op::Const:
      r = e;
      break;
    case Op::Var:
      r = (e->var < static_cast<int>(replacement.size()) && replacement[static_cast<std::size_t>(e->var)])
              ? replacement[static_cast<std::size_t>(e->var)]
              : e;
      break;
    case Op::Add:
    case Op::Mul: {
      std::vector<NodePtr> args;
      for (const auto& a : e->args) args.push_back(substitute(a, replacement, memo));
      r = e->op == Op::Add ? add(std::move(args)) : mul(std::move(args));
      break;
    }
    case Op::Div:
      r = div(substitute(e->args[0], replacement, memo), substitute(e->args[1], replacement, memo));
      break;
    case Op::Pow:
      r = pow(substitute(e->args[0], replacement, memo), e->exponent);
      break;
    case Op::Sqrt:
      r = sqrt(substitute(e->args[0], replacement, memo));
      break;
  }
  memo.emplace(e.get(), r);
  return r;
}

inline NodePtr substitute(const NodePtr& e, const std::vector<NodePtr>& replacement) {
  Memo memo;
  return substitute(e, replacement, memo);
}

inline std::string format_const(cplx v) {
  if (v.imag() == 0.0) {
    std::string s = format_number(v.real());
    return v.real() < 0.0 ? "(" + s + ")" : s;
  }
  return "(" + format_number(v.real()) + " + " + format_number(v.imag()) + "*I)";
}

// Infix text in the parser's grammar; variables print as x[j][c], 1-based.
inline std::string to_string(const NodePtr& e, int n) {
  auto child = [&](const NodePtr& a) {
    std::string s = to_string(a, n);
    if (a->op == Op::Const || a->op == Op::Var || a->op == Op::Sqrt) return s;
    return "(" + s + ")";
  };
  switch (e->op) {
    case Op::Const:
      return format_const(e->value);
    case Op::Var:
      return "x[" + std::to_string(e->var / n + 1) + "][" + std::to_string(e->var % n + 1) + "]";
    case Op::Add: {
      std::string s;
      for (std::size_t i = 0; i < e->args.size(); ++i) s += (i ? " + " : "") + child(e->args[i]);
      return s;
    }
    case Op::Mul: {
      std::string s;
      for (std::size_t i = 0; i < e->args.size(); ++i) s += (i ? "*" : "") + child(e->args[i]);
      return s;
    }
    case Op::Div:
      return child(e->args[0]) + "/" + child(e->args[1]);
    case Op::Pow:
      return child(e->args[0]) + "^" + (e->exponent < 0 ? "(" + std::to_string(e->exponent) + ")"
                                                           : std::to_string(e->exponent));
    case Op::Sqrt:
      return "sqrt(" + to_string(e->args[0], n) + ")";
  }
  return {};
}

}  // namespace multcancel::expr
