#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "multcancel/symbols/expr.hpp"

namespace multcancel::expr {

// Straight-line program for an expression DAG. Structurally identical
// subexpressions share one register, which keeps high-order derivatives
// cheap to evaluate.
class Tape {
 public:
  struct Instr {
    Op op;
    int a = -1;
    int b = -1;
    int exponent = 0;
    int var = -1;
    cplx value{};
  };

  struct Guard {
    int reg;            // register whose vanishing makes the point singular
    std::string text;   // the sub-expression, for error messages
  };

  enum class Status { Ok, Singular, NegativeSqrt };

  Tape() = default;

  Tape(const NodePtr& root, int num_vars, int block_dim) : num_vars_(num_vars) {
    std::unordered_map<const Node*, int> memo;
    std::map<std::tuple<int, int, int, int, int, double, double>, int> structural;
    std::map<int, std::string> guard_text;
    auto emit = [&](Instr ins) {
      auto key = std::make_tuple(static_cast<int>(ins.op), ins.a, ins.b, ins.exponent, ins.var, ins.value.real(),
                                 ins.value.imag());
      if (auto it = structural.find(key); it != structural.end()) return it->second;
      code_.push_back(ins);
      int reg = static_cast<int>(code_.size()) - 1;
      structural.emplace(key, reg);
      return reg;
    };
    auto visit = [&](auto&& self, const NodePtr& e) -> int {
      if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
      int reg = -1;
      switch (e->op) {
        case Op::Const:
          if (e->value.imag() != 0.0) real_ = false;
          reg = emit({Op::Const, -1, -1, 0, -1, e->value});
          break;
        case Op::Var:
          if (e->var >= num_vars_)
            throw ConfigError("expression uses variable " + to_string(e, block_dim) + " outside the symbol arity");
          reg = emit({Op::Var, -1, -1, 0, e->var, {}});
          break;
        case Op::Add:
        case Op::Mul: {
          reg = self(self, e->args[0]);
          for (std::size_t i = 1; i < e->args.size(); ++i) {
            int r = self(self, e->args[i]);
            int lo = std::min(reg, r), hi = std::max(reg, r);  // commutative: canonical order
            reg = emit({e->op, lo, hi, 0, -1, {}});
          }
          break;
        }
        case Op::Div: {
          int a = self(self, e->args[0]);
          int b = self(self, e->args[1]);
          guard_text.emplace(b, to_string(e->args[1], block_dim));
          reg = emit({Op::Div, a, b, 0, -1, {}});
          break;
        }
        case Op::Pow: {
          int a = self(self, e->args[0]);
          if (e->exponent < 0) guard_text.emplace(a, to_string(e->args[0], block_dim));
          reg = emit({Op::Pow, a, -1, e->exponent, -1, {}});
          break;
        }
        case Op::Sqrt: {
          int a = self(self, e->args[0]);
          guard_text.emplace(a, to_string(e->args[0], block_dim));
          reg = emit({Op::Sqrt, a, -1, 0, -1, {}});
          break;
        }
      }
      memo.emplace(e.get(), reg);
      return reg;
    };
    result_ = visit(visit, root);
    for (auto& [reg, text] : guard_text) guards_.push_back({reg, text});
    for (const auto& ins : code_)
      if (ins.op == Op::Sqrt) sqrt_regs_.push_back(ins.a);
  }

  bool is_real() const { return real_; }
  int num_vars() const { return num_vars_; }
  std::size_t size() const { return code_.size(); }
  const std::vector<Guard>& guards() const { return guards_; }

  // Evaluates at x; on a singular point returns Singular and sets
  // failed_guard to the index of the first vanishing guard.
  template <class T>
  Status eval(std::span<const double> x, T& out, std::vector<T>& regs, int* failed_guard = nullptr) const {
    regs.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) regs[i] = step<T>(code_[i], regs, x);
    for (std::size_t g = 0; g < guards_.size(); ++g) {
      if (regs[static_cast<std::size_t>(guards_[g].reg)] == T(0)) {
        if (failed_guard) *failed_guard = static_cast<int>(g);
        return Status::Singular;
      }
    }
    for (int r : sqrt_regs_)
      if (negative(regs[static_cast<std::size_t>(r)])) return Status::NegativeSqrt;
    out = regs[static_cast<std::size_t>(result_)];
    return Status::Ok;
  }

  // Guard register values at x (no singularity check).
  template <class T>
  void guard_values(std::span<const double> x, std::vector<T>& regs, std::vector<T>& out) const {
    regs.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) regs[i] = step<T>(code_[i], regs, x);
    out.resize(guards_.size());
    for (std::size_t g = 0; g < guards_.size(); ++g) out[g] = regs[static_cast<std::size_t>(guards_[g].reg)];
  }

  // Evaluates count points given as per-variable arrays; stride 0 broadcasts
  // a single value. singular[i] is set where a guard vanishes; the returned
  // flag reports a negative square-root argument anywhere in the batch.
  template <class T>
  bool eval_batch(const std::vector<const double*>& vars, const std::vector<std::size_t>& strides, std::size_t count,
                  T* out, std::uint8_t* singular, std::vector<T>& work) const {
    const std::size_t nreg = code_.size();
    work.resize(nreg * count);
    for (std::size_t i = 0; i < nreg; ++i) {
      const Instr& ins = code_[i];
      T* r = work.data() + i * count;
      const T* a = ins.a >= 0 ? work.data() + static_cast<std::size_t>(ins.a) * count : nullptr;
      const T* b = ins.b >= 0 ? work.data() + static_cast<std::size_t>(ins.b) * count : nullptr;
      switch (ins.op) {
        case Op::Const: {
          const T v = cast<T>(ins.value);
          for (std::size_t p = 0; p < count; ++p) r[p] = v;
          break;
        }
        case Op::Var: {
          const double* src = vars[static_cast<std::size_t>(ins.var)];
          const std::size_t st = strides[static_cast<std::size_t>(ins.var)];
          for (std::size_t p = 0; p < count; ++p) r[p] = T(src[p * st]);
          break;
        }
        case Op::Add:
          for (std::size_t p = 0; p < count; ++p) r[p] = a[p] + b[p];
          break;
        case Op::Mul:
          for (std::size_t p = 0; p < count; ++p) r[p] = a[p] * b[p];
          break;
        case Op::Div:
          for (std::size_t p = 0; p < count; ++p) r[p] = a[p] / b[p];
          break;
        case Op::Pow:
          for (std::size_t p = 0; p < count; ++p) r[p] = ipow(a[p], ins.exponent);
          break;
        case Op::Sqrt:
          for (std::size_t p = 0; p < count; ++p) r[p] = sqrt_value(a[p]);
          break;
      }
    }
    for (std::size_t p = 0; p < count; ++p) singular[p] = 0;
    for (const auto& g : guards_) {
      const T* v = work.data() + static_cast<std::size_t>(g.reg) * count;
      for (std::size_t p = 0; p < count; ++p)
        if (v[p] == T(0)) singular[p] = 1;
    }
    bool negative_sqrt = false;
    for (int reg : sqrt_regs_) {
      const T* v = work.data() + static_cast<std::size_t>(reg) * count;
      for (std::size_t p = 0; p < count; ++p)
        if (!singular[p] && negative(v[p])) negative_sqrt = true;
    }
    const T* res = work.data() + static_cast<std::size_t>(result_) * count;
    for (std::size_t p = 0; p < count; ++p) out[p] = res[p];
    return !negative_sqrt;
  }

 private:
  template <class T>
  static T cast(cplx v) {
    if constexpr (std::is_same_v<T, double>)
      return v.real();
    else
      return v;
  }

  template <class T>
  static T ipow(T base, int k) {
    T r = T(1);
    T b = k >= 0 ? base : T(1) / base;
    for (int e = std::abs(k); e > 0; e >>= 1) {
      if (e & 1) r *= b;
      b *= b;
    }
    return r;
  }

  template <class T>
  static T sqrt_value(T v) {
    if constexpr (std::is_same_v<T, double>)
      return std::sqrt(std::max(v, 0.0));
    else
      return T(std::sqrt(std::max(v.real(), 0.0)), 0.0);
  }

  template <class T>
  static bool negative(T v) {
    if constexpr (std::is_same_v<T, double>)
      return v < 0.0;
    else
      return v.real() < 0.0 || v.imag() != 0.0;
  }

  template <class T>
  T step(const Instr& ins, const std::vector<T>& regs, std::span<const double> x) const {
    auto at = [&](int i) { return regs[static_cast<std::size_t>(i)]; };
    switch (ins.op) {
      case Op::Const:
        return cast<T>(ins.value);
      case Op::Var:
        return T(x[static_cast<std::size_t>(ins.var)]);
      case Op::Add:
        return at(ins.a) + at(ins.b);
      case Op::Mul:
        return at(ins.a) * at(ins.b);
      case Op::Div:
        return at(ins.a) / at(ins.b);
      case Op::Pow:
        return ipow(at(ins.a), ins.exponent);
      case Op::Sqrt:
        return sqrt_value(at(ins.a));
    }
    return T(0);
  }

  std::vector<Instr> code_;
  std::vector<Guard> guards_;
  std::vector<int> sqrt_regs_;
  int result_ = -1;
  int num_vars_ = 0;
  bool real_ = true;
};

}  // namespace multcancel::expr
