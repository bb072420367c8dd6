#pragma once

#include <cctype>
#include <string>

#include "multcancel/symbols/symbol.hpp"

namespace multcancel {

// Grammar (whitespace ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' int | '^' '(' int ')')?
//   primary := number | 'I' | 'x[' j ']' '[' c ']' | 'sqrt' '(' expr ')' | '(' expr ')'
// Blocks j and components c are 1-based. I is the imaginary unit.
class SymbolParser {
 public:
  explicit SymbolParser(std::string text) : text_(std::move(text)) {}

  // m, n <= 0 means infer from the largest indices used.
  SymbolExpr parse(int m = 0, int n = 0, const std::string& name = {}) {
    pos_ = 0;
    max_block_ = 0;
    max_comp_ = 0;
    // Components are only known after parsing, so variables are collected
    // as (block, component) and flattened afterwards.
    auto root = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    if (m <= 0) m = max_block_;
    if (n <= 0) n = std::max(max_comp_, 1);
    if (max_block_ > m || max_comp_ > n)
      fail("expression uses x[" + std::to_string(max_block_) + "][" + std::to_string(max_comp_) +
           "] beyond arity (m=" + std::to_string(m) + ", n=" + std::to_string(n) + ")");
    std::vector<expr::NodePtr> repl(static_cast<std::size_t>(kPlaceholderBase + kPlaceholderStride * (max_block_ + 1)));
    for (int j = 1; j <= max_block_; ++j)
      for (int c = 1; c <= max_comp_; ++c)
        repl[static_cast<std::size_t>(placeholder(j, c))] = expr::variable(var_index(n, j - 1, c - 1));
    auto flat = expr::substitute(root, repl);
    return SymbolExpr(m, n, flat, name.empty() ? text_ : name);
  }

 private:
  static constexpr int kPlaceholderBase = 0;
  static constexpr int kPlaceholderStride = 8;
  static int placeholder(int j, int c) { return kPlaceholderBase + kPlaceholderStride * j + c; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("symbol expression: " + msg + " at offset " + std::to_string(pos_) + " in '" + text_ + "'");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int integer() {
    skip();
    std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_ || (pos_ - start == 1 && !std::isdigit(static_cast<unsigned char>(text_[start]))))
      fail("expected an integer");
    return std::stoi(text_.substr(start, pos_ - start));
  }

  expr::NodePtr expr() {
    auto lhs = term();
    while (true) {
      if (accept('+'))
        lhs = expr::add(lhs, term());
      else if (accept('-'))
        lhs = expr::sub(lhs, term());
      else
        return lhs;
    }
  }

  expr::NodePtr term() {
    auto lhs = unary();
    while (true) {
      if (accept('*'))
        lhs = expr::mul(lhs, unary());
      else if (accept('/'))
        lhs = expr::div(lhs, unary());
      else
        return lhs;
    }
  }

  expr::NodePtr unary() {
    if (accept('-')) return expr::neg(unary());
    if (accept('+')) return unary();
    return power();
  }

  expr::NodePtr power() {
    auto base = primary();
    if (accept('^')) {
      int k = 0;
      if (accept('(')) {
        k = integer();
        expect(')');
      } else {
        k = integer();
      }
      return expr::pow(base, k);
    }
    return base;
  }

  expr::NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char ch = text_[pos_];
    if (ch == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      return expr::constant(v);
    }
    if (text_.compare(pos_, 4, "sqrt") == 0) {
      pos_ += 4;
      expect('(');
      auto e = expr();
      expect(')');
      return expr::sqrt(e);
    }
    if (ch == 'I') {
      ++pos_;
      return expr::constant(cplx(0.0, 1.0));
    }
    if (ch == 'x') {
      ++pos_;
      expect('[');
      int j = integer();
      expect(']');
      expect('[');
      int c = integer();
      expect(']');
      if (j < 1 || c < 1 || c >= kPlaceholderStride) fail("variable indices must be 1-based and c <= 7");
      max_block_ = std::max(max_block_, j);
      max_comp_ = std::max(max_comp_, c);
      return expr::variable(placeholder(j, c));
    }
    fail("unexpected '" + std::string(1, ch) + "'");
  }

  std::string text_;
  std::size_t pos_ = 0;
  int max_block_ = 0;
  int max_comp_ = 0;
};

inline SymbolExpr parse_symbol(const std::string& text, int m = 0, int n = 0, const std::string& name = {}) {
  return SymbolParser(text).parse(m, n, name);
}

}  // namespace multcancel
