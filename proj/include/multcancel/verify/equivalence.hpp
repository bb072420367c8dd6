#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "multcancel/atoms/battery.hpp"
#include "multcancel/symbols/checks.hpp"
#include "multcancel/verify/moments.hpp"

namespace multcancel {

// 1/p = sum 1/p_j with 0 < p <= 1.
inline double holder_target(const std::vector<double>& p) {
  if (p.empty()) throw ConfigError("exponent vector is empty");
  double inv = 0.0;
  for (double pj : p) {
    if (!(pj > 0.0) || !std::isfinite(pj)) throw ConfigError("exponents must be positive and finite");
    inv += 1.0 / pj;
  }
  const double target = 1.0 / inv;
  if (target > 1.0 + 1e-12)
    throw ConfigError("exponents violate the Hoelder relation: sum 1/p_j = " + format_number(inv) +
                      " gives p = " + format_number(target) + " > 1");
  return std::min(target, 1.0);
}

// Moment threshold for one tuple and alpha: max(1e-6 S, tail estimate). An
// infinite tail estimate means truncation is not controlled and the entry fails.
struct MomentEntry {
  std::size_t tuple = 0;
  MultiIndex alpha;
  cplx lhs;
  double abs_lhs = 0.0;
  double scale = 0.0;
  double tail_estimate = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline MomentEntry moment_entry(std::size_t tuple, const AppliedTuple& t, const std::vector<SmoothAtom>& atoms,
                                const MultiIndex& alpha) {
  MomentEntry e;
  e.tuple = tuple;
  e.alpha = alpha;
  auto lhs = moment_lhs(t, alpha);
  e.lhs = lhs.value;
  e.abs_lhs = std::abs(lhs.value);
  e.scale = moment_scale(atoms, order(alpha));
  e.tail_estimate = lhs.tail_estimate;
  e.threshold = std::max(kMomentPassFactor * e.scale, e.tail_estimate);
  e.pass = std::isfinite(e.threshold) && e.abs_lhs <= e.threshold;
  return e;
}

struct EquivalenceReport {
  std::string symbol;
  std::vector<double> p;
  double p_target = 1.0;
  int L = 0;
  CancellationReport cancellation;        // block m
  CancellationReport cancellation_first;  // block 1
  bool block_independent = false;
  std::vector<MomentEntry> moment_battery;
  bool moments_pass = false;
  bool agree = false;
  Grid grid;
  int battery_N = 0;
};

// Condition (a) through check_cancellation at order L, and condition (b)
// through moment_lhs on every battery tuple for |alpha| <= L.
inline EquivalenceReport equivalence_harness(const SymbolExpr& sigma, const std::vector<double>& p,
                                             const AtomBattery& battery, const SamplerSpec& sampler = {}) {
  if (static_cast<int>(p.size()) != sigma.m())
    throw ConfigError("exponent vector has " + std::to_string(p.size()) + " entries, symbol has m = " +
                      std::to_string(sigma.m()));
  if (battery.m != sigma.m() || battery.n != sigma.n())
    throw ConfigError("battery arity does not match the symbol");
  EquivalenceReport r;
  r.symbol = sigma.name();
  r.p = p;
  r.p_target = holder_target(p);
  r.L = required_N(r.p_target, sigma.n()).L;
  if (battery.N < r.L)
    throw ConfigError("battery vanishing order " + std::to_string(battery.N) + " is below L = " + std::to_string(r.L));
  r.battery_N = battery.N;
  r.grid = battery.tuples.front().front().grid();
  r.cancellation = check_cancellation(sigma, r.L, sampler, sigma.m() - 1);
  r.cancellation_first = check_cancellation(sigma, r.L, sampler, 0);
  r.block_independent = r.cancellation.pass == r.cancellation_first.pass;
  const auto alphas = multiindices_up_to(sigma.n(), r.L);
  r.moments_pass = true;
  for (std::size_t t = 0; t < battery.size(); ++t) {
    auto applied = apply_tuple(sigma, battery.tuples[t], r.grid);
    for (const auto& a : alphas) {
      r.moment_battery.push_back(moment_entry(t, applied, battery.tuples[t], a));
      r.moments_pass = r.moments_pass && r.moment_battery.back().pass;
    }
  }
  r.agree = r.cancellation.pass == r.moments_pass;
  return r;
}

inline EquivalenceReport equivalence_harness(const SymbolExpr& sigma, const std::vector<double>& p, const Grid& grid,
                                             const SamplerSpec& sampler = {},
                                             std::size_t tuples = kDefaultBatteryTuples) {
  const int N = required_N(holder_target(p), grid.dim()).N;
  return equivalence_harness(sigma, p, default_battery(sigma.m(), grid, N, p, tuples), sampler);
}

// m = 1: moments of sigma(D) a up to order N for any bounded sigma.
struct LinearReport {
  std::string symbol;
  int N = 0;
  std::vector<MomentEntry> entries;
  bool pass = false;
};

inline LinearReport linear_vanishing(const SymbolExpr& sigma, const std::vector<SmoothAtom>& atoms, int N) {
  if (sigma.m() != 1) throw ConfigError("linear check needs a 1-block symbol, got m = " + std::to_string(sigma.m()));
  LinearReport r;
  r.symbol = sigma.name();
  r.N = N;
  r.pass = true;
  const auto alphas = multiindices_up_to(sigma.n(), N);
  for (std::size_t t = 0; t < atoms.size(); ++t) {
    if (atoms[t].vanishing_order() < N)
      throw ConfigError("atom " + std::to_string(t + 1) + " vanishes only to order " +
                        std::to_string(atoms[t].vanishing_order()));
    std::vector<SmoothAtom> one{atoms[t]};
    auto applied = apply_tuple(sigma, one, atoms[t].grid());
    for (const auto& a : alphas) {
      r.entries.push_back(moment_entry(t, applied, one, a));
      r.pass = r.pass && r.entries.back().pass;
    }
  }
  return r;
}

}  // namespace multcancel
