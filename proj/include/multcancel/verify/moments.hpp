#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "multcancel/atoms/atoms.hpp"
#include "multcancel/core/multiindex.hpp"
#include "multcancel/multiplier/apply.hpp"
#include "multcancel/multiplier/tail.hpp"
#include "multcancel/symbols/symbol.hpp"

namespace multcancel {

inline constexpr double kIdentityTolerance = 1e-2;
inline constexpr double kMomentPassFactor = 1e-6;
inline constexpr double kFloorScaleFactor = 1e-12;
// Allowed relative change of moment_rhs when the tube radius is halved.
inline constexpr double kDeltaRobustnessTolerance = 1e-3;

// Frequency-side quadrature controls. Negative values select the defaults:
// delta = 2 dxi, truncation at the lattice edge.
struct QuadratureSpec {
  double delta = -1.0;
  double truncation_radius = -1.0;

  double resolved_delta(const Grid& g) const { return delta >= 0.0 ? delta : 2.0 * g.freq_spacing(); }
  double resolved_truncation(const Grid& g) const {
    return truncation_radius > 0.0 ? truncation_radius : g.freq_half_extent();
  }
};

inline void check_atoms(const std::vector<SmoothAtom>& atoms, const Grid& grid, int m) {
  if (static_cast<int>(atoms.size()) != m)
    throw ConfigError("expected " + std::to_string(m) + " atoms, got " + std::to_string(atoms.size()));
  for (const auto& a : atoms)
    if (!(a.grid() == grid))
      throw ConfigError("atom '" + a.provenance() + "' lives on grid " + a.grid().describe() + ", expected " +
                        grid.describe());
}

// S = prod ||a_j||_inf * |Q| * diam(Q)^{|alpha|}, Q the bounding cube of all
// atom supports.
inline double moment_scale(const std::vector<SmoothAtom>& atoms, int alpha_order) {
  const int n = atoms.front().dim();
  double side = 0.0;
  std::vector<double> lo(static_cast<std::size_t>(n), 1e300), hi(static_cast<std::size_t>(n), -1e300);
  double sup = 1.0;
  for (const auto& a : atoms) {
    sup *= a.field().max_abs();
    for (int c = 0; c < n; ++c) {
      lo[static_cast<std::size_t>(c)] = std::min(lo[static_cast<std::size_t>(c)], a.cube().center[static_cast<std::size_t>(c)] - a.cube().side / 2);
      hi[static_cast<std::size_t>(c)] = std::max(hi[static_cast<std::size_t>(c)], a.cube().center[static_cast<std::size_t>(c)] + a.cube().side / 2);
    }
  }
  for (int c = 0; c < n; ++c) side = std::max(side, hi[static_cast<std::size_t>(c)] - lo[static_cast<std::size_t>(c)]);
  const double volume = std::pow(side, n);
  const double diam = side * std::sqrt(static_cast<double>(n));
  return sup * volume * std::pow(diam, alpha_order);
}

// T_sigma applied to one atom tuple on the dealiased output grid, with the
// tail majorant fitted to it.
struct AppliedTuple {
  SampledField T;
  ApplyInfo info;
  TailMajorant majorant;
  DecayCheck decay;
};

inline AppliedTuple apply_tuple(const SymbolExpr& sigma, const std::vector<SmoothAtom>& atoms, const Grid& grid,
                                Algorithm algorithm = Algorithm::FftLastBlock) {
  check_atoms(atoms, grid, sigma.m());
  MultiplierPlan plan{sigma, grid, algorithm, 0.0, true};
  std::vector<SampledField> fields;
  std::vector<double> p;
  int N = atoms.front().vanishing_order();
  for (const auto& a : atoms) {
    fields.push_back(a.field());
    p.push_back(a.p());
    N = std::min(N, a.vanishing_order());
  }
  ApplyInfo info;
  SampledField T = apply(plan, fields, &info);
  TailMajorant b = tail_majorant(atoms, p, N, T);
  DecayCheck d = check_pointwise_decay(T, b, 0.0, T.grid().points_per_axis() / grid.points_per_axis());
  return {std::move(T), info, std::move(b), d};
}

struct MomentLhs {
  cplx value;
  double tail_estimate = 0.0;  // C_far * integral of the majorant outside the box
};

// int (-2 pi i x)^alpha T(x) dx on the output lattice.
inline MomentLhs moment_lhs(const AppliedTuple& t, const MultiIndex& alpha) {
  const cplx factor = std::pow(cplx(0.0, -2.0 * M_PI), order(alpha));
  MomentLhs out;
  out.value = factor * moment(t.T, alpha);
  out.tail_estimate = t.decay.C_far * t.majorant.outside_integral(order(alpha));
  return out;
}

inline MomentLhs moment_lhs(const SymbolExpr& sigma, const std::vector<SmoothAtom>& atoms, const MultiIndex& alpha,
                            const Grid& grid) {
  return moment_lhs(apply_tuple(sigma, atoms, grid), alpha);
}

struct MomentRhs {
  cplx value;
  double delta = 0.0;
  double truncation_radius = 0.0;
  std::vector<int> excluded_tubes;  // 1-based blocks whose delta-tube was excluded
  std::size_t excluded_points = 0;
  std::size_t quadrature_points = 0;
};

// sum_{beta <= alpha} C(alpha, beta) int prod_{j<m} a^_j(xi_j)
//   d^{alpha-beta} a^_m(-sum xi) d^beta_m sigma(xi', -sum xi) dxi'
// over the lattice of the first m-1 blocks. A delta-tube {|xi_i| <= delta}
// (i = m meaning |sum xi'| <= delta) is excluded when the integrand is
// singular at one of its lattice points.
inline MomentRhs moment_rhs(const SymbolExpr& sigma, const std::vector<SmoothAtom>& atoms, const MultiIndex& alpha,
                            const QuadratureSpec& quad = {}) {
  const int m = sigma.m();
  if (atoms.empty()) throw ConfigError("moment_rhs needs atoms");
  const Grid& g = atoms.front().grid();
  check_atoms(atoms, g, m);
  const int n = g.dim();
  if (sigma.n() != n) throw ConfigError("symbol block dimension does not match the atoms");
  if (static_cast<int>(alpha.size()) != n) throw ConfigError("multiindex " + to_string(alpha) + " has the wrong size");
  const int M = g.points_per_axis();
  const double dxi = g.freq_spacing();
  MomentRhs out;
  out.delta = quad.resolved_delta(g);
  out.truncation_radius = quad.resolved_truncation(g);

  std::vector<SpectralField> hats;
  for (int j = 0; j + 1 < m; ++j) hats.push_back(forward(atoms[static_cast<std::size_t>(j)].field()));
  const auto betas = box_below(alpha);
  std::vector<SpectralField> last_derivs;  // indexed like betas by gamma = alpha - beta
  std::vector<SymbolExpr> sigma_derivs;
  std::vector<double> weights;
  for (const auto& beta : betas) {
    const MultiIndex gamma = subtract(alpha, beta);
    last_derivs.push_back(forward(weight_by_monomial(atoms.back().field(), gamma)));
    sigma_derivs.push_back(diff(sigma, m - 1, beta, std::max(kDefaultDiffCap, order(alpha))));
    weights.push_back(binomial(alpha, beta));
  }

  const std::size_t inner = g.size();
  std::size_t outer = 1;
  for (int j = 0; j + 1 < m; ++j) outer *= inner;
  std::vector<cplx> contrib(outer, 0.0);
  std::vector<std::uint8_t> tubes(outer, 0), singular(outer, 0), used(outer, 0);
  std::vector<double> xi(static_cast<std::size_t>(m * n));
  const double trunc = out.truncation_radius;

  for (std::size_t o = 0; o < outer; ++o) {
    std::array<int, kMaxDim> total{0, 0, 0};
    std::size_t rest = o;
    cplx coef = 1.0;
    bool inside = true;
    std::uint8_t mask = 0;
    for (int j = m - 2; j >= 0; --j) {
      const std::size_t slot = rest % inner;
      rest /= inner;
      coef *= hats[static_cast<std::size_t>(j)][slot];
      auto s = g.unflatten(slot);
      double norm2 = 0.0;
      for (int c = 0; c < n; ++c) {
        const int sc = s[static_cast<std::size_t>(c)] - M / 2;
        const double v = sc * dxi;
        xi[static_cast<std::size_t>(j * n + c)] = v;
        total[static_cast<std::size_t>(c)] += sc;
        norm2 += v * v;
        if (std::abs(v) > trunc) inside = false;
      }
      if (std::sqrt(norm2) <= out.delta) mask |= static_cast<std::uint8_t>(1u << j);
    }
    // Last block: -sum, which must stay on the lattice.
    std::array<int, kMaxDim> last{0, 0, 0};
    double norm2 = 0.0;
    for (int c = 0; c < n; ++c) {
      const int sc = -total[static_cast<std::size_t>(c)];
      if (sc < -M / 2 || sc > M / 2 - 1) inside = false;
      last[static_cast<std::size_t>(c)] = sc + M / 2;
      const double v = sc * dxi;
      xi[static_cast<std::size_t>((m - 1) * n + c)] = v;
      norm2 += v * v;
      if (std::abs(v) > trunc) inside = false;
    }
    if (!inside) continue;
    if (std::sqrt(norm2) <= out.delta) mask |= static_cast<std::uint8_t>(1u << (m - 1));
    used[o] = 1;
    tubes[o] = mask;
    const std::size_t last_slot = g.flatten(last);
    cplx sum = 0.0;
    for (std::size_t b = 0; b < betas.size(); ++b) {
      auto v = sigma_derivs[b].try_evaluate(xi);
      if (!v) {
        singular[o] = 1;
        break;
      }
      sum += weights[b] * last_derivs[b][last_slot] * *v;
    }
    contrib[o] = coef * sum;
  }

  std::uint8_t active = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    if (!used[o] || !singular[o]) continue;
    if (tubes[o] == 0) {
      throw DomainError("symbol '" + sigma.name() + "' is singular on the frequency quadrature set outside every " +
                        "delta-tube around Gamma (lattice tuple " + std::to_string(o) + ")");
    }
    active |= tubes[o];
  }
  cplx acc = 0.0;
  for (std::size_t o = 0; o < outer; ++o) {
    if (!used[o]) continue;
    if (tubes[o] & active) {
      ++out.excluded_points;
      continue;
    }
    ++out.quadrature_points;
    acc += contrib[o];
  }
  for (int j = 0; j < m; ++j)
    if (active & (1u << j)) out.excluded_tubes.push_back(j + 1);
  out.value = acc * std::pow(dxi, (m - 1) * n);
  return out;
}

struct MomentReport {
  MultiIndex alpha;
  cplx lhs;
  cplx rhs;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double scale = 0.0;        // S
  double floor_scale = 0.0;  // 1e-12 S
  double tail_estimate = 0.0;
  double tolerance = kIdentityTolerance;
  bool pass = false;
  Grid grid;
  Grid output_grid;
  double delta = 0.0;
  double truncation_radius = 0.0;
  std::vector<int> excluded_tubes;
};

inline MomentReport identity_report(const AppliedTuple& t, const SymbolExpr& sigma,
                                    const std::vector<SmoothAtom>& atoms, const MultiIndex& alpha,
                                    const QuadratureSpec& quad = {}, double tolerance = kIdentityTolerance) {
  MomentReport r;
  r.alpha = alpha;
  auto lhs = moment_lhs(t, alpha);
  auto rhs = moment_rhs(sigma, atoms, alpha, quad);
  r.lhs = lhs.value;
  r.rhs = rhs.value;
  r.tail_estimate = lhs.tail_estimate;
  r.scale = moment_scale(atoms, order(alpha));
  r.floor_scale = kFloorScaleFactor * r.scale;
  r.abs_err = std::abs(r.lhs - r.rhs);
  r.rel_err = r.abs_err / std::max({std::abs(r.lhs), std::abs(r.rhs), r.floor_scale});
  r.tolerance = tolerance;
  r.pass = r.rel_err <= tolerance;
  r.grid = atoms.front().grid();
  r.output_grid = t.T.grid();
  r.delta = rhs.delta;
  r.truncation_radius = rhs.truncation_radius;
  r.excluded_tubes = rhs.excluded_tubes;
  return r;
}

// Both sides of the moment identity for one tuple and one alpha.
inline MomentReport identity_check(const SymbolExpr& sigma, const std::vector<SmoothAtom>& atoms,
                                   const MultiIndex& alpha, const Grid& grid, const QuadratureSpec& quad = {},
                                   double tolerance = kIdentityTolerance) {
  return identity_report(apply_tuple(sigma, atoms, grid), sigma, atoms, alpha, quad, tolerance);
}

}  // namespace multcancel
