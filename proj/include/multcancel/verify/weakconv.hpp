#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "multcancel/atoms/atoms.hpp"
#include "multcancel/multiplier/apply.hpp"

namespace multcancel {

// Inputs of the oscillation demo: f_k = f + h cos(2 pi k x), g_k likewise
// with e, paired against phi_test.
struct WeakConvInputs {
  RealFunction f, h, g, e, phi_test;
};

// Smooth compactly supported defaults.
inline WeakConvInputs default_weakconv_inputs() {
  return {bump({0.0}, 1.5), bump({-0.2}, 1.2), bump({0.3}, 1.5), bump({0.2}, 1.2), bump({0.0}, 2.0)};
}

struct WeakConvReport {
  std::string symbol;
  std::vector<double> k_list;
  std::vector<cplx> pairings;
  cplx limit_pairing;
  std::vector<double> gaps;          // |pairing_k - limit|
  std::vector<double> relative_gaps;  // gaps / scale
  double scale = 0.0;                 // max(|limit|, 1/2 int |h e phi|)
  double predicted_gap = 0.0;         // 1/2 int h e phi, the sigma = 1 weak limit defect
  Grid grid;
};

inline WeakConvReport weakconv_demo(const SymbolExpr& sigma, const WeakConvInputs& in, const std::vector<double>& k_list,
                                    const Grid& grid) {
  if (grid.dim() != 1) throw ConfigError("weak-convergence demo runs in one dimension");
  if (sigma.m() != 2 || sigma.n() != 1) throw ConfigError("weak-convergence demo needs a bilinear 1D symbol");
  if (k_list.empty()) throw ConfigError("weak-convergence demo needs at least one k");
  const double period = 2.0 * grid.half_extent();
  for (double k : k_list) {
    if (!(k > 0.0) || k >= grid.freq_half_extent())
      throw ConfigError("oscillation frequency " + format_number(k) + " is beyond the grid Nyquist frequency " +
                        format_number(grid.freq_half_extent()));
    if (std::abs(k * period - std::round(k * period)) > 1e-9)
      throw ConfigError("oscillation frequency " + format_number(k) + " is not periodic on the box");
  }
  WeakConvReport r;
  r.symbol = sigma.name();
  r.k_list = k_list;
  r.grid = grid;
  MultiplierPlan plan{sigma, grid, Algorithm::FftLastBlock, 0.0, true};
  const Grid out = plan.output_grid();
  const SampledField f = sample(in.f, grid), g = sample(in.g, grid), h = sample(in.h, grid), e = sample(in.e, grid);
  const SampledField phi = sample(in.phi_test, out);
  auto pair = [&](const SampledField& B) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < B.size(); ++i) s += B[i] * phi[i];
    return s * out.cell_volume();
  };
  r.limit_pairing = pair(apply(plan, {f, g}));
  {
    const SampledField he = sample(
        [&](std::span<const double> x) { return in.h(x) * in.e(x) * in.phi_test(x); }, out);
    double signed_sum = 0.0, abs_sum = 0.0;
    for (std::size_t i = 0; i < he.size(); ++i) {
      signed_sum += he[i].real();
      abs_sum += std::abs(he[i]);
    }
    r.predicted_gap = 0.5 * signed_sum * out.cell_volume();
    r.scale = std::max(std::abs(r.limit_pairing), 0.5 * abs_sum * out.cell_volume());
  }
  std::vector<double> x(1);
  for (double k : k_list) {
    std::vector<cplx> fk(grid.size()), gk(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid.point(i, x);
      const double c = std::cos(2.0 * M_PI * k * x[0]);
      fk[i] = f[i] + h[i] * c;
      gk[i] = g[i] + e[i] * c;
    }
    const cplx p = pair(apply(plan, {SampledField(grid, std::move(fk)), SampledField(grid, std::move(gk))}));
    r.pairings.push_back(p);
    r.gaps.push_back(std::abs(p - r.limit_pairing));
    r.relative_gaps.push_back(r.gaps.back() / r.scale);
  }
  return r;
}

}  // namespace multcancel
