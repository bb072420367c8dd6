#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "multcancel/atoms/atoms.hpp"

namespace multcancel {

inline constexpr double kZetaFirstZeroTarget = 1.05;

// zeta with zeta^ = Phi^(c xi) w(c xi), w(xi) = ((cos|xi| - 1)/|xi|)^q.
struct Zeta {
  SampledField field;
  SpectralField spectrum;
  int exponent = 0;           // q
  double dilation = 1.0;      // c
  double first_zero = 0.0;    // first sign change of the undilated spectrum on the +xi_1 axis
  double support_radius = 0.0;
  double min_abs_punctured = 0.0;  // min |zeta^| on 2 dxi <= |xi| <= 1 - 2 dxi
  double spectrum_max = 0.0;
};

// The even exponent used for w. (cos r - 1)/r is odd in r, so an odd power
// is not a smooth function of xi and its inverse transform is not compactly
// supported; the smallest even exponent >= n + 1 is used instead.
inline int zeta_exponent(int n) { return 2 * ((n + 2) / 2); }

inline double zeta_w(double r, int q) {
  // (cos r - 1)/r = -2 sin^2(r/2)/r, stable near r = 0
  if (r == 0.0) return 0.0;
  double s = std::sin(0.5 * r);
  return std::pow(-2.0 * s * s / r, q);
}

namespace detail {

inline double euclid(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline SpectralField zeta_spectrum(const Grid& grid, double c, int q) {
  const int n = grid.dim();
  // Phi^(c xi) is the transform of the bump of radius c with unit integral.
  auto phi = sample(bump(std::vector<double>(static_cast<std::size_t>(n), 0.0), c), grid);
  double mass = 0.0;
  for (const auto& v : phi.values()) mass += v.real();
  mass *= grid.cell_volume();
  auto phi_hat = forward(scale(phi, 1.0 / mass));
  std::vector<cplx> v(grid.size());
  std::vector<double> xi(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.freq_point(i, xi);
    v[i] = phi_hat[i] * zeta_w(c * euclid(xi), q);
  }
  return SpectralField(grid, std::move(v));
}

}  // namespace detail

inline Zeta zeta(int n, const Grid& grid) {
  if (grid.dim() != n) throw ConfigError("zeta: grid dimension does not match n");
  if (2.0 / grid.spacing() < 32.0 - 1e-9)
    throw GridError("zeta: grid " + grid.describe() + " resolves the unit ball with fewer than 32 points per axis");
  Zeta z{SampledField::zeros(grid), SpectralField::zeros(grid)};
  z.exponent = zeta_exponent(n);
  const int M = grid.points_per_axis();
  const double dxi = grid.freq_spacing();

  // Scan the undilated spectrum along +xi_1 for its first sign change.
  auto undilated = detail::zeta_spectrum(grid, 1.0, z.exponent);
  std::array<int, kMaxDim> idx{M / 2, M / 2, M / 2};
  double prev = 0.0;
  double r0 = 0.0;
  for (int s = M / 2 + 1; s < M; ++s) {
    idx[0] = s;
    double v = undilated[grid.flatten(idx)].real();
    if (s > M / 2 + 1 && ((prev > 0.0 && v <= 0.0) || (prev < 0.0 && v >= 0.0))) {
      double r_prev = (s - 1 - M / 2) * dxi;
      r0 = r_prev + dxi * prev / (prev - v);
      break;
    }
    prev = v;
  }
  z.first_zero = r0;
  z.dilation = r0 > 0.0 ? std::min(1.0, r0 / kZetaFirstZeroTarget) : 1.0;
  // supp Phi_c has radius c; w(c xi) is a trigonometric polynomial in c|xi|
  // of degree q, whose inverse transform lives in radius c q / (2 pi).
  z.support_radius = z.dilation * (1.0 + z.exponent / (2.0 * M_PI));
  if (z.support_radius > grid.half_extent())
    throw GridError("zeta: support radius " + format_number(z.support_radius) + " exceeds the grid half extent");

  auto spec = detail::zeta_spectrum(grid, z.dilation, z.exponent);
  z.spectrum_max = spec.max_abs();
  // Nonvanishing on the punctured unit ball, without sign changes.
  const double eps0 = 2.0 * dxi;
  double min_abs = std::numeric_limits<double>::infinity();
  int sign = 0;
  std::vector<double> xi(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    grid.freq_point(i, xi);
    double r = detail::euclid(xi);
    if (r < eps0 || r > 1.0 - eps0) continue;
    min_abs = std::min(min_abs, std::abs(spec[i]));
    int sg = spec[i].real() > 0.0 ? 1 : (spec[i].real() < 0.0 ? -1 : 0);
    if (sg == 0 || (sign != 0 && sg != sign))
      throw ConstructionError("zeta: discrete zero inside the punctured unit ball at |xi| = " + format_number(r));
    sign = sg;
  }
  if (!std::isfinite(min_abs)) throw GridError("zeta: the punctured unit ball contains no lattice points");
  if (min_abs <= 1e-12 * z.spectrum_max)
    throw ConstructionError("zeta: spectrum nearly vanishes inside the punctured unit ball");
  z.min_abs_punctured = min_abs;
  z.field = inverse(spec);
  z.spectrum = spec;
  return z;
}

// G = zeta * ... * zeta (N + 1 factors), built as inverse(zeta^^{N+1}).
inline SmoothAtom omega_atom(int N, int n, const Grid& grid) {
  if (N < 0) throw ConfigError("omega_atom: N must be >= 0");
  Zeta z = zeta(n, grid);
  const double radius = (N + 1) * z.support_radius;
  if (radius > grid.half_extent())
    throw GridError("omega_atom: support radius " + format_number(radius) + " for N=" + std::to_string(N) +
                    " overflows the grid " + grid.describe());
  std::vector<cplx> v = z.spectrum.values();
  for (auto& x : v) x = std::pow(x, N + 1);
  auto G = inverse(SpectralField(grid, std::move(v)));
  // zeta^ is real and even, so G is real; drop the round-off imaginary part.
  std::vector<cplx> real_part(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) real_part[i] = G[i].real();
  return SmoothAtom::certify(SampledField(grid, std::move(real_part)),
                             SupportCube{std::vector<double>(static_cast<std::size_t>(n), 0.0), 2.0 * radius}, N,
                             SmoothAtom::Representation::Spectral,
                             "omega_atom N=" + std::to_string(N) + " dilation=" + format_number(z.dilation));
}

}  // namespace multcancel
