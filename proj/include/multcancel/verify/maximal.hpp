#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "multcancel/grid/grid.hpp"

namespace multcancel {

using RadialProfile = std::function<double(double)>;

inline double sphere_surface(int n) { return n == 1 ? 2.0 : (n == 2 ? 2.0 * M_PI : 4.0 * M_PI); }

// int_{R^n} profile(|x|) dx for a profile supported in [0, radius].
inline double radial_integral(const RadialProfile& f, double radius, int n) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto g = [&](double r) { return f(r) * std::pow(r, n - 1); };
  return sphere_surface(n) * ts.integrate(g, 0.0, radius);
}

// Radially symmetric kernel phi(x) = profile(|x|) / mass with int phi = 1,
// dilated over the dyadic scales 2^j, j_min <= j <= j_max.
struct MaximalSpec {
  RadialProfile profile = [](double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; };
  double kernel_radius = 1.0;
  int j_min = -4;
  int j_max = 2;
  std::string kernel_name = "bump";

  double mass(int n) const { return radial_integral(profile, kernel_radius, n); }

  std::vector<double> scales() const {
    std::vector<double> s;
    for (int j = j_min; j <= j_max; ++j) s.push_back(std::ldexp(1.0, j));
    return s;
  }

  // |int phi - 1| with phi normalized by mass(n), recomputed with an
  // independent Gauss-Kronrod rule.
  double kernel_integral_error(int n) const {
    const double m = mass(n);
    auto g = [&](double r) { return profile(r) / m * std::pow(r, n - 1); };
    const double v = sphere_surface(n) * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                             g, 0.0, kernel_radius, 15, 1e-14);
    return std::abs(v - 1.0);
  }

  void validate(const Grid& g) const {
    if (j_min > j_max) throw ConfigError("maximal: j_min must not exceed j_max");
    if (!(kernel_radius > 0.0)) throw ConfigError("maximal: kernel radius must be positive");
    const double lo = 2.0 * g.spacing(), hi = g.half_extent() / 2.0;
    for (double t : scales())
      if (t < lo - 1e-12 || t > hi + 1e-12)
        throw GridError("maximal: scale " + format_number(t) + " outside [2h, L/2] = [" + format_number(lo) + ", " +
                        format_number(hi) + "]");
    if (kernel_integral_error(g.dim()) > 1e-10) throw NumericalError("maximal: kernel does not integrate to 1");
  }

  // Restricts [j_min, j_max] to the scales a grid resolves.
  MaximalSpec clipped(const Grid& g) const {
    MaximalSpec s = *this;
    const double lo = 2.0 * g.spacing(), hi = g.half_extent() / 2.0;
    while (s.j_min <= s.j_max && std::ldexp(1.0, s.j_min) < lo - 1e-12) ++s.j_min;
    while (s.j_max >= s.j_min && std::ldexp(1.0, s.j_max) > hi + 1e-12) --s.j_max;
    if (s.j_min > s.j_max) throw GridError("maximal: no dyadic scale fits the grid " + g.describe());
    return s;
  }
};

// phi_t sampled around the origin with periodic distance and rescaled so
// h^n sum phi_t = 1 exactly, returned as its spectrum.
inline SpectralField kernel_spectrum(const MaximalSpec& spec, const Grid& g, double t) {
  std::vector<cplx> v(g.size());
  const double period = 2.0 * g.half_extent();
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    double r2 = 0.0;
    for (double c : x) {
      // Periodic distance to the origin.
      double d = c - period * std::round(c / period);
      r2 += d * d;
    }
    const double r = std::sqrt(r2) / t;
    const double val = r < spec.kernel_radius ? spec.profile(r) : 0.0;
    v[i] = val;
    sum += val;
  }
  if (!(sum > 0.0)) throw GridError("maximal: kernel at scale " + format_number(t) + " misses every grid point");
  const double norm = 1.0 / (sum * g.cell_volume());
  for (auto& c : v) c *= norm;
  return forward(SampledField(g, std::move(v)));
}

struct MaximalResult {
  SampledField Mf;
  std::vector<double> scales;
};

// Mf(x) = max_t |phi_t * f(x)|, each convolution through the spectrum.
inline MaximalResult maximal_with_scales(const SampledField& f, const MaximalSpec& spec) {
  const Grid& g = f.grid();
  spec.validate(g);
  const SpectralField F = forward(f);
  std::vector<double> best(g.size(), 0.0);
  const auto scales = spec.scales();
  for (double t : scales) {
    const SpectralField K = kernel_spectrum(spec, g, t);
    // Both spectra carry the h^n weight, so their product is the spectrum
    // of the convolution.
    std::vector<cplx> prod(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) prod[i] = K[i] * F[i];
    SampledField c = inverse(SpectralField(g, std::move(prod)));
    for (std::size_t i = 0; i < c.size(); ++i) best[i] = std::max(best[i], std::abs(c[i]));
  }
  std::vector<cplx> out(best.begin(), best.end());
  return {SampledField(g, std::move(out)), scales};
}

inline SampledField maximal(const SampledField& f, const MaximalSpec& spec) {
  return maximal_with_scales(f, spec).Mf;
}

struct QuasinormResult {
  double value = 0.0;
  double p = 1.0;
  std::vector<double> scales;
};

// (h^n sum Mf^p)^{1/p}: a desk-scale surrogate for the H^p quasinorm.
inline QuasinormResult hp_quasinorm(const SampledField& f, double p, const MaximalSpec& spec) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("hp_quasinorm: p must lie in (0, 1], got " + format_number(p));
  auto r = maximal_with_scales(f, spec);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.Mf.size(); ++i) sum += std::pow(r.Mf[i].real(), p);
  return {std::pow(sum * f.grid().cell_volume(), 1.0 / p), p, r.scales};
}

}  // namespace multcancel
