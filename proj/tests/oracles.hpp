#pragma once

// Independent reference computations for the tests. None of these call into
// the library's transforms, differentiation or quadrature.

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "multcancel/grid/grid.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Fn = std::function<cplx(std::span<const double>)>;

// Central difference of order 1 or 2 in variable v, Richardson-extrapolated
// from steps h and h/2.
inline cplx central(const Fn& f, std::vector<double> x, int v, int k, double h) {
  auto at = [&](double dx) {
    auto y = x;
    y[static_cast<std::size_t>(v)] += dx;
    return f(y);
  };
  if (k == 1) return (at(h) - at(-h)) / (2.0 * h);
  return (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
}

inline cplx richardson(const Fn& f, const std::vector<double>& x, int v, int k, double h) {
  const cplx a = central(f, x, v, k, h), b = central(f, x, v, k, h / 2.0);
  return (4.0 * b - a) / 3.0;
}

// Mixed or repeated partials with total order <= 2. vars lists the variables
// to differentiate in (e.g. {0,0} or {0,3}).
inline cplx partial(const Fn& f, const std::vector<double>& x, const std::vector<int>& vars, double h = 1e-3) {
  if (vars.empty()) return f(x);
  if (vars.size() == 1) return richardson(f, x, vars[0], 1, h);
  if (vars[0] == vars[1]) return richardson(f, x, vars[0], 2, h);
  Fn inner = [&](std::span<const double> y) {
    return richardson(f, std::vector<double>(y.begin(), y.end()), vars[1], 1, h);
  };
  return richardson(inner, x, vars[0], 1, h);
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// h^n sum_k f(x_k) exp(-2 pi i x_k . xi), summed directly.
inline cplx direct_dft(const multcancel::SampledField& f, std::span<const double> xi) {
  const auto& g = f.grid();
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    g.point(i, x);
    double ph = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) ph += x[c] * xi[c];
    s += f[i] * std::polar(1.0, -2.0 * M_PI * ph);
  }
  return s * g.cell_volume();
}

inline double gaussian(std::span<const double> x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::exp(-M_PI * r2);
}

inline double bump1(double x, double c = 0.0, double r = 1.0) {
  const double s = (x - c) * (x - c) / (r * r);
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}

// Derivative of the 1D bump by Richardson differences (orders 1 and 2).
inline double bump1_derivative(double x, int k, double c = 0.0, double r = 1.0) {
  Fn f = [&](std::span<const double> y) { return cplx(bump1(y[0], c, r)); };
  return partial(f, {x}, std::vector<int>(static_cast<std::size_t>(k), 0), 1e-3).real();
}

}  // namespace oracle
