#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "multcancel/symbols/checks.hpp"

namespace multcancel {

// Adapter for symbols given only as callables. Derivatives come from
// Richardson-extrapolated central differences, so verdicts carry the
// "finite-difference" confidence label and a looser tolerance.
struct BlackBoxSymbol {
  int m = 2;
  int n = 1;
  std::function<cplx(std::span<const double>)> f;
  std::string name = "blackbox";
};

inline constexpr double kFiniteDifferenceTolerance = 1e-6;

namespace detail {

inline cplx central_stencil(const std::function<cplx(std::span<const double>)>& f, std::vector<double>& x,
                            const std::vector<int>& dirs, std::size_t depth, double h) {
  if (depth == dirs.size()) return f(x);
  const auto v = static_cast<std::size_t>(dirs[depth]);
  const double x0 = x[v];
  x[v] = x0 + h;
  cplx plus = central_stencil(f, x, dirs, depth + 1, h);
  x[v] = x0 - h;
  cplx minus = central_stencil(f, x, dirs, depth + 1, h);
  x[v] = x0;
  return (plus - minus) / (2.0 * h);
}

}  // namespace detail

// d^alpha_k f at x: nested central differences D(h), combined as
// (4 D(h/2) - D(h)) / 3.
inline cplx fd_derivative(const std::function<cplx(std::span<const double>)>& f, std::span<const double> x, int n,
                          int block, const MultiIndex& alpha, double h) {
  std::vector<int> dirs;
  for (int c = 0; c < n; ++c)
    for (int k = 0; k < alpha[static_cast<std::size_t>(c)]; ++k) dirs.push_back(block * n + c);
  std::vector<double> y(x.begin(), x.end());
  if (dirs.empty()) return f(y);
  cplx coarse = detail::central_stencil(f, y, dirs, 0, h);
  cplx fine = detail::central_stencil(f, y, dirs, 0, h / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

inline CancellationReport check_cancellation_fd(const BlackBoxSymbol& s, int N, const SamplerSpec& spec = {},
                                                int block = -1, double relative_step = 1e-3) {
  if (!s.f) throw ConfigError("black-box symbol '" + s.name + "' has no callable");
  if (N < 0) throw ConfigError("cancellation order N must be >= 0");
  if (block < 0) block = s.m - 1;
  if (block >= s.m) throw ConfigError("block out of range");
  auto near_singular = [&](std::span<const double> x) {
    cplx v = s.f(x);
    return !std::isfinite(v.real()) || !std::isfinite(v.imag());
  };
  auto pts = sample_diagonal(s.m, s.n, spec, near_singular);
  auto alphas = multiindices_up_to(s.n, N);
  auto r = detail::cancellation_from(
      s.name, s.m, s.n, N, block, spec, pts, kFiniteDifferenceTolerance,
      [&](std::size_t a, const std::vector<double>& x) {
        double scale = std::numeric_limits<double>::infinity();
        for (int j = 0; j < s.m; ++j) scale = std::min(scale, block_norm(x, s.n, j));
        return fd_derivative(s.f, x, s.n, block, alphas[a], relative_step * scale);
      });
  r.confidence = "finite-difference";
  return r;
}

}  // namespace multcancel
