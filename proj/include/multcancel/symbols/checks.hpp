#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "multcancel/core/multiindex.hpp"
#include "multcancel/core/parallel.hpp"
#include "multcancel/symbols/symbol.hpp"

namespace multcancel {

inline constexpr double kSymbolicZeroTolerance = 1e-12;
inline constexpr int kMaxSampleAttempts = 100;

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> r;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i) r.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return r;
}

struct SamplerSpec {
  std::vector<double> radii = log_spaced(1e-2, 1e2, 17);
  int directions_per_shell = 32;
  double reject_radius = 1e-3;
  std::uint64_t seed = 42;

  void validate() const {
    if (radii.empty()) throw ConfigError("sampler: radii must be nonempty");
    for (double r : radii)
      if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("sampler: radii must be positive and finite");
    if (directions_per_shell < 1) throw ConfigError("sampler: directions_per_shell must be >= 1");
    if (!(reject_radius >= 0.0)) throw ConfigError("sampler: reject_radius must be nonnegative");
  }
};

struct DiagonalSamples {
  std::vector<std::vector<double>> points;
  std::vector<int> shell;
  int rejected_slots = 0;
};

inline double block_norm(std::span<const double> x, int n, int j) {
  double s = 0.0;
  for (int c = 0; c < n; ++c) s += x[static_cast<std::size_t>(j * n + c)] * x[static_cast<std::size_t>(j * n + c)];
  return std::sqrt(s);
}

inline double euclid_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Admissibility of a sample: every block at least eps from 0 and the point
// not within eps of the symbol's singular set.
template <class Singular>
bool admissible(std::span<const double> x, int m, int n, double eps, Singular&& near_singular) {
  for (int j = 0; j < m; ++j)
    if (block_norm(x, n, j) < eps) return false;
  return !near_singular(x);
}

// Points on {xi_1 + ... + xi_m = 0}: Gaussian directions in the free
// (m-1)n coordinates, xi_m = -sum, rescaled so |xi| equals the shell radius.
template <class Singular>
DiagonalSamples sample_diagonal(int m, int n, const SamplerSpec& spec, Singular&& near_singular) {
  spec.validate();
  DiagonalSamples out;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int free = (m - 1) * n;
  std::vector<double> x(static_cast<std::size_t>(m * n));
  for (std::size_t s = 0; s < spec.radii.size(); ++s) {
    for (int d = 0; d < spec.directions_per_shell; ++d) {
      bool found = false;
      for (int attempt = 0; attempt < kMaxSampleAttempts && !found; ++attempt) {
        for (int i = 0; i < free; ++i) x[static_cast<std::size_t>(i)] = normal(rng);
        for (int c = 0; c < n; ++c) {
          double acc = 0.0;
          for (int j = 0; j < m - 1; ++j) acc += x[static_cast<std::size_t>(j * n + c)];
          x[static_cast<std::size_t>((m - 1) * n + c)] = -acc;
        }
        double norm = euclid_norm(x);
        if (norm == 0.0) continue;
        for (auto& v : x) v *= spec.radii[s] / norm;
        // Rescaling may break the exact linear relation in the last block;
        // restore it so the point lies on the hyperplane in floating point.
        for (int c = 0; c < n; ++c) {
          double acc = 0.0;
          for (int j = 0; j < m - 1; ++j) acc += x[static_cast<std::size_t>(j * n + c)];
          x[static_cast<std::size_t>((m - 1) * n + c)] = -acc;
        }
        if (admissible(x, m, n, spec.reject_radius, near_singular)) found = true;
      }
      if (found) {
        out.points.push_back(x);
        out.shell.push_back(static_cast<int>(s));
      } else {
        ++out.rejected_slots;
      }
    }
  }
  if (out.points.empty())
    throw SamplerError("every sample slot was rejected (m=" + std::to_string(m) + ", n=" + std::to_string(n) +
                       ", reject_radius=" + format_number(spec.reject_radius) + ")");
  return out;
}

inline DiagonalSamples sample_diagonal(const SymbolExpr& s, const SamplerSpec& spec) {
  return sample_diagonal(s.m(), s.n(), spec,
                         [&](std::span<const double> x) { return s.near_singular(x, spec.reject_radius); });
}

struct CancellationSample {
  std::vector<double> point;
  int shell = 0;
  std::vector<double> values;  // |d^alpha_k sigma| per alpha, unscaled
};

struct CancellationReport {
  std::string symbol;
  int max_order = 0;
  int block = 0;  // 0-based
  std::uint64_t seed = 0;
  double tolerance = kSymbolicZeroTolerance;
  std::string confidence = "symbolic";
  std::vector<double> radii;
  std::vector<MultiIndex> alphas;
  // max over samples of |d^alpha sigma(xi)| * |xi|^{|alpha|}
  std::vector<double> per_alpha_max;
  std::vector<std::size_t> per_alpha_argmax;
  std::vector<CancellationSample> samples;
  int rejected_slots = 0;
  bool pass = false;
};

namespace detail {

template <class Eval>
CancellationReport cancellation_from(const std::string& name, int m, int n, int N, int block,
                                     const SamplerSpec& spec, const DiagonalSamples& pts, double tolerance,
                                     Eval&& eval_derivative) {
  CancellationReport r;
  r.symbol = name;
  r.max_order = N;
  r.block = block;
  r.seed = spec.seed;
  r.tolerance = tolerance;
  r.radii = spec.radii;
  r.rejected_slots = pts.rejected_slots;
  r.alphas = multiindices_up_to(n, N);
  const std::size_t na = r.alphas.size();
  r.samples.resize(pts.points.size());
  const std::size_t chunk = 64;
  const std::size_t chunks = (pts.points.size() + chunk - 1) / chunk;
  parallel_chunks(chunks, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(pts.points.size(), (c + 1) * chunk); ++i) {
      auto& s = r.samples[i];
      s.point = pts.points[i];
      s.shell = pts.shell[i];
      s.values.resize(na);
      for (std::size_t a = 0; a < na; ++a) s.values[a] = std::abs(eval_derivative(a, s.point));
    }
  });
  r.per_alpha_max.assign(na, 0.0);
  r.per_alpha_argmax.assign(na, 0);
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const double rho = euclid_norm(r.samples[i].point);
    for (std::size_t a = 0; a < na; ++a) {
      double v = r.samples[i].values[a] * std::pow(rho, order(r.alphas[a]));
      if (!std::isfinite(v)) throw NumericalError("non-finite derivative value in cancellation check of '" + name + "'");
      if (v > r.per_alpha_max[a]) {
        r.per_alpha_max[a] = v;
        r.per_alpha_argmax[a] = i;
      }
    }
  }
  r.pass = true;
  for (double v : r.per_alpha_max) r.pass = r.pass && v <= tolerance;
  (void)m;
  return r;
}

}  // namespace detail

// Condition (a): d^alpha_k sigma vanishes on the hyperplane for |alpha| <= N.
// Derivative magnitudes are reported in the scale-invariant form
// |d^alpha sigma(xi)| |xi|^{|alpha|}, which is what "magnitude scale 1"
// means for symbols homogeneous of degree 0.
inline CancellationReport check_cancellation(const SymbolExpr& s, int N, const SamplerSpec& spec = {},
                                             int block = -1) {
  if (N < 0) throw ConfigError("cancellation order N must be >= 0");
  if (block < 0) block = s.m() - 1;
  if (block >= s.m()) throw ConfigError("block " + std::to_string(block + 1) + " out of range");
  auto pts = sample_diagonal(s, spec);
  std::vector<SymbolExpr> derivs;
  for (const auto& a : multiindices_up_to(s.n(), N)) derivs.push_back(diff(s, block, a, N + 2));
  return detail::cancellation_from(s.name(), s.m(), s.n(), N, block, spec, pts, kSymbolicZeroTolerance,
                                   [&](std::size_t a, const std::vector<double>& x) { return derivs[a].evaluate(x); });
}

struct BlockSymmetryReport {
  std::vector<bool> verdicts;  // per block
  bool symmetric = false;
};

inline BlockSymmetryReport block_symmetry(const SymbolExpr& s, int N, const SamplerSpec& spec = {}) {
  BlockSymmetryReport r;
  for (int k = 0; k < s.m(); ++k) r.verdicts.push_back(check_cancellation(s, N, spec, k).pass);
  r.symmetric = true;
  for (bool v : r.verdicts) r.symmetric = r.symmetric && v == r.verdicts.front();
  return r;
}

inline bool check_block_symmetry(const SymbolExpr& s, int N, const SamplerSpec& spec = {}) {
  return block_symmetry(s, N, spec).symmetric;
}

struct DecayEntry {
  MultiIndex alpha;  // m*n components
  double sup_cm = 0.0;
  double sup_weak = 0.0;
  std::vector<double> shell_cm;  // per shell sup
  std::vector<double> shell_weak;
};

struct DecayReport {
  std::string symbol;
  int max_order = 0;
  std::vector<double> radii;
  std::vector<DecayEntry> entries;
  bool cm_consistent = false;
};

// Suprema of |d^alpha sigma| (sum |xi_j|)^{|alpha|} and
// |d^alpha sigma| prod |xi_j|^{|alpha_j|} over shells. The same unit
// directions are used on every shell so homogeneous symbols give equal
// per-shell values.
inline DecayReport estimate_decay(const SymbolExpr& s, int max_order, const SamplerSpec& spec = {},
                                  int cap = kDefaultDiffCap) {
  spec.validate();
  if (max_order < 0 || max_order > cap) throw ConfigError("decay order must be in 0..differentiation cap");
  const int m = s.m(), n = s.n();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> dirs;
  std::vector<double> x(static_cast<std::size_t>(m * n));
  for (int d = 0; d < spec.directions_per_shell; ++d) {
    for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
      for (auto& v : x) v = normal(rng);
      double norm = euclid_norm(x);
      for (auto& v : x) v /= norm;
      bool ok = true;
      for (double r : {spec.radii.front(), spec.radii.back()}) {
        std::vector<double> y = x;
        for (auto& v : y) v *= r;
        ok = ok && admissible(y, m, n, spec.reject_radius * r,
                              [&](std::span<const double> p) { return s.near_singular(p, spec.reject_radius * r); });
      }
      if (ok) {
        dirs.push_back(x);
        break;
      }
    }
  }
  if (dirs.empty()) throw SamplerError("estimate_decay: every direction was rejected");
  DecayReport rep;
  rep.symbol = s.name();
  rep.max_order = max_order;
  rep.radii = spec.radii;
  for (const auto& alpha : multiindices_up_to(m * n, max_order)) {
    auto d = diff_all(s, alpha, cap);
    DecayEntry e;
    e.alpha = alpha;
    for (double r : spec.radii) {
      double cm = 0.0, weak = 0.0;
      for (const auto& u : dirs) {
        std::vector<double> p = u;
        for (auto& v : p) v *= r;
        double val = std::abs(d.evaluate(p));
        double sum_norms = 0.0, prod = 1.0;
        for (int j = 0; j < m; ++j) {
          double bn = block_norm(p, n, j);
          sum_norms += bn;
          int aj = 0;
          for (int c = 0; c < n; ++c) aj += alpha[static_cast<std::size_t>(j * n + c)];
          prod *= std::pow(bn, aj);
        }
        cm = std::max(cm, val * std::pow(sum_norms, order(alpha)));
        weak = std::max(weak, val * prod);
      }
      if (!std::isfinite(cm) || !std::isfinite(weak))
        throw NumericalError("non-finite decay estimate for '" + s.name() + "'");
      e.shell_cm.push_back(cm);
      e.shell_weak.push_back(weak);
      e.sup_cm = std::max(e.sup_cm, cm);
      e.sup_weak = std::max(e.sup_weak, weak);
    }
    rep.entries.push_back(std::move(e));
  }
  // Stable: smallest and largest shell agree within a factor 10, or the
  // entry is zero at round-off level on both.
  rep.cm_consistent = true;
  for (const auto& e : rep.entries) {
    double lo = e.shell_cm.front(), hi = e.shell_cm.back();
    double scale = std::max(lo, hi);
    if (scale <= kSymbolicZeroTolerance) continue;
    if (std::min(lo, hi) * 10.0 < scale) rep.cm_consistent = false;
  }
  return rep;
}

}  // namespace multcancel
