#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "multcancel/atoms/atoms.hpp"
#include "multcancel/grid/grid.hpp"

namespace multcancel {

// b(x) = |T(x)| on the union of doubled cubes Q_k*, and
// prod_k |Q_k|^{1 - 1/p_k + (N+1)/(nm)} / (|x - c_k| + l(Q_k))^{n + (N+1)/m}
// elsewhere.
class TailMajorant {
 public:
  TailMajorant(std::vector<SupportCube> cubes, std::vector<double> p, int N, SampledField T_abs)
      : cubes_(std::move(cubes)), p_(std::move(p)), N_(N), T_abs_(std::move(T_abs)) {
    if (cubes_.empty()) throw ConfigError("tail_majorant needs at least one atom");
    if (cubes_.size() != p_.size()) throw ConfigError("tail_majorant: one exponent per atom");
    for (double pk : p_)
      if (!(pk > 0.0)) throw ConfigError("tail_majorant: exponents must be positive");
    if (N < 0) throw ConfigError("tail_majorant: N must be >= 0");
  }

  int m() const { return static_cast<int>(cubes_.size()); }
  int n() const { return cubes_.front().dim(); }
  int N() const { return N_; }
  const std::vector<SupportCube>& cubes() const { return cubes_; }
  const std::vector<double>& p() const { return p_; }
  const Grid& grid() const { return T_abs_.grid(); }

  // Decay exponent per factor, n + (N+1)/m.
  double factor_exponent() const { return n() + (N_ + 1.0) / m(); }
  // Total far-field decay exponent, mn + N + 1.
  double total_exponent() const { return m() * n() + N_ + 1.0; }

  bool in_doubled_cubes(std::span<const double> x) const {
    for (const auto& q : cubes_)
      if (q.doubled().contains(x)) return true;
    return false;
  }

  double off_cube(std::span<const double> x) const {
    double b = 1.0;
    const double e = factor_exponent();
    for (std::size_t k = 0; k < cubes_.size(); ++k) {
      const auto& q = cubes_[k];
      double d = 0.0;
      for (std::size_t c = 0; c < q.center.size(); ++c) d += (x[c] - q.center[c]) * (x[c] - q.center[c]);
      const double size = std::pow(q.volume(), 1.0 - 1.0 / p_[k] + (N_ + 1.0) / (n() * m()));
      b *= size / std::pow(std::sqrt(d) + q.side, e);
    }
    return b;
  }

  double at(std::size_t i) const {
    std::vector<double> x(static_cast<std::size_t>(n()));
    grid().point(i, x);
    return in_doubled_cubes(x) ? std::abs(T_abs_[i]) : off_cube(x);
  }

  // b on the grid of T.
  std::vector<double> values() const {
    std::vector<double> v(grid().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i);
    return v;
  }

  // b(2R u)/b(R u) along the unit vector u = e_1.
  double far_field_ratio(double R) const {
    std::vector<double> x(static_cast<std::size_t>(n()), 0.0), y(x);
    x[0] = R;
    y[0] = 2.0 * R;
    return off_cube(y) / off_cube(x);
  }

  // A radius beyond every doubled cube.
  double beyond_supports() const {
    double r = 0.0;
    for (const auto& q : cubes_) {
      double c = 0.0;
      for (double v : q.center) c = std::max(c, std::abs(v));
      r = std::max(r, c + q.side * std::sqrt(static_cast<double>(n())));
    }
    return r;
  }

  // Upper bound for int_{outside [-L,L)^n} |(2 pi x)^alpha| prod_k(...) dx
  // using |x| >= L there, |x - c_k| >= |x| - c with c = max |c_k|, and
  // |x| <= kappa (|x| - c) with kappa = L / (L - c):
  //   (2 pi)^{|a|} prod A_k surf_n kappa^{n-1+|a|} (L - c)^{n+|a|-me} / (me - n - |a|).
  double outside_integral(int alpha_order) const {
    const double L = grid().half_extent();
    double c = 0.0;
    for (const auto& q : cubes_) {
      double d = 0.0;
      for (double v : q.center) d += v * v;
      c = std::max(c, std::sqrt(d));
    }
    if (c >= L) return std::numeric_limits<double>::infinity();
    const double me = total_exponent();
    const int nn = n();
    if (me <= nn + alpha_order) return std::numeric_limits<double>::infinity();
    double A = 1.0;
    for (std::size_t k = 0; k < cubes_.size(); ++k)
      A *= std::pow(cubes_[k].volume(), 1.0 - 1.0 / p_[k] + (N_ + 1.0) / (nn * m()));
    const double surface = nn == 1 ? 2.0 : (nn == 2 ? 2.0 * M_PI : 4.0 * M_PI);
    const double kappa = L / (L - c);
    return std::pow(2.0 * M_PI, alpha_order) * A * surface * std::pow(kappa, nn - 1 + alpha_order) *
           std::pow(L - c, nn + alpha_order - me) / (me - nn - alpha_order);
  }

 private:
  std::vector<SupportCube> cubes_;
  std::vector<double> p_;
  int N_;
  SampledField T_abs_;
};

inline TailMajorant tail_majorant(const std::vector<SmoothAtom>& atoms, const std::vector<double>& p, int N,
                                  const SampledField& T) {
  std::vector<SupportCube> cubes;
  for (const auto& a : atoms) {
    if (a.dim() != T.grid().dim()) throw ConfigError("tail_majorant: atom and output dimensions differ");
    cubes.push_back(a.cube());
  }
  std::vector<cplx> abs_values(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) abs_values[i] = std::abs(T[i]);
  return TailMajorant(std::move(cubes), p, N, SampledField(T.grid(), std::move(abs_values)));
}

struct DecayCheck {
  double C = 0.0;             // max |T|/b over lattice points with b > 0
  double C_far = 0.0;         // the same maximum off the doubled cubes, on the fit nodes
  double C_ref = 0.0;
  std::size_t violations = 0;  // points with |T| > C_ref b
  std::vector<double> argmax;
  double far_field_ratio = 0.0;
  double predicted_ratio = 0.0;  // 2^{-(mn+N+1)}
  double far_field_radius = 0.0;
};

// c_ref <= 0 selects the reference 2C. C_far only looks at lattice points
// whose indices are multiples of node_stride; on a dealiased output these are
// the input nodes, where T is not an interpolant.
inline DecayCheck check_pointwise_decay(const SampledField& T, const TailMajorant& b, double c_ref = 0.0,
                                        int node_stride = 1) {
  if (node_stride < 1 || T.grid().points_per_axis() % node_stride != 0)
    throw ConfigError("check_pointwise_decay: node stride must divide the points per axis");
  if (!(T.grid() == b.grid())) throw ConfigError("check_pointwise_decay: T and the majorant use different grids");
  const Grid& g = T.grid();
  DecayCheck out;
  const auto bv = b.values();
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  std::size_t arg = 0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    if (bv[i] <= 0.0) continue;
    const double r = std::abs(T[i]) / bv[i];
    const auto idx = g.unflatten(i);
    bool node = true;
    for (int c = 0; c < g.dim(); ++c) node = node && idx[static_cast<std::size_t>(c)] % node_stride == 0;
    g.point(i, x);
    if (node && !b.in_doubled_cubes(x)) out.C_far = std::max(out.C_far, r);
    if (r > out.C) {
      out.C = r;
      arg = i;
    }
  }
  g.point(arg, x);
  out.argmax = x;
  out.C_ref = c_ref > 0.0 ? c_ref : 2.0 * out.C;
  for (std::size_t i = 0; i < T.size(); ++i)
    if (std::abs(T[i]) > out.C_ref * bv[i]) ++out.violations;
  out.far_field_radius = 10.0 * b.beyond_supports();
  out.far_field_ratio = b.far_field_ratio(out.far_field_radius);
  out.predicted_ratio = std::pow(2.0, -b.total_exponent());
  return out;
}

}  // namespace multcancel
