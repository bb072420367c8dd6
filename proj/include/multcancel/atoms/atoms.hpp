#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "multcancel/core/format.hpp"
#include "multcancel/grid/grid.hpp"

namespace multcancel {

// Moment tolerances for certification: closed-form atoms are limited by
// round-off, spectrally constructed ones by quadrature.
inline constexpr double kClosedFormMomentTolerance = 1e-8;
inline constexpr double kSpectralMomentTolerance = 1e-6;
// Pointwise leakage allowed outside the declared support cube, relative to
// the sup bound.
inline constexpr double kClosedFormSupportTolerance = 1e-12;
inline constexpr double kSpectralSupportTolerance = 1e-6;

struct SupportCube {
  std::vector<double> center;
  double side = 0.0;

  int dim() const { return static_cast<int>(center.size()); }
  double volume() const { return std::pow(side, dim()); }
  double diameter() const { return side * std::sqrt(static_cast<double>(dim())); }
  SupportCube doubled() const { return {center, 2.0 * side}; }

  bool contains(std::span<const double> x, double slack = 0.0) const {
    for (std::size_t c = 0; c < center.size(); ++c)
      if (std::abs(x[c] - center[c]) > side / 2.0 + slack) return false;
    return true;
  }
};

struct RequiredN {
  int N;
  int L;
};

// N = floor(n(1/p - 1)) + 1 and the conclusion cap L = N - 1.
inline RequiredN required_N(double p, int n) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("required_N: p must lie in (0, 1], got " + format_number(p));
  if (n < 1) throw ConfigError("required_N: n must be >= 1");
  const int L = static_cast<int>(std::floor(n * (1.0 / p - 1.0) + 1e-9));
  return {L + 1, L};
}

using RealFunction = std::function<double(std::span<const double>)>;

// exp(-1/(1 - |x-c|^2/r^2)) inside the ball, 0 outside.
inline RealFunction bump(std::vector<double> center, double radius) {
  if (!(radius > 0.0)) throw ConfigError("bump radius must be positive");
  return [center = std::move(center), radius](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t c = 0; c < center.size(); ++c) {
      double d = (x[c] - center[c]) / radius;
      s += d * d;
    }
    if (s >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s));
  };
}

namespace detail {

// F(s) = exp(-1/(1-s)) has F^(k)(s) = exp(-w) Q_k(w) with w = 1/(1-s), since
// dw/ds = w^2: Q_0 = 1, Q_{k+1} = w^2 (Q_k' - Q_k). Coefficients, low first.
inline const std::vector<std::vector<double>>& bump_profile_polys() {
  static const std::vector<std::vector<double>> polys = [] {
    std::vector<std::vector<double>> q{{1.0}};
    for (int k = 0; k < 2 * kMaxMomentOrder; ++k) {
      const auto& prev = q.back();
      std::vector<double> next(prev.size() + 2, 0.0);
      for (std::size_t j = 0; j < prev.size(); ++j) {
        next[j + 2] -= prev[j];
        if (j > 0) next[j + 1] += static_cast<double>(j) * prev[j];
      }
      q.push_back(std::move(next));
    }
    return q;
  }();
  return polys;
}

}  // namespace detail

// d^beta of the bump. With t = (x - c)/r and s = |t|^2,
// d^beta F(s) = r^{-|beta|} sum_{j <= beta/2} F^(|beta|-|j|)(s)
//               prod_c beta_c! / (j_c! (beta_c - 2 j_c)!) (2 t_c)^{beta_c - 2 j_c}.
class BumpDerivative {
 public:
  BumpDerivative(MultiIndex beta, std::vector<double> center, double radius)
      : beta_(std::move(beta)), center_(std::move(center)), radius_(radius), k_(order(beta_)) {
    if (!(radius > 0.0)) throw ConfigError("bump radius must be positive");
    if (beta_.size() != center_.size()) throw ConfigError("bump derivative: multiindex and center dimensions differ");
    if (k_ > 2 * kMaxMomentOrder) throw ConfigError("bump derivative: order too large");
    MultiIndex half(beta_);
    for (auto& v : half) v /= 2;
    for (const auto& j : box_below(half)) {
      Term term{k_ - order(j), 1.0, {}};
      for (std::size_t c = 0; c < beta_.size(); ++c) {
        const int b = beta_[c], jc = j[c];
        term.coef *= factorial(MultiIndex{b}) / (factorial(MultiIndex{jc}) * factorial(MultiIndex{b - 2 * jc})) *
                     std::pow(2.0, b - 2 * jc);
        term.power[c] = b - 2 * jc;
      }
      terms_.push_back(term);
    }
    scale_ = std::pow(radius_, -k_);
  }

  double operator()(std::span<const double> x) const {
    const std::size_t n = center_.size();
    std::array<double, kMaxDim> t{};
    double s0 = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      t[c] = (x[c] - center_[c]) / radius_;
      s0 += t[c] * t[c];
    }
    if (s0 >= 1.0) return 0.0;
    const double w = 1.0 / (1.0 - s0);
    if (w > 700.0) return 0.0;  // exp(-w) underflows; every term carries it
    const double e = std::exp(-w);
    const auto& Q = detail::bump_profile_polys();
    std::array<double, 2 * kMaxMomentOrder + 1> F{};
    for (int d = 0; d <= k_; ++d) {
      const auto& q = Q[static_cast<std::size_t>(d)];
      double v = 0.0;
      for (std::size_t i = q.size(); i-- > 0;) v = v * w + q[i];
      F[static_cast<std::size_t>(d)] = e * v;
    }
    double total = 0.0;
    for (const auto& term : terms_) {
      double v = term.coef * F[static_cast<std::size_t>(term.f_order)];
      for (std::size_t c = 0; c < n; ++c)
        for (int i = 0; i < term.power[c]; ++i) v *= t[c];
      total += v;
    }
    return total * scale_;
  }

 private:
  struct Term {
    int f_order;
    double coef;
    std::array<int, kMaxDim> power;
  };
  MultiIndex beta_;
  std::vector<double> center_;
  double radius_;
  int k_;
  double scale_ = 1.0;
  std::vector<Term> terms_;
};

inline double bump_derivative(const MultiIndex& beta, std::span<const double> center, double radius,
                              std::span<const double> x) {
  return BumpDerivative(beta, std::vector<double>(center.begin(), center.end()), radius)(x);
}

// Closed-form description of scale * d^beta bump(center, radius), kept on
// derivative atoms so they can be rebuilt from serialized metadata.
struct BumpRecipe {
  MultiIndex beta;
  std::vector<double> center;
  double radius = 1.0;
  double scale = 1.0;
};

// A compactly supported function with certified vanishing moments. Only the
// factories below (and SmoothAtom::certify) create atoms, and each one
// verifies moments and support before returning.
class SmoothAtom {
 public:
  enum class Representation { ClosedForm, Spectral };

  int dim() const { return field_.grid().dim(); }
  const SampledField& field() const { return field_; }
  const Grid& grid() const { return field_.grid(); }
  const SupportCube& cube() const { return cube_; }
  int vanishing_order() const { return vanishing_order_; }
  double sup_bound() const { return sup_bound_; }
  double p() const { return p_; }
  Representation representation() const { return representation_; }
  bool closed_form() const { return representation_ == Representation::ClosedForm; }
  const RealFunction& callable() const { return callable_; }
  const std::string& provenance() const { return provenance_; }
  // Certified residual: on the certification lattice for closed-form atoms,
  // on the atom's own grid for spectral ones.
  double moment_residual() const { return moment_residual_; }
  // Residual of the samples on the working grid (quadrature diagnostic).
  double grid_moment_residual() const { return grid_moment_residual_; }
  double support_leakage() const { return support_leakage_; }
  const std::optional<BumpRecipe>& recipe() const { return recipe_; }

  // Certifies the data and returns the atom, or throws ConstructionError.
  static SmoothAtom certify(SampledField field, SupportCube cube, int vanishing_order, Representation rep,
                            std::string provenance, RealFunction callable = {}, double p = 1.0);

  // Rescaled, translated or resampled copies of a certified closed-form atom
  // keep its certified residual (the normalized residual is invariant under
  // all three); support and working-grid moments are still re-checked.
  static SmoothAtom derive(const SmoothAtom& parent, SampledField field, SupportCube cube, std::string provenance,
                           RealFunction callable, double p, std::optional<BumpRecipe> recipe = std::nullopt);

  static SmoothAtom certify_recipe(SampledField field, SupportCube cube, int vanishing_order, std::string provenance,
                                   RealFunction callable, BumpRecipe recipe, double p = 1.0);

 private:
  static SmoothAtom certify_impl(SampledField field, SupportCube cube, int vanishing_order, Representation rep,
                                 std::string provenance, RealFunction callable, double p, const double* inherited);

  SmoothAtom(SampledField field) : field_(std::move(field)) {}

  SampledField field_;
  SupportCube cube_;
  int vanishing_order_ = -1;
  double sup_bound_ = 0.0;
  double p_ = 1.0;
  Representation representation_ = Representation::ClosedForm;
  RealFunction callable_;
  std::string provenance_;
  double moment_residual_ = 0.0;
  double grid_moment_residual_ = 0.0;
  double support_leakage_ = 0.0;
  std::optional<BumpRecipe> recipe_;
};

// max over |alpha| <= N of |int (x - c)^alpha a| / (h^n sum|a| diam^{|alpha|}),
// moments taken about the cube center c.
inline double verify_moments(const SampledField& f, const SupportCube& cube, int N) {
  const Grid& g = f.grid();
  const int n = g.dim();
  if (N < 0) return 0.0;
  double l1 = 0.0;
  for (const auto& v : f.values()) l1 += std::abs(v);
  l1 *= g.cell_volume();
  if (l1 == 0.0) return 0.0;
  const double diam = cube.diameter() > 0.0 ? cube.diameter() : 1.0;
  const auto alphas = multiindices_up_to(n, N);
  std::vector<cplx> acc(alphas.size(), 0.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == cplx(0.0)) continue;
    g.point(i, x);
    for (int c = 0; c < n; ++c) x[static_cast<std::size_t>(c)] -= cube.center[static_cast<std::size_t>(c)];
    for (std::size_t a = 0; a < alphas.size(); ++a) acc[a] += power(x, alphas[a]) * f[i];
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < alphas.size(); ++a)
    worst = std::max(worst, std::abs(acc[a]) * g.cell_volume() / (l1 * std::pow(diam, order(alphas[a]))));
  return worst;
}

inline double verify_moments(const SmoothAtom& atom, int N) { return verify_moments(atom.field(), atom.cube(), N); }

// Residual of the atom sampled on `grid`; closed-form atoms may be
// evaluated on any grid, sampled ones only on their own.
inline double verify_moments(const SmoothAtom& atom, int N, const Grid& grid) {
  if (atom.grid() == grid) return verify_moments(atom, N);
  if (!atom.callable()) throw ConfigError("verify_moments: atom '" + atom.provenance() + "' lives on another grid");
  if (grid.dim() != atom.dim()) throw ConfigError("verify_moments: dimension mismatch");
  return verify_moments(sample(atom.callable(), grid), atom.cube(), N);
}

// Fraction of sum |a| carried by lattice points outside the cube (closed).
inline double mass_outside(const SampledField& f, const SupportCube& cube) {
  const Grid& g = f.grid();
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  double total = 0.0, outside = 0.0;
  const double slack = 1e-12 * cube.side;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double a = std::abs(f[i]);
    total += a;
    g.point(i, x);
    if (!cube.contains(x, slack)) outside += a;
  }
  return total > 0.0 ? outside / total : 0.0;
}

// Lattice used to certify closed-form atoms: the support cube sampled with
// enough points per axis to resolve bump derivatives of order <= 5 at the
// 1e-8 level, independent of the grid the atom will be used on.
inline Grid certification_grid(const SupportCube& cube) {
  static constexpr int kPointsPerAxis[kMaxDim] = {2048, 512, 96};
  return make_grid(cube.dim(), cube.side / 2.0, kPointsPerAxis[cube.dim() - 1]);
}

inline double verify_moments(const RealFunction& f, const SupportCube& cube, int N) {
  Grid g = certification_grid(cube);
  auto shifted = sample(
      [&](std::span<const double> y) {
        std::vector<double> x(y.begin(), y.end());
        for (std::size_t c = 0; c < x.size(); ++c) x[c] += cube.center[c];
        return f(x);
      },
      g);
  return verify_moments(shifted, SupportCube{std::vector<double>(cube.center.size(), 0.0), cube.side}, N);
}

inline SmoothAtom SmoothAtom::certify(SampledField field, SupportCube cube, int vanishing_order, Representation rep,
                                      std::string provenance, RealFunction callable, double p) {
  return certify_impl(std::move(field), std::move(cube), vanishing_order, rep, std::move(provenance),
                      std::move(callable), p, nullptr);
}

inline SmoothAtom SmoothAtom::derive(const SmoothAtom& parent, SampledField field, SupportCube cube,
                                     std::string provenance, RealFunction callable, double p,
                                     std::optional<BumpRecipe> recipe) {
  const bool inherit = parent.closed_form() && callable;
  const double r = parent.moment_residual();
  auto a = certify_impl(std::move(field), std::move(cube), parent.vanishing_order(), parent.representation(),
                        std::move(provenance), std::move(callable), p, inherit ? &r : nullptr);
  a.recipe_ = std::move(recipe);
  return a;
}

inline SmoothAtom SmoothAtom::certify_recipe(SampledField field, SupportCube cube, int vanishing_order,
                                             std::string provenance, RealFunction callable, BumpRecipe recipe,
                                             double p) {
  auto a = certify_impl(std::move(field), std::move(cube), vanishing_order, Representation::ClosedForm,
                        std::move(provenance), std::move(callable), p, nullptr);
  a.recipe_ = std::move(recipe);
  return a;
}

inline SmoothAtom SmoothAtom::certify_impl(SampledField field, SupportCube cube, int vanishing_order,
                                           Representation rep, std::string provenance, RealFunction callable,
                                           double p, const double* inherited) {
  const Grid& g = field.grid();
  if (cube.dim() != g.dim()) throw ConfigError("support cube dimension does not match the grid");
  if (!(cube.side > 0.0)) throw ConfigError("support cube side must be positive");
  SmoothAtom a(std::move(field));
  a.cube_ = std::move(cube);
  a.vanishing_order_ = vanishing_order;
  a.representation_ = rep;
  a.provenance_ = std::move(provenance);
  a.callable_ = std::move(callable);
  a.p_ = p;
  a.sup_bound_ = a.field_.max_abs();
  if (a.sup_bound_ == 0.0) throw DegenerateInputError("atom '" + a.provenance_ + "' is identically zero on the grid");

  const bool closed = rep == Representation::ClosedForm;
  if (closed && !a.callable_) throw ConfigError("closed-form atom '" + a.provenance_ + "' needs its callable");
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  double leak = 0.0;
  const double slack = 1e-12 * a.cube_.side;
  for (std::size_t i = 0; i < a.field_.size(); ++i) {
    g.point(i, x);
    if (!a.cube_.contains(x, slack)) leak = std::max(leak, std::abs(a.field_[i]));
  }
  const double support_tol = closed ? kClosedFormSupportTolerance : kSpectralSupportTolerance;
  if (leak > support_tol * a.sup_bound_)
    throw ConstructionError("atom '" + a.provenance_ + "' has values up to " + format_number(leak / a.sup_bound_) +
                            " (relative) outside its support cube; refine the grid");
  a.support_leakage_ = mass_outside(a.field_, a.cube_);

  a.grid_moment_residual_ = verify_moments(a.field_, a.cube_, vanishing_order);
  if (inherited)
    a.moment_residual_ = *inherited;
  else
    a.moment_residual_ = closed ? verify_moments(a.callable_, a.cube_, vanishing_order) : a.grid_moment_residual_;
  const double tol = closed ? kClosedFormMomentTolerance : kSpectralMomentTolerance;
  if (!(a.moment_residual_ <= tol))
    throw ConstructionError("atom '" + a.provenance_ + "' fails its order-" + std::to_string(vanishing_order) +
                            " moment certification: residual " + format_number(a.moment_residual_));
  return a;
}

inline RealFunction derivative_callable(MultiIndex beta, std::vector<double> center, double radius) {
  auto d = std::make_shared<const BumpDerivative>(std::move(beta), std::move(center), radius);
  return [d](std::span<const double> x) { return (*d)(x); };
}

// d^beta bump(center, radius), vanishing order |beta| - 1.
inline SmoothAtom derivative_atom(const MultiIndex& beta, const std::vector<double>& center, double radius,
                                  const Grid& grid) {
  if (order(beta) < 1) throw ConfigError("derivative_atom needs |beta| >= 1");
  if (static_cast<int>(beta.size()) != grid.dim() || static_cast<int>(center.size()) != grid.dim())
    throw ConfigError("derivative_atom: beta and center must match the grid dimension");
  if (!(radius > 0.0)) throw ConfigError("derivative_atom: radius must be positive");
  for (std::size_t c = 0; c < center.size(); ++c)
    if (std::abs(center[c]) + radius > grid.half_extent())
      throw GridError("derivative_atom: support of radius " + format_number(radius) + " at " +
                      format_point(center) + " leaves the grid " + grid.describe());
  auto f = derivative_callable(beta, center, radius);
  auto field = sample(f, grid);
  std::string prov = "derivative_atom beta=" + to_string(beta) + " center=" + format_point(center) +
                     " radius=" + format_number(radius);
  return SmoothAtom::certify_recipe(std::move(field), SupportCube{center, 2.0 * radius}, order(beta) - 1, prov, f,
                                    BumpRecipe{beta, center, radius, 1.0});
}

// Rebuilds scale * d^beta bump from its recipe on `grid`.
inline SmoothAtom atom_from_recipe(const BumpRecipe& r, const Grid& grid, double p = 1.0) {
  auto base = derivative_callable(r.beta, r.center, r.radius);
  RealFunction f = [base, k = r.scale](std::span<const double> x) { return k * base(x); };
  for (std::size_t c = 0; c < r.center.size(); ++c)
    if (std::abs(r.center[c]) + r.radius > grid.half_extent())
      throw GridError("atom support leaves the grid " + grid.describe());
  std::string prov = "derivative_atom beta=" + to_string(r.beta) + " center=" + format_point(r.center) +
                     " radius=" + format_number(r.radius) + " scale=" + format_number(r.scale);
  return SmoothAtom::certify_recipe(sample(f, grid), SupportCube{r.center, 2.0 * r.radius}, order(r.beta) - 1, prov, f,
                                    r, p);
}

// Scales so that the lattice maximum of |a| is exactly 1 and records the
// target exponent p. No |Q|^{-1/p} factor is applied.
inline SmoothAtom normalize(const SmoothAtom& atom, double p) {
  if (!(p > 0.0)) throw ConfigError("normalize: p must be positive");
  const double s = atom.field().max_abs();
  if (s == 0.0) throw DegenerateInputError("normalize: zero atom");
  std::vector<cplx> v = atom.field().values();
  for (auto& x : v) x /= s;
  // Exact unit maximum: pin the arg-max entry.
  std::size_t arg = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(atom.field()[i]) == s) {
      arg = i;
      break;
    }
  v[arg] = atom.field()[arg] / std::abs(atom.field()[arg]);
  RealFunction f;
  if (atom.callable()) f = [g = atom.callable(), s](std::span<const double> x) { return g(x) / s; };
  auto recipe = atom.recipe();
  if (recipe) recipe->scale /= s;
  return SmoothAtom::derive(atom, SampledField(atom.grid(), std::move(v)), atom.cube(),
                            atom.provenance() + " normalized", f, p, recipe);
}

// Translation by `offset`. Closed-form atoms are resampled; sampled atoms
// accept only lattice offsets.
inline SmoothAtom translate(const SmoothAtom& atom, const std::vector<double>& offset) {
  const Grid& g = atom.grid();
  if (static_cast<int>(offset.size()) != g.dim()) throw ConfigError("translate: offset dimension mismatch");
  SupportCube cube = atom.cube();
  for (std::size_t c = 0; c < offset.size(); ++c) {
    cube.center[c] += offset[c];
    if (std::abs(cube.center[c]) + cube.side / 2.0 > g.half_extent())
      throw GridError("translate: translated support leaves the grid " + g.describe());
  }
  std::string prov = atom.provenance() + " translated by " + format_point(offset);
  if (atom.callable()) {
    RealFunction f = [src = atom.callable(), offset](std::span<const double> x) {
      std::vector<double> y(x.begin(), x.end());
      for (std::size_t c = 0; c < y.size(); ++c) y[c] -= offset[c];
      return src(y);
    };
    auto recipe = atom.recipe();
    if (recipe)
      for (std::size_t c = 0; c < offset.size(); ++c) recipe->center[c] += offset[c];
    return SmoothAtom::derive(atom, sample(f, g), cube, prov, f, atom.p(), recipe);
  }
  std::array<int, kMaxDim> shift{0, 0, 0};
  for (int c = 0; c < g.dim(); ++c) {
    double k = offset[static_cast<std::size_t>(c)] / g.spacing();
    if (std::abs(k - std::round(k)) > 1e-9)
      throw ConfigError("translate: sampled atoms accept only lattice offsets");
    shift[static_cast<std::size_t>(c)] = static_cast<int>(std::lround(k));
  }
  std::vector<cplx> v(g.size(), 0.0);
  const int M = g.points_per_axis();
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto idx = g.unflatten(i);
    bool inside = true;
    for (int c = 0; c < g.dim(); ++c) {
      int& k = idx[static_cast<std::size_t>(c)];
      k += shift[static_cast<std::size_t>(c)];
      if (k < 0 || k >= M) inside = false;
    }
    if (inside) v[g.flatten(idx)] = atom.field()[i];
  }
  return SmoothAtom::certify(SampledField(g, std::move(v)), cube, atom.vanishing_order(), atom.representation(), prov,
                             {}, atom.p());
}

// Re-evaluates a closed-form atom on another grid.
inline SmoothAtom resample(const SmoothAtom& atom, const Grid& grid) {
  if (atom.grid() == grid) return atom;
  if (!atom.callable()) throw ConfigError("resample: atom '" + atom.provenance() + "' has no closed form");
  if (grid.dim() != atom.dim()) throw ConfigError("resample: dimension mismatch");
  return SmoothAtom::derive(atom, sample(atom.callable(), grid), atom.cube(), atom.provenance(), atom.callable(),
                            atom.p(), atom.recipe());
}

}  // namespace multcancel
