#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "multcancel/core/errors.hpp"
#include "multcancel/core/format.hpp"
#include "multcancel/core/multiindex.hpp"
#include "multcancel/grid/fft.hpp"

namespace multcancel {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxMomentOrder = 16;

// Centered lattice on [-L, L)^n with M points per axis, and its dual
// frequency lattice with spacing 1/(2L).
class Grid {
 public:
  Grid() = default;
  Grid(int dim, double half_extent, int points_per_axis)
      : dim_(dim), half_extent_(half_extent), points_(points_per_axis) {}

  int dim() const { return dim_; }
  double half_extent() const { return half_extent_; }
  int points_per_axis() const { return points_; }
  double spacing() const { return 2.0 * half_extent_ / points_; }
  double freq_spacing() const { return 1.0 / (2.0 * half_extent_); }
  double freq_half_extent() const { return points_ / (4.0 * half_extent_); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int c = 0; c < dim_; ++c) s *= static_cast<std::size_t>(points_);
    return s;
  }

  double cell_volume() const { return std::pow(spacing(), dim_); }
  double freq_cell_volume() const { return std::pow(freq_spacing(), dim_); }

  double coord(int k) const { return -half_extent_ + spacing() * k; }
  // Frequency of lattice slot s in [0, M); the signed index is s - M/2.
  double freq(int s) const { return (s - points_ / 2) * freq_spacing(); }

  // Row-major: the last axis varies fastest.
  std::array<int, kMaxDim> unflatten(std::size_t flat) const {
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (int c = dim_ - 1; c >= 0; --c) {
      idx[static_cast<std::size_t>(c)] = static_cast<int>(flat % static_cast<std::size_t>(points_));
      flat /= static_cast<std::size_t>(points_);
    }
    return idx;
  }

  std::size_t flatten(const std::array<int, kMaxDim>& idx) const {
    std::size_t flat = 0;
    for (int c = 0; c < dim_; ++c)
      flat = flat * static_cast<std::size_t>(points_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(c)]);
    return flat;
  }

  void point(std::size_t flat, std::span<double> out) const {
    auto idx = unflatten(flat);
    for (int c = 0; c < dim_; ++c) out[static_cast<std::size_t>(c)] = coord(idx[static_cast<std::size_t>(c)]);
  }

  void freq_point(std::size_t flat, std::span<double> out) const {
    auto idx = unflatten(flat);
    for (int c = 0; c < dim_; ++c) out[static_cast<std::size_t>(c)] = freq(idx[static_cast<std::size_t>(c)]);
  }

  std::vector<int> shape() const { return std::vector<int>(static_cast<std::size_t>(dim_), points_); }

  std::string describe() const {
    std::ostringstream os;
    os << "(" << dim_ << ", " << half_extent_ << ", " << points_ << ")";
    return os.str();
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.half_extent_ == b.half_extent_ && a.points_ == b.points_;
  }

 private:
  int dim_ = 1;
  double half_extent_ = 1.0;
  int points_ = 8;
};

inline Grid make_grid(int dim, double half_extent, int points_per_axis) {
  if (dim < 1 || dim > kMaxDim)
    throw ConfigError("grid dimension must be in 1.." + std::to_string(kMaxDim) + ", got " + std::to_string(dim));
  if (!(half_extent > 0.0) || !std::isfinite(half_extent))
    throw ConfigError("grid half_extent must be positive and finite");
  if (points_per_axis < 8 || points_per_axis % 2 != 0)
    throw ConfigError("grid points_per_axis must be even and >= 8, got " + std::to_string(points_per_axis));
  return Grid(dim, half_extent, points_per_axis);
}

namespace detail {

struct PhysicalTag {};
struct SpectralTag {};

}  // namespace detail

// Immutable complex samples on a grid. Tag distinguishes physical and
// frequency lattices so the two cannot be mixed up.
template <class Tag>
class LatticeField {
 public:
  LatticeField(Grid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw ConfigError("field has " + std::to_string(values_.size()) + " values, grid " + grid_.describe() +
                        " needs " + std::to_string(grid_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
        std::vector<double> x(static_cast<std::size_t>(grid_.dim()));
        if constexpr (std::is_same_v<Tag, detail::PhysicalTag>)
          grid_.point(i, x);
        else
          grid_.freq_point(i, x);
        throw NumericalError("non-finite field value at lattice point " + format_point(x));
      }
    }
  }

  static LatticeField zeros(const Grid& grid) { return LatticeField(grid, std::vector<cplx>(grid.size())); }

  const Grid& grid() const { return grid_; }
  const std::vector<cplx>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  Grid grid_;
  std::vector<cplx> values_;
};

using SampledField = LatticeField<detail::PhysicalTag>;
using SpectralField = LatticeField<detail::SpectralTag>;

// Elementwise helpers used throughout; results are validated like any field.
template <class Tag>
LatticeField<Tag> scale(const LatticeField<Tag>& f, cplx c) {
  std::vector<cplx> v = f.values();
  for (auto& x : v) x *= c;
  return LatticeField<Tag>(f.grid(), std::move(v));
}

template <class Tag>
LatticeField<Tag> axpy(cplx a, const LatticeField<Tag>& f, const LatticeField<Tag>& g) {
  if (!(f.grid() == g.grid())) throw ConfigError("grid mismatch in field combination");
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * f[i] + g[i];
  return LatticeField<Tag>(f.grid(), std::move(v));
}

template <class Tag>
LatticeField<Tag> multiply(const LatticeField<Tag>& f, const LatticeField<Tag>& g) {
  if (!(f.grid() == g.grid())) throw ConfigError("grid mismatch in field product");
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] * g[i];
  return LatticeField<Tag>(f.grid(), std::move(v));
}

// f may return double or complex; it receives the lattice point.
template <class F>
SampledField sample(F&& f, const Grid& grid) {
  std::vector<cplx> v(grid.size());
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.point(i, x);
    cplx value = cplx(f(std::span<const double>(x)));
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
      throw NumericalError("non-finite sample at lattice point " + format_point(x));
    v[i] = value;
  }
  return SampledField(grid, std::move(v));
}

namespace detail {

// (-1)^j per axis combined with the half-period index shift that maps
// centered lattice slots onto raw DFT bins.
inline void centered_permute(const Grid& g, std::span<const cplx> in, std::span<cplx> out, bool to_raw) {
  const int M = g.points_per_axis();
  const int half = M / 2;
  const std::size_t total = g.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    auto s = g.unflatten(flat);
    std::array<int, kMaxDim> q{0, 0, 0};
    int parity = 0;
    for (int c = 0; c < g.dim(); ++c) {
      const auto cu = static_cast<std::size_t>(c);
      q[cu] = (s[cu] + half) % M;
      parity += s[cu] - half;
    }
    const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
    const std::size_t raw = g.flatten(q);
    if (to_raw)
      out[raw] = sign * in[flat];
    else
      out[flat] = sign * in[raw];
  }
}

// In-place forward/inverse transform with the centered convention. These act
// on raw buffers so the multiplier can transform on derived grids.
inline void forward_inplace(const Grid& g, std::vector<cplx>& data) {
  FftPlans::instance().execute(g.shape(), FFTW_FORWARD, data);
  std::vector<cplx> out(data.size());
  centered_permute(g, data, out, false);
  const double h = g.cell_volume();
  for (auto& v : out) v *= h;
  data.swap(out);
}

inline void inverse_inplace(const Grid& g, std::vector<cplx>& data) {
  std::vector<cplx> raw(data.size());
  centered_permute(g, data, raw, true);
  FftPlans::instance().execute(g.shape(), FFTW_BACKWARD, raw);
  const double d = g.freq_cell_volume();
  for (auto& v : raw) v *= d;
  data.swap(raw);
}

}  // namespace detail

// f^(xi_j) ~ h^n sum_k f(x_k) e^{-2 pi i x_k . xi_j}
inline SpectralField forward(const SampledField& f) {
  std::vector<cplx> data = f.values();
  detail::forward_inplace(f.grid(), data);
  return SpectralField(f.grid(), std::move(data));
}

// f(x_k) ~ dxi^n sum_j F(xi_j) e^{+2 pi i x_k . xi_j}
inline SampledField inverse(const SpectralField& F) {
  std::vector<cplx> data = F.values();
  detail::inverse_inplace(F.grid(), data);
  return SampledField(F.grid(), std::move(data));
}

// h^n sum_k x_k^alpha f(x_k)
inline cplx moment(const SampledField& f, const MultiIndex& alpha) {
  const Grid& g = f.grid();
  if (static_cast<int>(alpha.size()) != g.dim())
    throw ConfigError("moment multiindex " + to_string(alpha) + " does not match grid dimension");
  if (order(alpha) > kMaxMomentOrder)
    throw ConfigError("moment order " + std::to_string(order(alpha)) + " exceeds cap " +
                      std::to_string(kMaxMomentOrder));
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  cplx acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == cplx(0.0)) continue;
    g.point(i, x);
    acc += power(x, alpha) * f[i];
  }
  return acc * g.cell_volume();
}

// f(x) (-2 pi i x)^gamma, whose forward transform is d^gamma f^.
inline SampledField weight_by_monomial(const SampledField& f, const MultiIndex& gamma) {
  const Grid& g = f.grid();
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  std::vector<cplx> v(f.size());
  const cplx factor = std::pow(cplx(0.0, -2.0 * M_PI), order(gamma));
  for (std::size_t i = 0; i < v.size(); ++i) {
    g.point(i, x);
    v[i] = factor * power(x, gamma) * f[i];
  }
  return SampledField(g, std::move(v));
}

// Largest |F| on the outermost frequency shell relative to max |F|. Inputs
// whose spectra are not resolved show values well above 1e-10 here.
inline double spectral_tail_ratio(const SpectralField& F) {
  const Grid& g = F.grid();
  const double peak = F.max_abs();
  if (peak == 0.0) return 0.0;
  const int M = g.points_per_axis();
  double edge = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    auto s = g.unflatten(i);
    bool boundary = false;
    for (int c = 0; c < g.dim(); ++c) {
      int si = s[static_cast<std::size_t>(c)];
      if (si <= 1 || si >= M - 2) boundary = true;
    }
    if (boundary) edge = std::max(edge, std::abs(F[i]));
  }
  return edge / peak;
}

}  // namespace multcancel
