#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "multcancel/core/errors.hpp"
#include "multcancel/core/parallel.hpp"
#include "multcancel/grid/grid.hpp"
#include "multcancel/symbols/symbol.hpp"

namespace multcancel {

enum class Algorithm { Naive, FftLastBlock };

inline std::string to_string(Algorithm a) { return a == Algorithm::Naive ? "naive" : "fft_last_block"; }

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "naive") return Algorithm::Naive;
  if (s == "fft_last_block") return Algorithm::FftLastBlock;
  throw ConfigError("unknown algorithm '" + s + "' (expected naive or fft_last_block)");
}

// One application of T_sigma on a grid. With dealias set, the output lives on
// the same box with m*M points per axis, which carries every output
// frequency xi_1 + ... + xi_m exactly; otherwise it lives on the input grid.
struct MultiplierPlan {
  SymbolExpr symbol;
  Grid grid;
  Algorithm algorithm = Algorithm::FftLastBlock;
  cplx singular_value = 0.0;
  bool dealias = false;

  int m() const { return symbol.m(); }

  void validate() const {
    if (symbol.n() != grid.dim())
      throw ConfigError("symbol '" + symbol.name() + "' has block dimension " + std::to_string(symbol.n()) +
                        " but the grid has dimension " + std::to_string(grid.dim()));
    if (symbol.m() < 1 || symbol.m() > 3)
      throw ConfigError("multiplier arity m = " + std::to_string(symbol.m()) + " is outside 1..3");
  }

  Grid output_grid() const {
    if (!dealias) return grid;
    return make_grid(grid.dim(), grid.half_extent(), grid.points_per_axis() * symbol.m());
  }
};

struct ApplyInfo {
  Grid output_grid;
  std::size_t singular_points = 0;  // lattice tuples where sigma was replaced by singular_value
  double max_input_tail_ratio = 0.0;
  bool tail_warning = false;  // some input spectrum exceeds 1e-10 at the frequency boundary
};

inline constexpr double kInputTailWarning = 1e-10;

namespace detail {

// Fixed number of reduction chunks so results do not depend on thread count.
inline constexpr std::size_t kApplyChunks = 64;

inline std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// e^{2 pi i j / M} for j in [0, M), from exact rational angles.
inline std::vector<cplx> roots_of_unity(int M) {
  std::vector<cplx> w(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double a = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(M);
    w[static_cast<std::size_t>(j)] = cplx(std::cos(a), std::sin(a));
  }
  // exact values on the axes
  if (M % 4 == 0) {
    w[static_cast<std::size_t>(M / 4)] = cplx(0.0, 1.0);
    w[static_cast<std::size_t>(3 * M / 4)] = cplx(0.0, -1.0);
  }
  w[static_cast<std::size_t>(M / 2)] = cplx(-1.0, 0.0);
  return w;
}

inline void check_fields(const MultiplierPlan& plan, const std::vector<SampledField>& fields) {
  plan.validate();
  if (static_cast<int>(fields.size()) != plan.m())
    throw ConfigError("multiplier '" + plan.symbol.name() + "' takes " + std::to_string(plan.m()) + " fields, got " +
                      std::to_string(fields.size()));
  for (std::size_t j = 0; j < fields.size(); ++j)
    if (!(fields[j].grid() == plan.grid))
      throw ConfigError("field " + std::to_string(j + 1) + " lives on grid " + fields[j].grid().describe() +
                        ", the plan uses " + plan.grid.describe());
}

// Signed frequency index per axis of a flat slot.
inline std::array<int, kMaxDim> signed_index(const Grid& g, std::size_t flat) {
  auto s = g.unflatten(flat);
  for (int c = 0; c < g.dim(); ++c) s[static_cast<std::size_t>(c)] -= g.points_per_axis() / 2;
  return s;
}

// T(x) = dxi^{(m-1)n} sum_{outer} prod_{j<m} f^_j(xi_j) e^{2 pi i x.S}
//        * [dxi^n sum_{xi_m} sigma(outer, xi_m) f^_m(xi_m) e^{2 pi i x.xi_m}],
// the bracket being one inverse transform per outer tuple.
inline std::vector<cplx> apply_fft_last_block(const MultiplierPlan& plan, const std::vector<SpectralField>& hats,
                                              const Grid& out, std::size_t& singular_count) {
  const Grid& g = plan.grid;
  const int n = g.dim();
  const int m = plan.m();
  const int Mo = out.points_per_axis();
  const std::size_t inner = g.size();
  const std::size_t outer = ipow(inner, m - 1);
  const std::size_t out_size = out.size();
  const auto& tape = plan.symbol.tape();
  const bool real = tape.is_real();

  // Last-block frequency coordinates, one array per axis, and the raw FFT
  // bin of each last-block slot on the output lattice. The (-1)^{j} factor
  // moves the transform origin from x = 0 to x = -L.
  std::vector<std::vector<double>> last(static_cast<std::size_t>(n), std::vector<double>(inner));
  std::vector<std::size_t> raw_bin(inner);
  std::vector<double> raw_sign(inner);
  for (std::size_t i = 0; i < inner; ++i) {
    auto s = signed_index(g, i);
    std::array<int, kMaxDim> q{0, 0, 0};
    int parity = 0;
    for (int c = 0; c < n; ++c) {
      const int sc = s[static_cast<std::size_t>(c)];
      last[static_cast<std::size_t>(c)][i] = sc * g.freq_spacing();
      q[static_cast<std::size_t>(c)] = ((sc % Mo) + Mo) % Mo;
      parity += sc;
    }
    raw_bin[i] = out.flatten(q);
    raw_sign[i] = (parity % 2 == 0) ? 1.0 : -1.0;
  }
  const auto roots = roots_of_unity(Mo);
  const std::vector<int> out_shape = out.shape();
  auto& plans = FftPlans::instance();

  const std::size_t chunks = std::min(kApplyChunks, outer);
  std::vector<std::vector<cplx>> partial(chunks);
  std::vector<std::size_t> singular(chunks, 0);

  parallel_chunks(chunks, [&](std::size_t chunk) {
    std::vector<cplx> acc(out_size, 0.0);
    std::vector<cplx> buf(out_size);
    std::vector<double> outer_vals(static_cast<std::size_t>((m - 1) * n));
    std::vector<const double*> vars(static_cast<std::size_t>(m * n));
    std::vector<std::size_t> strides(static_cast<std::size_t>(m * n));
    for (int c = 0; c < n; ++c) {
      vars[static_cast<std::size_t>((m - 1) * n + c)] = last[static_cast<std::size_t>(c)].data();
      strides[static_cast<std::size_t>((m - 1) * n + c)] = 1;
    }
    for (int v = 0; v < (m - 1) * n; ++v) {
      vars[static_cast<std::size_t>(v)] = &outer_vals[static_cast<std::size_t>(v)];
      strides[static_cast<std::size_t>(v)] = 0;
    }
    std::vector<double> sig_r(inner);
    std::vector<cplx> sig_c(inner);
    std::vector<std::uint8_t> sing(inner);
    std::vector<double> work_r;
    std::vector<cplx> work_c;
    std::array<std::vector<cplx>, kMaxDim> ph;
    for (auto& v : ph) v.resize(static_cast<std::size_t>(Mo));
    const SpectralField& fm = hats[static_cast<std::size_t>(m - 1)];

    const std::size_t begin = outer * chunk / chunks;
    const std::size_t end = outer * (chunk + 1) / chunks;
    for (std::size_t o = begin; o < end; ++o) {
      // Decode the outer tuple: block 0 is the most significant digit.
      cplx coef = 1.0;
      std::array<long long, kMaxDim> total{0, 0, 0};
      std::size_t rest = o;
      for (int j = m - 2; j >= 0; --j) {
        const std::size_t slot = rest % inner;
        rest /= inner;
        coef *= hats[static_cast<std::size_t>(j)][slot];
        auto s = signed_index(g, slot);
        for (int c = 0; c < n; ++c) {
          outer_vals[static_cast<std::size_t>(j * n + c)] = s[static_cast<std::size_t>(c)] * g.freq_spacing();
          total[static_cast<std::size_t>(c)] += s[static_cast<std::size_t>(c)];
        }
      }
      if (coef == cplx(0.0)) continue;
      const bool ok = real ? tape.eval_batch<double>(vars, strides, inner, sig_r.data(), sing.data(), work_r)
                           : tape.eval_batch<cplx>(vars, strides, inner, sig_c.data(), sing.data(), work_c);
      if (!ok)
        throw DomainError("symbol '" + plan.symbol.name() +
                          "' takes the square root of a negative value on the lattice");
      std::fill(buf.begin(), buf.end(), cplx(0.0));
      for (std::size_t i = 0; i < inner; ++i) {
        cplx sv;
        if (sing[i]) {
          sv = plan.singular_value;
          ++singular[chunk];
        } else {
          sv = real ? cplx(sig_r[i]) : sig_c[i];
        }
        buf[raw_bin[i]] = raw_sign[i] * sv * fm[i];
      }
      plans.execute(out_shape, FFTW_BACKWARD, buf);
      // Outer phase e^{2 pi i x.S dxi} with x_k = -L + k h_out and
      // h_out dxi = 1/Mo: (-1)^{S_c} w^{k S_c} per axis.
      for (int c = 0; c < n; ++c) {
        const long long S = total[static_cast<std::size_t>(c)];
        const double sign = (S % 2 == 0) ? 1.0 : -1.0;
        long long e = 0;
        const long long step = ((S % Mo) + Mo) % Mo;
        for (int k = 0; k < Mo; ++k) {
          ph[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = sign * roots[static_cast<std::size_t>(e)];
          e += step;
          if (e >= Mo) e -= Mo;
        }
      }
      const auto uMo = static_cast<std::size_t>(Mo);
      if (n == 1) {
        for (std::size_t k = 0; k < uMo; ++k) acc[k] += coef * ph[0][k] * buf[k];
      } else if (n == 2) {
        for (std::size_t k0 = 0; k0 < uMo; ++k0) {
          const cplx p0 = coef * ph[0][k0];
          cplx* a = acc.data() + k0 * uMo;
          const cplx* b = buf.data() + k0 * uMo;
          for (std::size_t k1 = 0; k1 < uMo; ++k1) a[k1] += p0 * ph[1][k1] * b[k1];
        }
      } else {
        for (std::size_t k0 = 0; k0 < uMo; ++k0)
          for (std::size_t k1 = 0; k1 < uMo; ++k1) {
            const cplx p01 = coef * ph[0][k0] * ph[1][k1];
            cplx* a = acc.data() + (k0 * uMo + k1) * uMo;
            const cplx* b = buf.data() + (k0 * uMo + k1) * uMo;
            for (std::size_t k2 = 0; k2 < uMo; ++k2) a[k2] += p01 * ph[2][k2] * b[k2];
          }
      }
    }
    partial[chunk] = std::move(acc);
  });

  std::vector<cplx> result(out_size, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    singular_count += singular[c];
    for (std::size_t x = 0; x < out_size; ++x) result[x] += partial[c][x];
  }
  const double scale = std::pow(g.freq_spacing(), m * n);
  for (auto& v : result) v *= scale;
  return result;
}

// Direct evaluation: bin dxi^{mn} sigma prod f^_j by total frequency S, then
// T(x) = sum_S B(S) e^{2 pi i x.S dxi} by a separable direct DFT.
inline std::vector<cplx> apply_naive(const MultiplierPlan& plan, const std::vector<SpectralField>& hats, const Grid& out,
                                     std::size_t& singular_count) {
  const Grid& g = plan.grid;
  const int n = g.dim();
  const int m = plan.m();
  const int M = g.points_per_axis();
  const std::size_t inner = g.size();
  const std::size_t tuples = ipow(inner, m);
  // Total index per axis ranges over [-m M/2, m (M/2 - 1)].
  const int lo = -m * (M / 2);
  const int span = m * (M - 1) + 1;
  std::vector<std::size_t> shape(static_cast<std::size_t>(n), static_cast<std::size_t>(span));
  const std::size_t bins_size = ipow(static_cast<std::size_t>(span), n);
  std::vector<cplx> bins(bins_size, 0.0);
  std::vector<double> xi(static_cast<std::size_t>(m * n));
  const auto& symbol = plan.symbol;
  for (std::size_t t = 0; t < tuples; ++t) {
    cplx coef = 1.0;
    std::array<int, kMaxDim> total{0, 0, 0};
    std::size_t rest = t;
    for (int j = m - 1; j >= 0; --j) {
      const std::size_t slot = rest % inner;
      rest /= inner;
      coef *= hats[static_cast<std::size_t>(j)][slot];
      auto s = signed_index(g, slot);
      for (int c = 0; c < n; ++c) {
        xi[static_cast<std::size_t>(j * n + c)] = s[static_cast<std::size_t>(c)] * g.freq_spacing();
        total[static_cast<std::size_t>(c)] += s[static_cast<std::size_t>(c)];
      }
    }
    if (coef == cplx(0.0)) continue;
    auto value = symbol.try_evaluate(xi);
    cplx sv;
    if (value) {
      sv = *value;
    } else {
      sv = plan.singular_value;
      ++singular_count;
    }
    std::size_t b = 0;
    for (int c = 0; c < n; ++c) b = b * static_cast<std::size_t>(span) + static_cast<std::size_t>(total[static_cast<std::size_t>(c)] - lo);
    bins[b] += sv * coef;
  }
  // Separable direct DFT, one axis at a time: bins (span^n) -> out (Mo^n).
  const int Mo = out.points_per_axis();
  const double dxi = g.freq_spacing();
  std::vector<cplx> cur = bins;
  std::vector<std::size_t> dims(static_cast<std::size_t>(n), static_cast<std::size_t>(span));
  for (int axis = 0; axis < n; ++axis) {
    // phase[k][s] = e^{2 pi i x_k (lo + s) dxi}
    std::vector<cplx> phase(static_cast<std::size_t>(Mo) * static_cast<std::size_t>(span));
    for (int k = 0; k < Mo; ++k)
      for (int s = 0; s < span; ++s) {
        const double a = 2.0 * M_PI * out.coord(k) * (lo + s) * dxi;
        phase[static_cast<std::size_t>(k) * static_cast<std::size_t>(span) + static_cast<std::size_t>(s)] =
            cplx(std::cos(a), std::sin(a));
      }
    std::vector<std::size_t> new_dims = dims;
    new_dims[static_cast<std::size_t>(axis)] = static_cast<std::size_t>(Mo);
    std::size_t before = 1, after = 1;
    for (int c = 0; c < axis; ++c) before *= new_dims[static_cast<std::size_t>(c)];
    for (int c = axis + 1; c < n; ++c) after *= dims[static_cast<std::size_t>(c)];
    std::vector<cplx> next(before * static_cast<std::size_t>(Mo) * after, 0.0);
    for (std::size_t b = 0; b < before; ++b)
      for (int k = 0; k < Mo; ++k)
        for (std::size_t a = 0; a < after; ++a) {
          cplx sum = 0.0;
          for (int s = 0; s < span; ++s)
            sum += phase[static_cast<std::size_t>(k) * static_cast<std::size_t>(span) + static_cast<std::size_t>(s)] *
                   cur[(b * static_cast<std::size_t>(span) + static_cast<std::size_t>(s)) * after + a];
          next[(b * static_cast<std::size_t>(Mo) + static_cast<std::size_t>(k)) * after + a] = sum;
        }
    cur.swap(next);
    dims = new_dims;
  }
  const double scale = std::pow(dxi, m * n);
  for (auto& v : cur) v *= scale;
  return cur;
}

}  // namespace detail

// T_sigma(f_1, ..., f_m) on plan.output_grid().
inline SampledField apply(const MultiplierPlan& plan, const std::vector<SampledField>& fields,
                          ApplyInfo* info = nullptr) {
  detail::check_fields(plan, fields);
  const Grid out = plan.output_grid();
  std::vector<SpectralField> hats;
  double tail = 0.0;
  for (const auto& f : fields) {
    hats.push_back(forward(f));
    tail = std::max(tail, spectral_tail_ratio(hats.back()));
  }
  std::size_t singular = 0;
  std::vector<cplx> values = plan.algorithm == Algorithm::Naive
                                 ? detail::apply_naive(plan, hats, out, singular)
                                 : detail::apply_fft_last_block(plan, hats, out, singular);
  if (info) {
    info->output_grid = out;
    info->singular_points = singular;
    info->max_input_tail_ratio = tail;
    info->tail_warning = tail > kInputTailWarning;
  }
  return SampledField(out, std::move(values));
}

}  // namespace multcancel
