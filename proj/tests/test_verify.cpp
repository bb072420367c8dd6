#include <gtest/gtest.h>

#include "multcancel/atoms/battery.hpp"
#include "multcancel/symbols/builtins.hpp"
#include "multcancel/verify/equivalence.hpp"
#include "multcancel/verify/maximal.hpp"
#include "multcancel/verify/moments.hpp"
#include "multcancel/verify/weakconv.hpp"
#include "oracles.hpp"

using namespace multcancel;

namespace {

// d/dx exp(-1/(1 - x^2)) on (-1, 1).
double bump1_prime(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double s = 1.0 - x * x;
  return std::exp(-1.0 / s) * (-2.0 * x / (s * s));
}

SymbolExpr one2() { return builtin("one", {{"m", "2"}, {"n", "1"}}); }

}  // namespace

TEST(Identity, OneIsParsevalExact) {
  auto g = make_grid(1, 4, 512);
  auto a = derivative_atom({1}, {0.0}, 1.0, g);
  std::vector<double> x(1);
  for (std::size_t i = 0; i < g.size(); i += 11) {
    g.point(i, x);
    ASSERT_NEAR(a.field()[i].real(), bump1_prime(x[0]), 1e-14);
  }
  const std::vector<SmoothAtom> pair{a, a};
  auto r = identity_check(one2(), pair, {0}, g);
  EXPECT_LE(r.rel_err, 1e-6);
  EXPECT_TRUE(r.pass);
  const double ref = oracle::simpson([](double t) { return bump1_prime(t) * bump1_prime(t); }, -1, 1, 200000);
  EXPECT_GT(ref, 0.0);
  EXPECT_NEAR(r.lhs.real(), ref, 1e-8 * ref);
  EXPECT_NEAR(r.rhs.real(), ref, 1e-8 * ref);
  // The first moment of the even function (bump')^2 is zero.
  auto r1 = identity_check(one2(), pair, {1}, g);
  EXPECT_LE(std::abs(r1.lhs), 1e-12);
  EXPECT_TRUE(r1.pass);
}

TEST(Identity, ZeroSymbol) {
  auto g = make_grid(1, 4, 256);
  SymbolExpr zero(2, 1, expr::constant(0.0), "zero");
  auto bat = default_battery(2, g, 1, {2.0, 2.0}, 2);
  for (const auto& t : bat.tuples) {
    auto r = identity_check(zero, t, {0}, g);
    EXPECT_EQ(r.lhs, cplx(0.0));
    EXPECT_EQ(r.rhs, cplx(0.0));
    EXPECT_EQ(r.rel_err, 0.0);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Identity, SmoothTestSymbol) {
  auto g = make_grid(1, 4, 1024);
  auto bat = default_battery(2, g, 1, {2.0, 2.0}, 4);
  auto s = builtin("smooth_test");
  for (const auto& t : bat.tuples) {
    auto applied = apply_tuple(s, t, g);
    for (int a : {0, 1}) {
      auto r = identity_report(applied, s, t, {a});
      EXPECT_LE(r.rel_err, kIdentityTolerance) << "alpha " << a;
      EXPECT_GT(std::abs(r.lhs), r.floor_scale);
    }
  }
  auto g3 = make_grid(1, 4, 64);
  auto bat3 = default_battery(3, g3, 1, {3.0, 3.0, 3.0}, 1);
  auto r3 = identity_check(builtin("smooth_test", {{"m", "3"}}), bat3.tuples[0], {0}, g3);
  EXPECT_LE(r3.rel_err, 3e-2);
}

TEST(MomentLhs, SigmaZeroVanishesOnAtomPair) {
  auto g = make_grid(2, 4, 64);
  auto bat = default_battery(2, g, 1, {2.0, 2.0}, 1);
  auto applied = apply_tuple(builtin("sigma0"), bat.tuples[0], g);
  auto e = moment_entry(0, applied, bat.tuples[0], {0, 0});
  EXPECT_TRUE(e.pass) << e.abs_lhs << " vs " << e.threshold;
  // Under sigma = 1 a pair of equal first derivatives has moment int (d_1 bump)^2.
  auto same = make_battery({{AtomSpec{{1, 0}, {0.0, 0.0}, 1.0}, AtomSpec{{1, 0}, {0.0, 0.0}, 1.0}}}, g, 0, {2.0, 2.0});
  auto one = apply_tuple(builtin("one", {{"m", "2"}, {"n", "2"}}), same.tuples[0], g);
  auto f = moment_entry(0, one, same.tuples[0], {0, 0});
  EXPECT_FALSE(f.pass);
  EXPECT_GT(f.abs_lhs, 1e3 * f.threshold);
}

TEST(MomentRhs, SigmaZeroIntegrandVanishesOnTheDiagonal) {
  auto g = make_grid(2, 2, 32);
  auto bat = default_battery(2, g, 1, {2.0, 2.0}, 4);
  for (const auto& t : bat.tuples) {
    auto r = moment_rhs(builtin("sigma0"), t, {0, 0});
    EXPECT_LE(std::abs(r.value), 1e-12 * moment_scale(t, 0));
  }
}

TEST(MomentRhs, DeltaRobustnessAndErrors) {
  auto g = make_grid(1, 8, 1024);
  auto bat = default_battery(2, g, 1, {2.0, 2.0}, 2);
  auto s = builtin("riesz_product", {{"terms", "1:1,1"}});
  for (const auto& t : bat.tuples) {
    auto wide = moment_rhs(s, t, {0}, {2.0 * g.freq_spacing(), -1.0});
    auto narrow = moment_rhs(s, t, {0}, {g.freq_spacing(), -1.0});
    EXPECT_FALSE(wide.excluded_tubes.empty());
    const double ref = std::max({std::abs(wide.value), std::abs(narrow.value), kFloorScaleFactor * moment_scale(t, 0)});
    EXPECT_LE(std::abs(wide.value - narrow.value) / ref, kDeltaRobustnessTolerance);
  }
  // A smooth symbol never needs a tube.
  EXPECT_TRUE(moment_rhs(builtin("smooth_test"), bat.tuples[0], {0}).excluded_tubes.empty());
  EXPECT_THROW(moment_rhs(s, bat.tuples[0], {0, 0}), ConfigError);
  EXPECT_THROW(moment_rhs(builtin("sigma0"), bat.tuples[0], {0}), ConfigError);
}

TEST(Equivalence, Examples) {
  auto g = make_grid(2, 4, 64);
  auto r0 = equivalence_harness(builtin("sigma0"), {2.0, 2.0}, g, {}, 2);
  EXPECT_EQ(r0.L, 0);
  EXPECT_TRUE(r0.cancellation.pass);
  EXPECT_TRUE(r0.moments_pass);
  EXPECT_TRUE(r0.agree);
  EXPECT_TRUE(r0.block_independent);

  auto pair = make_battery({{AtomSpec{{1, 0}, {0.0, 0.0}, 1.0}, AtomSpec{{1, 0}, {0.0, 0.0}, 1.0}}}, g, 0, {2.0, 2.0});
  auto r1 = equivalence_harness(builtin("one", {{"m", "2"}, {"n", "2"}}), {2.0, 2.0}, pair);
  EXPECT_FALSE(r1.cancellation.pass);
  EXPECT_FALSE(r1.moments_pass);
  EXPECT_TRUE(r1.agree);

  // 1/p = 3/2 in two dimensions gives L = 1.
  auto rh = equivalence_harness(builtin("sigma_hessian_general"), {4.0 / 3.0, 4.0 / 3.0}, g, {}, 2);
  EXPECT_EQ(rh.L, 1);
  EXPECT_TRUE(rh.cancellation.pass);
  EXPECT_TRUE(rh.moments_pass);
  EXPECT_TRUE(rh.agree);
  EXPECT_TRUE(rh.block_independent);
  EXPECT_EQ(rh.moment_battery.size(), 2u * 3u);

  EXPECT_THROW(equivalence_harness(builtin("sigma0"), {4.0, 4.0}, g), ConfigError);
  EXPECT_THROW(equivalence_harness(builtin("sigma0"), {2.0}, g), ConfigError);
  auto low = default_battery(2, g, 0, {4.0 / 3.0, 4.0 / 3.0}, 1);
  EXPECT_THROW(equivalence_harness(builtin("sigma0"), {4.0 / 3.0, 4.0 / 3.0}, low), ConfigError);
}

TEST(Equivalence, HolderTarget) {
  EXPECT_DOUBLE_EQ(holder_target({2.0, 2.0}), 1.0);
  EXPECT_DOUBLE_EQ(holder_target({1.0, 1.0}), 0.5);
  EXPECT_NEAR(holder_target({3.0, 3.0, 3.0}), 1.0, 1e-15);
  EXPECT_THROW(holder_target({3.0, 3.0}), ConfigError);
  EXPECT_THROW(holder_target({0.0, 1.0}), ConfigError);
  EXPECT_THROW(holder_target({}), ConfigError);
}

TEST(Linear, AutomaticVanishing) {
  // Fine enough that working-grid moments of the atoms are below 1e-6 S.
  auto g = make_grid(1, 4, 4096);
  auto bat = default_battery(1, g, 2, {1.0}, 4);
  std::vector<SmoothAtom> atoms;
  for (const auto& t : bat.tuples) atoms.push_back(t[0]);
  for (const auto& s : {builtin("riesz_product", {{"terms", "1:1"}}), builtin("one", {{"m", "1"}}),
                        builtin("smooth_test", {{"m", "1"}})}) {
    auto r = linear_vanishing(s, atoms, 2);
    EXPECT_TRUE(r.pass) << s.name();
    EXPECT_EQ(r.entries.size(), atoms.size() * 3);
  }
  EXPECT_THROW(linear_vanishing(builtin("sum_sq_1d"), atoms, 2), ConfigError);
  EXPECT_THROW(linear_vanishing(builtin("one", {{"m", "1"}}), atoms, 3), ConfigError);
}

TEST(MomentEntry, UnresolvedTailFails) {
  // Order-0 atoms in 1D: the majorant decays like |x|^-2, so the first moment
  // of the tail does not converge.
  auto g = make_grid(1, 4, 512);
  auto atoms = default_battery(1, g, 0, {1.0}, 1).tuples.front();
  auto applied = apply_tuple(builtin("one", {{"m", "1"}}), atoms, g);
  auto e0 = moment_entry(0, applied, atoms, {0});
  EXPECT_TRUE(std::isfinite(e0.threshold));
  auto e1 = moment_entry(0, applied, atoms, {1});
  EXPECT_TRUE(std::isinf(e1.tail_estimate));
  EXPECT_FALSE(e1.pass);
}

TEST(Maximal, DominatesEveryScaleAndZero) {
  auto g = make_grid(1, 8, 256);
  MaximalSpec spec;
  spec = spec.clipped(g);
  EXPECT_LE(spec.kernel_integral_error(1), 1e-10);
  EXPECT_LE(spec.kernel_integral_error(2), 1e-10);
  auto f = sample(bump({0.5}, 1.0), g);
  auto Mf = maximal(f, spec);
  // Direct periodic convolution with the discretely normalized kernel.
  const double P = 2.0 * g.half_extent();
  std::vector<double> x(1), y(1);
  for (double t : spec.scales()) {
    std::vector<double> kern(g.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.point(i, x);
      const double d = x[0] - P * std::round(x[0] / P);
      kern[i] = oracle::bump1(d / t);
      mass += kern[i];
    }
    for (std::size_t i = 0; i < g.size(); i += 5) {
      g.point(i, x);
      double c = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        g.point(k, y);
        double d = x[0] - y[0];
        d -= P * std::round(d / P);
        c += oracle::bump1(d / t) * f[k].real();
      }
      c /= mass;
      EXPECT_GE(Mf[i].real(), c - 1e-12) << "t " << t;
    }
  }
  EXPECT_EQ(maximal(SampledField::zeros(g), spec).max_abs(), 0.0);
  MaximalSpec wide;
  wide.j_max = 4;
  EXPECT_THROW(maximal(f, wide), GridError);
  wide.j_min = 5;
  EXPECT_THROW(wide.validate(g), ConfigError);
}

TEST(Quasinorm, HomogeneityAndZero) {
  auto g = make_grid(2, 4, 64);
  MaximalSpec spec = MaximalSpec{}.clipped(g);
  auto f = sample(derivative_callable({1, 0}, {0.3, 0.0}, 1.0), g);
  for (double p : {1.0, 0.5}) {
    const double q = hp_quasinorm(f, p, spec).value;
    EXPECT_GT(q, 0.0);
    // For p < 1 the far-field FFT round-off enters through t^p.
    EXPECT_NEAR(hp_quasinorm(scale(f, cplx(-3.0, 0.0)), p, spec).value, 3.0 * q, (p == 1.0 ? 1e-12 : 1e-8) * q);
    EXPECT_EQ(hp_quasinorm(SampledField::zeros(g), p, spec).value, 0.0);
  }
  EXPECT_THROW(hp_quasinorm(f, 1.5, spec), ConfigError);
  EXPECT_THROW(hp_quasinorm(f, 0.0, spec), ConfigError);
}

TEST(Quasinorm, CancellingOutputStabilizesWhileABumpGrows) {
  // Doubling the box adds one dyadic scale. A bump (nonzero mean) gains a
  // fixed amount of H^1 surrogate per scale; T_sigma0 of an atom pair does not.
  auto s = builtin("sigma0");
  std::vector<double> qT, qB;
  for (auto g : {make_grid(2, 3, 48), make_grid(2, 6, 96)}) {
    auto bat = default_battery(2, g, 0, {2.0, 2.0}, 1);
    auto T = apply_tuple(s, bat.tuples[0], g).T;
    auto spec = MaximalSpec{}.clipped(T.grid());
    qT.push_back(hp_quasinorm(T, 1.0, spec).value);
    qB.push_back(hp_quasinorm(sample(bump({0.0, 0.0}, 1.0), T.grid()), 1.0, spec).value);
  }
  EXPECT_NEAR(qT[1] / qT[0], 1.0, 0.1);
  EXPECT_GT(qB[1] / qB[0], qT[1] / qT[0]);
}

TEST(WeakConv, Examples) {
  auto g = make_grid(1, 4, 2048);
  const std::vector<double> ks{4, 8, 16, 32};
  auto in = default_weakconv_inputs();
  auto r = weakconv_demo(builtin("sum_sq_1d"), in, ks, g);
  ASSERT_EQ(r.relative_gaps.size(), 4u);
  // The decay is not strictly monotone (k = 8 sits near a zero of the bump
  // transform), but every later gap is below the first and the last is the
  // smallest.
  for (std::size_t i = 1; i < ks.size(); ++i) {
    EXPECT_LT(r.relative_gaps[i], r.relative_gaps.front());
    EXPECT_LE(r.relative_gaps.back(), r.relative_gaps[i]);
  }
  EXPECT_LE(r.relative_gaps.back(), 1e-3);
  for (const auto& p : r.pairings) EXPECT_TRUE(std::isfinite(std::abs(p)));

  auto r1 = weakconv_demo(builtin("one"), in, ks, g);
  // 1/2 int h e phi with the default bumps, by Simpson.
  const double half = 0.5 * oracle::simpson(
                                [](double x) {
                                  return oracle::bump1(x, -0.2, 1.2) * oracle::bump1(x, 0.2, 1.2) *
                                         oracle::bump1(x, 0.0, 2.0);
                                },
                                -1.0, 1.0, 200000);
  EXPECT_NEAR(r1.predicted_gap, half, 1e-6 * std::abs(half));
  EXPECT_NEAR(r1.gaps.back(), std::abs(half), 0.05 * std::abs(half));

  WeakConvInputs flat = in;
  flat.h = [](std::span<const double>) { return 0.0; };
  flat.e = flat.h;
  auto r0 = weakconv_demo(builtin("sum_sq_1d"), flat, ks, g);
  for (double gap : r0.gaps) EXPECT_EQ(gap, 0.0);

  EXPECT_THROW(weakconv_demo(builtin("one"), in, {g.freq_half_extent()}, g), ConfigError);
  EXPECT_THROW(weakconv_demo(builtin("one"), in, {4.1}, g), ConfigError);
  EXPECT_THROW(weakconv_demo(builtin("sigma0"), in, ks, make_grid(2, 4, 16)), ConfigError);
}
