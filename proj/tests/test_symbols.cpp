#include <gtest/gtest.h>

#include <random>

#include "multcancel/symbols/blackbox.hpp"
#include "multcancel/symbols/builtins.hpp"
#include "multcancel/symbols/parser.hpp"
#include "oracles.hpp"

using namespace multcancel;

namespace {

// Random points with every block norm >= 0.3 and away from the singular set.
std::vector<std::vector<double>> random_points(const SymbolExpr& s, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> out;
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> x(static_cast<std::size_t>(s.num_vars()));
    for (auto& v : x) v = nd(rng);
    bool ok = true;
    for (int j = 0; j < s.m(); ++j) ok = ok && block_norm(x, s.n(), j) >= 0.3;
    if (ok && !s.near_singular(x, 0.05)) out.push_back(x);
  }
  return out;
}

std::vector<int> vars_of(const MultiIndex& a) {
  std::vector<int> v;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < a[i]; ++k) v.push_back(static_cast<int>(i));
  return v;
}

std::vector<SymbolExpr> all_builtins() {
  std::vector<SymbolExpr> out;
  for (const auto& name : builtin_names()) out.push_back(builtin(name));
  out.push_back(builtin("sigma_hessian_general", {{"n_js", "2,1"}}));
  out.push_back(builtin("riesz_product", {{"n", "2"}, {"terms", "1:1,2;0.5:2,0"}}));
  return out;
}

}  // namespace

TEST(Evaluate, Examples) {
  auto s0 = builtin("sigma0");
  EXPECT_EQ(s0.m(), 2);
  EXPECT_EQ(s0.n(), 2);
  EXPECT_DOUBLE_EQ(s0.evaluate(std::vector<double>{1, 0, 0, 1}).real(), 0.5);
  EXPECT_EQ(s0.evaluate(std::vector<double>{1, 0, -1, 0}), cplx(0.0));
  auto one = builtin("one");
  EXPECT_EQ(one.evaluate(std::vector<double>{0.3, -7}), cplx(1.0));
  EXPECT_THROW(s0.evaluate(std::vector<double>{0, 0, 0, 0}), DomainError);
  EXPECT_TRUE(s0.singular(std::vector<double>{0, 0, 0, 0}));
  EXPECT_FALSE(s0.singular(std::vector<double>{1e-3, 0, 0, 0}));
  auto s1 = builtin("sigma1");
  EXPECT_TRUE(s1.singular(std::vector<double>{0, 0, 1, 1}));
}

TEST(Builtin, UnknownAndBadParams) {
  EXPECT_THROW(builtin("sigma9"), ConfigError);
  EXPECT_THROW(builtin("sigma_hessian_general", {{"n_js", "1,0"}}), ConfigError);
  EXPECT_THROW(builtin("sigma0", {{"x", "1"}}), ConfigError);
}

TEST(Builtin, HessianGeneralIsDetSquaredOverNormSquared) {
  auto s = builtin("sigma_hessian_general", {{"n_js", "1,1"}});
  for (const auto& x : random_points(s, 20, 3)) {
    const double det = x[0] * x[3] - x[1] * x[2];
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    EXPECT_NEAR(s.evaluate(x).real(), det * det / (r2 * r2), 1e-14);
  }
}

TEST(Diff, MatchesFiniteDifferences) {
  for (const auto& s : all_builtins()) {
    oracle::Fn f = [&](std::span<const double> x) { return s.evaluate(x); };
    const auto alphas = multiindices_up_to(s.num_vars(), 2);
    std::vector<SymbolExpr> ds;
    for (const auto& a : alphas) ds.push_back(diff_all(s, a));
    for (const auto& x : random_points(s, 100, 11)) {
      for (std::size_t k = 1; k < alphas.size(); ++k) {
        const cplx sym = ds[k].evaluate(x), fd = oracle::partial(f, x, vars_of(alphas[k]));
        EXPECT_LE(std::abs(sym - fd), 1e-6 * std::max(1.0, std::abs(sym)))
            << s.name() << " alpha " << to_string(alphas[k]);
      }
    }
  }
}

TEST(Diff, Examples) {
  auto one = builtin("one");
  EXPECT_TRUE(diff(one, 1, {1}).is_zero());
  auto s0 = builtin("sigma0");
  std::vector<double> p{1, 0, -1, 0};
  EXPECT_LE(std::abs(diff(s0, 1, {1, 0}).evaluate(p)), 1e-12);
  oracle::Fn f = [&](std::span<const double> x) { return s0.evaluate(x); };
  EXPECT_LE(std::abs(oracle::partial(f, p, {2}, 1e-4)), 1e-8);
  auto s2 = builtin("sigma2");
  auto d = diff(s2, 1, {0, 1});
  SamplerSpec spec;
  for (const auto& x : sample_diagonal(s2, spec).points) EXPECT_LE(std::abs(d.evaluate(x)), 1e-12);
}

TEST(Diff, Commutes) {
  for (const auto& s : all_builtins()) {
    const int n = s.n();
    auto a = unit_index(n, 0), b = n > 1 ? unit_index(n, n - 1) : unit_index(n, 0);
    auto lhs = diff(diff(s, s.m() - 1, a), s.m() - 1, b);
    auto rhs = diff(s, s.m() - 1, add(a, b));
    for (const auto& x : random_points(s, 20, 5)) {
      const cplx u = lhs.evaluate(x), v = rhs.evaluate(x);
      EXPECT_LE(std::abs(u - v), 1e-10 * std::max(1.0, std::abs(v))) << s.name();
    }
  }
}

TEST(Symbols, Homogeneity) {
  for (const char* name : {"sigma0", "sigma1", "sigma2", "sigma3", "sigma_hessian_general", "riesz_product",
                           "sum_sq_1d"}) {
    auto s = builtin(name);
    for (const auto& x : random_points(s, 30, 9)) {
      for (double lam : {2.0, 10.0}) {
        auto y = x;
        for (auto& v : y) v *= lam;
        EXPECT_LE(std::abs(s.evaluate(y) - s.evaluate(x)), 1e-12) << name;
      }
    }
  }
}

TEST(RestrictDiag, Examples) {
  auto r0 = restrict_diag(builtin("sigma0"));
  auto r1 = restrict_diag(builtin("one"));
  auto rs = restrict_diag(builtin("sum_sq_1d"));
  EXPECT_EQ(r0.m(), 1);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x2{nd(rng), nd(rng)}, x1{nd(rng)};
    EXPECT_LE(std::abs(r0.evaluate(x2)), 1e-15);
    EXPECT_EQ(r1.evaluate(x1), cplx(1.0));
    EXPECT_LE(std::abs(rs.evaluate(x1)), 1e-15);
  }
  auto s = builtin("mixed_demo");
  auto r = restrict_diag(s);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> a{nd(rng), nd(rng)};
    std::vector<double> full{a[0], a[1], -(a[0] + a[1])};
    EXPECT_LE(std::abs(r.evaluate(a) - s.evaluate(full)), 1e-14);
  }
}

TEST(Cancellation, Examples) {
  SamplerSpec spec;
  auto r0 = check_cancellation(builtin("sigma0"), 0, spec);
  EXPECT_TRUE(r0.pass);
  EXPECT_GE(r0.samples.size(), 500u);
  EXPECT_LE(r0.per_alpha_max[0], 1e-12);
  auto r3 = check_cancellation(builtin("sigma3"), 1, spec);
  EXPECT_TRUE(r3.pass);
  EXPECT_EQ(r3.alphas.size(), 3u);
  auto r1 = check_cancellation(builtin("one"), 0, spec);
  EXPECT_FALSE(r1.pass);
  EXPECT_DOUBLE_EQ(r1.per_alpha_max[0], 1.0);
  EXPECT_THROW(check_cancellation(builtin("one"), -1, spec), ConfigError);
}

TEST(Cancellation, SampledPointsLieOnDiagonalAwayFromGamma) {
  SamplerSpec spec;
  auto s = builtin("mixed_demo");
  auto pts = sample_diagonal(s, spec);
  for (const auto& x : pts.points) {
    double sum = 0.0;
    for (double v : x) sum += v;
    EXPECT_LE(std::abs(sum), 1e-12 * euclid_norm(x));
    for (int j = 0; j < 3; ++j) EXPECT_GE(block_norm(x, 1, j), spec.reject_radius);
  }
}

TEST(Cancellation, HessianGeneralOrderCap) {
  for (const char* njs : {"1,1", "2,1"}) {
    auto s = builtin("sigma_hessian_general", {{"n_js", njs}});
    SamplerSpec spec;
    EXPECT_TRUE(check_cancellation(s, 1, spec).pass) << njs;
    auto r = check_cancellation(s, 2, spec);
    ASSERT_FALSE(r.pass) << njs;
    std::size_t worst = 0;
    for (std::size_t a = 1; a < r.alphas.size(); ++a)
      if (r.per_alpha_max[a] > r.per_alpha_max[worst]) worst = a;
    const auto& alpha = r.alphas[worst];
    ASSERT_EQ(order(alpha), 2);
    const auto& x = r.samples[r.per_alpha_argmax[worst]].point;
    const cplx sym = diff(s, 1, alpha).evaluate(x);
    EXPECT_GT(std::abs(sym), 1e-6);
    oracle::Fn f = [&](std::span<const double> y) { return s.evaluate(y); };
    std::vector<int> vars;
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < alpha[static_cast<std::size_t>(c)]; ++k) vars.push_back(2 + c);
    const double h = 1e-3 * euclid_norm(x);
    EXPECT_LE(std::abs(oracle::partial(f, x, vars, h) - sym), 1e-6 * std::abs(sym));
  }
}

TEST(Cancellation, BlockSymmetry) {
  SamplerSpec spec;
  EXPECT_TRUE(check_block_symmetry(builtin("sigma0"), 0, spec));
  EXPECT_TRUE(check_block_symmetry(builtin("one"), 0, spec));
  EXPECT_TRUE(check_block_symmetry(builtin("sigma2"), 1, spec));
}

TEST(Cancellation, SamplerDeterminism) {
  SamplerSpec spec;
  spec.seed = 123;
  auto a = check_cancellation(builtin("sigma1"), 0, spec);
  auto b = check_cancellation(builtin("sigma1"), 0, spec);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].point, b.samples[i].point);
    EXPECT_EQ(a.samples[i].values, b.samples[i].values);
  }
  spec.seed = 124;
  auto c = check_cancellation(builtin("sigma1"), 0, spec);
  EXPECT_NE(a.samples[0].point, c.samples[0].point);
}

TEST(Cancellation, BlackBoxAdapter) {
  BlackBoxSymbol bb;
  bb.m = 2;
  bb.n = 1;
  bb.f = [](std::span<const double> x) { return cplx((x[0] + x[1]) * (x[0] + x[1]) / (x[0] * x[0] + x[1] * x[1])); };
  bb.name = "sum_sq_blackbox";
  auto r = check_cancellation_fd(bb, 1, {});
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.confidence, "finite-difference");
  bb.f = [](std::span<const double>) { return cplx(1.0); };
  EXPECT_FALSE(check_cancellation_fd(bb, 0, {}).pass);
}

TEST(Decay, Examples) {
  SamplerSpec spec;
  auto d0 = estimate_decay(builtin("sigma0"), 1, spec);
  EXPECT_TRUE(d0.cm_consistent);
  for (const auto& e : d0.entries) {
    EXPECT_TRUE(std::isfinite(e.sup_cm));
    EXPECT_GE(e.sup_weak, 0.0);
    // Exact homogeneity: same directions on every shell.
    const double lo = e.shell_cm.front(), hi = e.shell_cm.back();
    EXPECT_LE(std::abs(lo - hi), 1e-10 * std::max(1.0, hi));
  }
  auto d1 = estimate_decay(builtin("one"), 2, spec);
  for (const auto& e : d1.entries)
    if (order(e.alpha) >= 1) {
      EXPECT_EQ(e.sup_cm, 0.0);
    }
  auto ds = estimate_decay(builtin("sigma1"), 1, spec);
  for (const auto& e : ds.entries) {
    EXPECT_TRUE(std::isfinite(e.sup_cm));
    EXPECT_TRUE(std::isfinite(e.sup_weak));
  }
}

TEST(Parser, ExpressionsAndErrors) {
  auto s = parse_symbol("(x[1][1]+x[2][1])^2/(x[1][1]^2+x[2][1]^2)");
  EXPECT_EQ(s.m(), 2);
  EXPECT_EQ(s.n(), 1);
  auto ref = builtin("sum_sq_1d");
  for (const auto& x : random_points(ref, 20, 2)) EXPECT_NEAR(std::abs(s.evaluate(x) - ref.evaluate(x)), 0.0, 1e-14);
  auto r = parse_symbol("x[1][2]/sqrt(x[1][1]^2+x[1][2]^2)");
  EXPECT_EQ(r.n(), 2);
  EXPECT_NEAR(r.evaluate(std::vector<double>{3, 4}).real(), 0.8, 1e-15);
  EXPECT_THROW(parse_symbol("x[1][1] +"), ConfigError);
  EXPECT_THROW(parse_symbol("y[1][1]"), ConfigError);
  EXPECT_THROW(parse_symbol("x[1][1]", 1, 2).evaluate(std::vector<double>{1}), ConfigError);
}
