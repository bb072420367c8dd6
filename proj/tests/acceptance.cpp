// Acceptance binary: one pass/fail line per criterion AC1..AC11. Exits
// nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "multcancel/atoms/battery.hpp"
#include "multcancel/atoms/zeta.hpp"
#include "multcancel/symbols/builtins.hpp"
#include "multcancel/symbols/checks.hpp"
#include "multcancel/symbols/parser.hpp"
#include "multcancel/verify/equivalence.hpp"
#include "multcancel/verify/moments.hpp"
#include "multcancel/verify/weakconv.hpp"
#include "oracles.hpp"

#ifndef MULTCANCEL_CLI_PATH
#error "MULTCANCEL_CLI_PATH must name the multcancel_cli executable"
#endif

using namespace multcancel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string measured;
};

std::string g3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void check(Outcome& o, bool ok, const std::string& what) {
  o.pass = o.pass && ok;
  if (!o.measured.empty()) o.measured += "; ";
  o.measured += what + (ok ? "" : " [FAIL]");
}

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

std::vector<int> vars_of(const MultiIndex& a, int offset = 0) {
  std::vector<int> v;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < a[i]; ++k) v.push_back(offset + static_cast<int>(i));
  return v;
}

Outcome ac1() {
  Outcome o;
  auto g = make_grid(1, 8, 256);
  auto F = forward(sample(oracle::gaussian, g));
  std::vector<double> xi(1);
  double self = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    g.freq_point(i, xi);
    self = std::max(self, std::abs(F[i] - oracle::gaussian(xi)));
  }
  check(o, self <= 1e-8, "self-duality " + g3(self) + " <= 1e-8");
  double parseval = 0.0, trip = 0.0;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (auto gg : {make_grid(1, 8, 256), make_grid(2, 4, 64), make_grid(3, 2, 16)}) {
    std::vector<cplx> v(gg.size());
    for (auto& c : v) c = {nd(rng), nd(rng)};
    SampledField f(gg, v);
    auto Ff = forward(f);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      a += std::norm(f[i]);
      b += std::norm(Ff[i]);
    }
    a *= gg.cell_volume();
    b *= std::pow(gg.freq_spacing(), gg.dim());
    parseval = std::max(parseval, std::abs(a - b) / a);
    auto back = inverse(Ff);
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(back[i] - f[i]));
    trip = std::max(trip, e / f.max_abs());
  }
  check(o, parseval <= 1e-10, "Parseval " + g3(parseval) + " <= 1e-10");
  check(o, trip <= 1e-12, "round trip " + g3(trip) + " <= 1e-12");
  return o;
}

Outcome ac2() {
  Outcome o;
  std::vector<SymbolExpr> all;
  for (const auto& name : builtin_names()) all.push_back(builtin(name));
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& s : all) {
    oracle::Fn f = [&](std::span<const double> x) { return s.evaluate(x); };
    const auto alphas = multiindices_up_to(s.num_vars(), 2);
    std::vector<SymbolExpr> ds;
    for (const auto& a : alphas) ds.push_back(diff_all(s, a));
    for (const auto& x : random_points(s, 100, 11)) {
      for (std::size_t k = 1; k < alphas.size(); ++k) {
        const cplx sym = ds[k].evaluate(x), fd = oracle::partial(f, x, vars_of(alphas[k]));
        worst = std::max(worst, std::abs(sym - fd) / std::max(1.0, std::abs(sym)));
        ++checked;
      }
    }
  }
  check(o, worst <= 1e-6,
        "worst relative gap " + g3(worst) + " <= 1e-6 over " + std::to_string(checked) + " derivative values");
  return o;
}

Outcome ac3() {
  Outcome o;
  SamplerSpec spec;
  struct Row {
    const char* name;
    int N;
  };
  for (auto r : {Row{"sigma0", 0}, Row{"sigma1", 0}, Row{"sigma2", 1}, Row{"sigma3", 1}}) {
    auto rep = check_cancellation(builtin(r.name), r.N, spec);
    double worst = 0.0;
    for (double v : rep.per_alpha_max) worst = std::max(worst, v);
    check(o, rep.pass && worst <= 1e-12 && rep.samples.size() >= 500,
          std::string(r.name) + "@N=" + std::to_string(r.N) + " max " + g3(worst) + " over " +
              std::to_string(rep.samples.size()) + " samples");
  }
  auto one = check_cancellation(builtin("one"), 0, spec);
  check(o, !one.pass && one.per_alpha_max[0] == 1.0, "one fails with max " + g3(one.per_alpha_max[0]));
  auto h = builtin("sigma_hessian_general", {{"n_js", "1,1"}});
  auto h1 = check_cancellation(h, 1, spec);
  auto h2 = check_cancellation(h, 2, spec);
  std::size_t worst = 0;
  for (std::size_t a = 1; a < h2.alphas.size(); ++a)
    if (h2.per_alpha_max[a] > h2.per_alpha_max[worst]) worst = a;
  const auto& alpha = h2.alphas[worst];
  const auto& x = h2.samples[h2.per_alpha_argmax[worst]].point;
  const cplx sym = diff(h, 1, alpha).evaluate(x);
  oracle::Fn f = [&](std::span<const double> y) { return h.evaluate(y); };
  const cplx fd = oracle::partial(f, x, vars_of(alpha, 2), 1e-3 * euclid_norm(x));
  const double gap = std::abs(fd - sym) / std::abs(sym);
  check(o, h1.pass && !h2.pass && order(alpha) == 2 && std::abs(sym) > 1e-6 && gap <= 1e-6,
        "hessian(1,1) passes at 1; order-2 derivative " + g3(std::abs(sym)) + " (finite-difference gap " + g3(gap) +
            ")");
  return o;
}

double worst_identity(const SymbolExpr& s, const Grid& g, int N, const std::vector<double>& p, std::size_t tuples,
                      const std::vector<MultiIndex>& alphas) {
  auto b = default_battery(s.m(), g, N, p, tuples);
  double worst = 0.0;
  for (const auto& t : b.tuples) {
    auto applied = apply_tuple(s, t, g);
    for (const auto& a : alphas) worst = std::max(worst, identity_report(applied, s, t, a).rel_err);
  }
  return worst;
}

Outcome ac4() {
  Outcome o;
  auto s = builtin("smooth_test");
  const auto alphas = multiindices_up_to(1, 1);
  const double w1 = worst_identity(s, make_grid(1, 4, 2048), 1, {2, 2}, 8, alphas);
  check(o, w1 <= 1e-2, "M=2048 worst rel_err " + g3(w1) + " <= 1e-2");
  const double w2 = worst_identity(s, make_grid(1, 4, 4096), 1, {2, 2}, 8, alphas);
  check(o, w2 <= 1e-3, "M=4096 worst rel_err " + g3(w2) + " <= 1e-3");
  return o;
}

Outcome ac5() {
  Outcome o;
  const double w = worst_identity(builtin("smooth_test", {{"m", "3"}}), make_grid(1, 4, 128), 1, {3, 3, 3}, 4,
                                  {zero_index(1)});
  check(o, w <= 3e-2, "m=3, 4 tuples, worst rel_err " + g3(w) + " <= 3e-2");
  return o;
}

Outcome ac6() {
  Outcome o;
  struct Row {
    const char* name;
    Params params;
    std::vector<double> p;
    int n;
  };
  const std::vector<Row> rows = {{"sigma0", {}, {2, 2}, 2},
                                 {"sigma1", {}, {2, 2}, 2},
                                 {"sigma2", {}, {4.0 / 3, 4.0 / 3}, 2},
                                 {"sigma3", {}, {4.0 / 3, 4.0 / 3}, 2},
                                 {"one", {{"m", "2"}, {"n", "2"}}, {2, 2}, 2},
                                 {"sigma_hessian_general", {{"n_js", "1,1"}}, {4.0 / 3, 4.0 / 3}, 2},
                                 {"one", {}, {2, 2}, 1},
                                 {"sum_sq_1d", {}, {2, 2}, 1},
                                 {"riesz_product", {}, {2, 2}, 1}};
  for (const auto& r : rows) {
    auto s = builtin(r.name, r.params);
    const Grid g = r.n == 2 ? make_grid(2, 4, 64) : make_grid(1, 4, 2048);
    auto e = equivalence_harness(s, r.p, g);
    check(o, e.agree && e.block_independent,
          s.name() + " L=" + std::to_string(e.L) + " " + (e.cancellation.pass ? "pass" : "fail") + "/" +
              (e.moments_pass ? "pass" : "fail"));
  }
  return o;
}

Outcome ac7() {
  Outcome o;
  const Grid g = make_grid(1, 4, 4096);
  std::vector<SmoothAtom> atoms;
  for (auto& t : default_battery(1, g, 2, {1.0}).tuples) atoms.push_back(t.front());
  const std::vector<SymbolExpr> symbols = {builtin("one", {{"m", "1"}}), builtin("smooth_test", {{"m", "1"}}),
                                           builtin("riesz_product", {{"terms", "1:1"}}),
                                           parse_symbol("x[1][1]^2/(1+x[1][1]^2)", 1, 1, "lowpass_complement"),
                                           parse_symbol("x[1][1]/sqrt(1+x[1][1]^2)", 1, 1, "smoothed_sign")};
  double worst = 0.0;
  bool all = true;
  for (const auto& s : symbols) {
    auto r = linear_vanishing(s, atoms, 2);
    all = all && r.pass;
    for (const auto& e : r.entries) worst = std::max(worst, e.abs_lhs / e.threshold);
  }
  check(o, all, "5 symbols x " + std::to_string(atoms.size()) + " atoms, |alpha| <= 2, worst |moment|/threshold " +
                    g3(worst) + " <= 1");
  return o;
}

Outcome ac8() {
  Outcome o;
  for (int n : {1, 2}) {
    const Grid g = n == 1 ? make_grid(1, 4, 512) : make_grid(2, 4, 128);
    auto z = zeta(n, g);
    std::vector<double> xi(static_cast<std::size_t>(n));
    double at0 = -1.0, min_ball = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.spectrum.size(); ++i) {
      g.freq_point(i, xi);
      const double r = euclid_norm(xi);
      if (r == 0.0) at0 = std::abs(z.spectrum[i]);
      if (r > 0.0 && r <= 1.0) min_ball = std::min(min_ball, std::abs(z.spectrum[i]));
    }
    auto w = omega_atom(1, n, g);
    const double res = verify_moments(w, 1);
    check(o, at0 >= 0.0 && at0 <= 1e-12 && min_ball > 0.0 && res <= 1e-6,
          "n=" + std::to_string(n) + " |zeta^(0)| " + g3(at0) + ", min on punctured ball " + g3(min_ball) +
              ", omega_atom(1) moments " + g3(res));
  }
  return o;
}

Outcome ac9() {
  Outcome o;
  const Grid g = make_grid(2, 4, 64);
  auto b = default_battery(2, g, 1, {2, 2}, 1);
  auto applied = apply_tuple(builtin("sigma0"), b.tuples.front(), g);
  const auto& d = applied.decay;
  const double ratio = d.far_field_ratio / d.predicted_ratio;
  check(o, std::isfinite(d.C) && d.C > 0.0, "C " + g3(d.C) + " finite");
  check(o, d.violations == 0, std::to_string(d.violations) + " violations at 2C");
  check(o, ratio >= 0.5 && ratio <= 2.0, "far-field ratio / 2^-" + g3(applied.majorant.total_exponent()) + " = " +
                                             g3(ratio) + " in [0.5, 2]");
  return o;
}

Outcome ac10() {
  Outcome o;
  const Grid g = make_grid(1, 4, 2048);
  const std::vector<double> ks = {4, 8, 16, 32};
  auto in = default_weakconv_inputs();
  auto a = weakconv_demo(builtin("sum_sq_1d"), in, ks, g);
  const double last = a.relative_gaps.back();
  bool below = true;
  for (std::size_t i = 1; i < ks.size(); ++i) below = below && a.relative_gaps[i] < a.relative_gaps.front();
  check(o, last <= 1e-3 && below, "sum_sq_1d gaps " + g3(a.relative_gaps[0]) + ", " + g3(a.relative_gaps[1]) + ", " +
                                      g3(a.relative_gaps[2]) + ", " + g3(last) + " (last <= 1e-3)");
  auto one = weakconv_demo(builtin("one"), in, ks, g);
  const double half = 0.5 * oracle::simpson(
                                [](double x) {
                                  return oracle::bump1(x, -0.2, 1.2) * oracle::bump1(x, 0.2, 1.2) *
                                         oracle::bump1(x, 0.0, 2.0);
                                },
                                -1.0, 1.0, 200000);
  const double err = std::abs(one.gaps.back() - std::abs(half)) / std::abs(half);
  check(o, err <= 0.05, "one: gap vs 1/2 int h e phi relative error " + g3(err) + " <= 0.05");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome ac11() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "multcancel_acceptance_suite";
  fs::remove_all(dir);
  const std::string cmd = std::string("\"") + MULTCANCEL_CLI_PATH + "\" --command suite --seed 42 --out \"" +
                          dir.string() + "\" 2>/dev/null";
  std::vector<std::string> json, csv;
  for (int run = 0; run < 2; ++run) {
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      check(o, false, "suite run " + std::to_string(run + 1) + " returned " + std::to_string(rc));
      return o;
    }
    json.push_back(slurp(dir / "suite.json"));
    csv.push_back(slurp(dir / "suite.csv"));
  }
  check(o, !json[0].empty() && json[0] == json[1], "suite.json " + std::to_string(json[0].size()) + " bytes identical");
  check(o, !csv[0].empty() && csv[0] == csv[1], "suite.csv " + std::to_string(csv[0].size()) + " bytes identical");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "spectral infrastructure", 1, ac1},
      {"AC2", "symbolic vs finite-difference derivatives", 10, ac2},
      {"AC3", "diagonal cancellation of the examples", 30, ac3},
      {"AC4", "moment identity m=2 n=1", 120, ac4},
      {"AC5", "multilinear identity m=3 n=1", 180, ac5},
      {"AC6", "equivalence harness", 180, ac6},
      {"AC7", "linear automatic vanishing", 10, ac7},
      {"AC8", "zeta and Omega_N construction", 30, ac8},
      {"AC9", "tail majorant", 30, ac9},
      {"AC10", "weak convergence", 60, ac10},
      {"AC11", "determinism of suite reports", 0, ac11},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.measured = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = g3(secs) + " s";
    if (c.budget_s > 0) {
      const bool fast = secs < c.budget_s;
      o.pass = o.pass && fast;
      timing += std::string(fast ? " < " : " >= ") + g3(c.budget_s) + " s";
    }
    std::printf("%-4s %s  %s | %s | %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.measured.c_str(),
                timing.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
