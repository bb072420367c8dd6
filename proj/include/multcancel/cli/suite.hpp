#pragma once

#include <functional>
#include <string>
#include <vector>

#include "multcancel/cli/commands.hpp"

namespace multcancel::cli {

// Identity tolerances are multiplied by this factor when the suite runs with
// grid-scale 0.5 (M halved); the smooth identities converge faster than
// first order in h, so a factor 4 leaves margin.
inline constexpr double kHalvedGridToleranceFactor = 4.0;

struct SuiteCase {
  std::string id;
  std::string title;
  std::string expected;
  std::string observed;
  bool pass = false;
  std::string error;  // set when the case threw
  Json detail;
};

struct SuiteOutcome {
  std::vector<SuiteCase> cases;
  bool pass = true;
  std::string first_failure;
};

namespace suite_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string yes(bool b) { return b ? "true" : "false"; }

inline SamplerSpec sampler(std::uint64_t seed) {
  SamplerSpec s;
  s.seed = seed;
  return s;
}

inline void ac3(SuiteCase& c, std::uint64_t seed) {
  struct Row {
    const char* name;
    Params params;
    int N;
    bool expect;
  };
  const std::vector<Row> rows = {{"sigma0", {}, 0, true},
                                 {"sigma1", {}, 0, true},
                                 {"sigma2", {}, 1, true},
                                 {"sigma3", {}, 1, true},
                                 {"one", {}, 0, false},
                                 {"sigma_hessian_general", {{"n_js", "1,1"}}, 1, true},
                                 {"sigma_hessian_general", {{"n_js", "1,1"}}, 2, false}};
  c.pass = true;
  c.detail = Json::array();
  std::string obs;
  for (const auto& r : rows) {
    auto s = builtin(r.name, r.params);
    auto rep = check_cancellation(s, r.N, sampler(seed));
    double worst = 0.0;
    for (double v : rep.per_alpha_max) worst = std::max(worst, v);
    bool ok = rep.pass == r.expect && rep.samples.size() >= 500;
    if (std::string(r.name) == "one") ok = ok && std::abs(worst - 1.0) <= 1e-12;
    c.pass = c.pass && ok;
    obs += s.name() + "@N=" + std::to_string(r.N) + ":" + (rep.pass ? "pass" : "fail") + "(max " + fmt(worst) + ") ";
    c.detail.push_back(report::to_json(rep));
  }
  c.observed = obs;
}

inline void identity_case(SuiteCase& c, const SymbolExpr& s, const Grid& g, int tuples, int N,
                          const std::vector<double>& p, const std::vector<MultiIndex>& alphas, double tol) {
  auto b = default_battery(s.m(), g, N, p, static_cast<std::size_t>(tuples));
  auto o = run_identity(s, b, alphas, g, {}, tol, Algorithm::FftLastBlock);
  c.pass = o.pass;
  c.observed = "worst rel_err " + fmt(o.worst) + " on " + g.describe();
  c.detail = std::move(o.reports);
}

inline Grid scaled(int n, double L, int M, double gs) { return make_grid(n, L, static_cast<int>(M * gs)); }

}  // namespace suite_detail

inline SuiteOutcome run_suite(const RunConfig& cfg) {
  using namespace suite_detail;
  const double gs = cfg.real("grid-scale");
  if (gs != 1.0 && gs != 0.5) throw ConfigError("config key 'grid-scale': must be 1 or 0.5");
  const double relax = gs == 1.0 ? 1.0 : kHalvedGridToleranceFactor;
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));

  std::vector<std::pair<SuiteCase, std::function<void(SuiteCase&)>>> plan;
  auto add = [&](std::string id, std::string title, std::string expected, std::function<void(SuiteCase&)> f) {
    SuiteCase c;
    c.id = std::move(id);
    c.title = std::move(title);
    c.expected = std::move(expected);
    plan.emplace_back(std::move(c), std::move(f));
  };

  add("cancellation", "diagonal cancellation of the builtin examples",
      "sigma0, sigma1 pass at N=0; sigma2, sigma3 at N=1; one fails with max 1; hessian(1,1) passes at 1, fails at 2",
      [&](SuiteCase& c) { ac3(c, seed); });

  add("identity_m2", "moment identity, smooth_test, m=2, n=1", "rel_err <= " + fmt(1e-2 * relax) + " for |alpha| <= 1",
      [&](SuiteCase& c) {
        identity_case(c, builtin("smooth_test", {}), scaled(1, 4, 2048, gs), 8, 1, {2, 2},
                      multiindices_up_to(1, 1), 1e-2 * relax);
      });
  add("identity_m2_doubled", "moment identity, smooth_test, m=2, n=1, doubled M",
      "rel_err <= " + fmt(1e-3 * relax) + " for |alpha| <= 1", [&](SuiteCase& c) {
        identity_case(c, builtin("smooth_test", {}), scaled(1, 4, 4096, gs), 8, 1, {2, 2},
                      multiindices_up_to(1, 1), 1e-3 * relax);
      });
  add("identity_m3", "moment identity, smooth_test, m=3, n=1, four tuples",
      "rel_err <= " + fmt(3e-2 * relax) + " at alpha=0", [&](SuiteCase& c) {
        identity_case(c, builtin("smooth_test", {{"m", "3"}}), scaled(1, 4, 128, gs), 4, 1, {3, 3, 3},
                      {zero_index(1)}, 3e-2 * relax);
      });
  add("identity_delta", "frequency-tube radius robustness, riesz_product(1:1,1), alpha=0",
      "rel_err <= " + fmt(kIdentityTolerance * relax) + "; rhs change between delta=dxi and 2dxi <= " +
          fmt(kDeltaRobustnessTolerance),
      [&](SuiteCase& c) {
        const Grid g = scaled(1, 8, 2048, gs);
        auto s = builtin("riesz_product", {{"terms", "1:1,1"}});
        auto b = default_battery(2, g, 1, {2, 2});
        double worst = 0.0, change = 0.0;
        c.detail = Json::array();
        for (std::size_t t = 0; t < b.size(); ++t) {
          auto applied = apply_tuple(s, b.tuples[t], g);
          auto r = identity_report(applied, s, b.tuples[t], zero_index(1), {}, kIdentityTolerance * relax);
          QuadratureSpec narrow;
          narrow.delta = g.freq_spacing();
          auto r1 = moment_rhs(s, b.tuples[t], zero_index(1), narrow);
          const double d = std::abs(r1.value - r.rhs) / std::max(std::abs(r.rhs), r.floor_scale);
          worst = std::max(worst, r.rel_err);
          change = std::max(change, d);
          c.detail.push_back(Json{{"tuple", t + 1}, {"report", report::to_json(r)}, {"delta_change", num(d)}});
        }
        c.pass = worst <= kIdentityTolerance * relax && change <= kDeltaRobustnessTolerance;
        c.observed = "worst rel_err " + fmt(worst) + ", worst delta change " + fmt(change);
      });

  struct Equiv {
    const char* name;
    Params params;
    std::vector<double> p;
    int n;
  };
  const std::vector<Equiv> equivs = {
      {"sigma0", {}, {2, 2}, 2},
      {"sigma1", {}, {2, 2}, 2},
      {"sigma2", {}, {4.0 / 3, 4.0 / 3}, 2},
      {"sigma3", {}, {4.0 / 3, 4.0 / 3}, 2},
      {"one", {{"m", "2"}, {"n", "2"}}, {2, 2}, 2},
      {"sigma_hessian_general", {{"n_js", "1,1"}}, {4.0 / 3, 4.0 / 3}, 2},
      {"one", {}, {2, 2}, 1},
      {"sum_sq_1d", {}, {2, 2}, 1},
      {"riesz_product", {}, {2, 2}, 1},
  };
  for (const auto& e : equivs) {
    auto s = builtin(e.name, e.params);
    add("equivalence_" + s.name(), "equivalence harness, " + s.name(), "agree = true and block independent",
        [&, e](SuiteCase& c) {
          auto sym = builtin(e.name, e.params);
          const Grid g = e.n == 2 ? make_grid(2, 4, 64) : make_grid(1, 4, 2048);
          auto r = equivalence_harness(sym, e.p, g, sampler(seed));
          c.pass = r.agree && r.block_independent;
          c.observed = "cancellation " + yes(r.cancellation.pass) + ", moments " + yes(r.moments_pass) + ", agree " +
                       yes(r.agree) + ", block independent " + yes(r.block_independent);
          c.detail = report::to_json(r);
        });
  }

  add("linear", "linear automatic vanishing, five bounded symbols, N=2", "every moment |alpha| <= 2 within threshold",
      [&](SuiteCase& c) {
        const Grid g = make_grid(1, 4, 4096);
        std::vector<SmoothAtom> atoms;
        for (auto& t : default_battery(1, g, 2, {1.0}).tuples) atoms.push_back(t.front());
        const std::vector<SymbolExpr> symbols = {
            builtin("one", {{"m", "1"}}), builtin("smooth_test", {{"m", "1"}}),
            builtin("riesz_product", {{"terms", "1:1"}}),
            parse_symbol("x[1][1]^2/(1+x[1][1]^2)", 1, 1, "lowpass_complement"),
            parse_symbol("x[1][1]/sqrt(1+x[1][1]^2)", 1, 1, "smoothed_sign")};
        c.pass = true;
        c.detail = Json::array();
        double worst = 0.0;
        for (const auto& s : symbols) {
          auto r = linear_vanishing(s, atoms, 2);
          for (const auto& e : r.entries) worst = std::max(worst, e.abs_lhs / e.threshold);
          c.pass = c.pass && r.pass;
          c.detail.push_back(report::to_json(r));
        }
        c.observed = "worst |moment|/threshold " + fmt(worst);
      });

  add("zeta", "zeta and Omega_N construction",
      "|zeta^(0)| <= 1e-12; min |zeta^| > 0 on the punctured ball; omega_atom(1) moments <= 1e-6",
      [&](SuiteCase& c) {
        c.pass = true;
        c.detail = Json::array();
        std::string obs;
        for (int n : {1, 2}) {
          const Grid g = n == 1 ? make_grid(1, 4, 512) : make_grid(2, 4, 128);
          auto z = zeta(n, g);
          std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
          std::size_t zero = 0;
          for (std::size_t i = 0; i < z.spectrum.size(); ++i) {
            std::vector<double> xi(static_cast<std::size_t>(n));
            g.freq_point(i, xi);
            if (euclid_norm(xi) == 0.0) zero = i;
          }
          const double at0 = std::abs(z.spectrum[zero]);
          auto w = omega_atom(1, n, g);
          const double res = verify_moments(w, 1);
          const bool ok = at0 <= 1e-12 && z.min_abs_punctured > 0.0 && res <= 1e-6;
          c.pass = c.pass && ok;
          obs += "n=" + std::to_string(n) + ": |zeta^(0)| " + fmt(at0) + ", min " + fmt(z.min_abs_punctured) +
                 ", omega residual " + fmt(res) + " ";
          c.detail.push_back(Json{{"n", n},
                                  {"grid", report::to_json(g)},
                                  {"zeta_hat_origin", num(at0)},
                                  {"min_abs_punctured", num(z.min_abs_punctured)},
                                  {"exponent", z.exponent},
                                  {"dilation", num(z.dilation)},
                                  {"omega_moment_residual", num(res)}});
        }
        c.observed = obs;
      });

  add("tail", "pointwise tail majorant, sigma0 on the first default pair",
      "finite C, zero violations at 2C, far-field ratio within a factor 2 of 2^-(mn+N+1)", [&](SuiteCase& c) {
        const Grid g = make_grid(2, 4, 64);
        auto b = default_battery(2, g, 1, {2, 2}, 1);
        auto applied = apply_tuple(builtin("sigma0", {}), b.tuples.front(), g);
        const auto& d = applied.decay;
        const double ratio = d.far_field_ratio / d.predicted_ratio;
        c.pass = std::isfinite(d.C) && d.violations == 0 && ratio >= 0.5 && ratio <= 2.0;
        c.observed = "C " + fmt(d.C) + ", violations " + std::to_string(d.violations) + ", ratio/predicted " +
                     fmt(ratio);
        c.detail = report::to_json(d);
      });

  add("weakconv", "oscillation demo",
      "sum_sq_1d: relative gap <= 1e-3 at k=32 and below the k=4 gap; one: gap within 5% of 1/2 int h e phi",
      [&](SuiteCase& c) {
        const Grid g = make_grid(1, 4, 2048);
        const std::vector<double> ks = {4, 8, 16, 32};
        auto a = weakconv_demo(builtin("sum_sq_1d", {}), default_weakconv_inputs(), ks, g);
        auto o = weakconv_demo(builtin("one", {}), default_weakconv_inputs(), ks, g);
        const double pred_err = std::abs(o.gaps.back() - std::abs(o.predicted_gap)) / std::abs(o.predicted_gap);
        const bool a_ok = a.relative_gaps.back() <= 1e-3 && a.relative_gaps.back() < a.relative_gaps.front();
        c.pass = a_ok && pred_err <= 0.05;
        c.observed = "sum_sq_1d last relative gap " + fmt(a.relative_gaps.back()) + ", one prediction error " +
                     fmt(pred_err);
        c.detail = Json{{"sum_sq_1d", report::to_json(a)}, {"one", report::to_json(o)}};
      });

  SuiteOutcome out;
  for (auto& [c, f] : plan) {
    try {
      f(c);
    } catch (const Error& e) {
      c.pass = false;
      c.error = e.what();
      c.observed = "error: " + c.error;
    }
    if (!c.pass && out.first_failure.empty()) out.first_failure = c.id;
    out.pass = out.pass && c.pass;
    out.cases.push_back(std::move(c));
  }
  return out;
}

inline CommandResult cmd_suite(const RunConfig& cfg) {
  auto s = run_suite(cfg);
  CommandResult r;
  r.pass = s.pass;
  Json cases = Json::array();
  Table t{"suite", {"case", "expected", "observed", "verdict"}, {}};
  std::size_t passed = 0;
  for (const auto& c : s.cases) {
    passed += c.pass ? 1 : 0;
    Json j{{"id", c.id},
           {"title", c.title},
           {"expected", c.expected},
           {"observed", c.observed},
           {"verdict", c.pass ? "pass" : "fail"}};
    if (!c.error.empty()) j["error"] = c.error;
    j["detail"] = c.detail;
    cases.push_back(std::move(j));
    t.add({c.id, c.expected, c.observed, c.pass ? "pass" : "fail"});
  }
  r.result = Json{{"grid_scale", num(cfg.real("grid-scale"))},
                  {"tolerance_factor", num(cfg.real("grid-scale") == 1.0 ? 1.0 : kHalvedGridToleranceFactor)},
                  {"cases_passed", passed},
                  {"cases_total", s.cases.size()},
                  {"first_failure", s.first_failure.empty() ? Json(nullptr) : Json(s.first_failure)},
                  {"cases", std::move(cases)}};
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace multcancel::cli
