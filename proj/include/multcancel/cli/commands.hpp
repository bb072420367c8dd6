#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "multcancel/atoms/battery.hpp"
#include "multcancel/atoms/zeta.hpp"
#include "multcancel/cli/config.hpp"
#include "multcancel/report/json.hpp"
#include "multcancel/report/tables.hpp"
#include "multcancel/symbols/builtins.hpp"
#include "multcancel/symbols/parser.hpp"
#include "multcancel/verify/maximal.hpp"

namespace multcancel::cli {

using report::Json;
using report::num;
using report::nums;
using report::Series;
using report::Table;

struct CommandResult {
  Json result;
  bool pass = true;
  std::vector<Table> tables;
  std::vector<Series> series;
  // Extra artifacts written verbatim: (file name, content).
  std::vector<std::pair<std::string, std::string>> files;
};

inline Params parse_params(const std::string& text) {
  Params p;
  std::istringstream ss(text);
  std::string item;
  while (ss >> item) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("config key 'symbol-params': expected key=value, got '" + item + "'");
    p[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return p;
}

inline SymbolExpr resolve_symbol(const RunConfig& cfg) {
  if (cfg.has("symbol-expr")) {
    if (cfg.has("symbol")) throw ConfigError("config keys 'symbol' and 'symbol-expr' are mutually exclusive");
    try {
      return parse_symbol(cfg.str("symbol-expr"), cfg.integer("m"), cfg.integer("n"), cfg.str("symbol-expr"));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config key 'symbol-expr': ") + e.what());
    }
  }
  if (!cfg.has("symbol")) throw ConfigError("config key 'symbol' (or 'symbol-expr') is required");
  try {
    return builtin(cfg.str("symbol"), parse_params(cfg.str("symbol-params")));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'symbol': ") + e.what());
  }
}

inline std::vector<double> resolve_p(const RunConfig& cfg, int m) {
  if (!cfg.has("p")) return std::vector<double>(static_cast<std::size_t>(m), 2.0);
  auto p = cfg.reals("p");
  if (static_cast<int>(p.size()) != m)
    throw ConfigError("config key 'p': expected " + std::to_string(m) + " exponents, got " + std::to_string(p.size()));
  try {
    holder_target(p);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'p': ") + e.what());
  }
  return p;
}

inline Grid resolve_grid(const RunConfig& cfg, int n) {
  Grid g = cfg.grid();
  if (g.dim() != n)
    throw ConfigError("config key 'grid': dimension " + std::to_string(g.dim()) + " does not match n = " +
                      std::to_string(n));
  return g;
}

inline AtomBattery resolve_battery(const RunConfig& cfg, int m, const Grid& grid, int N, const std::vector<double>& p) {
  const std::string b = cfg.str("battery");
  if (b == "default") {
    const int tuples = cfg.integer("tuples");
    if (tuples < 1 || tuples > 8) throw ConfigError("config key 'tuples': must be in 1..8");
    return default_battery(m, grid, N, p, static_cast<std::size_t>(tuples));
  }
  try {
    return make_battery(read_battery_file(b, grid.dim()), grid, N, p);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'battery': ") + e.what());
  }
}

inline std::size_t resolve_tuple(const RunConfig& cfg, const AtomBattery& b) {
  const int t = cfg.integer("tuple");
  if (t < 1 || static_cast<std::size_t>(t) > b.size())
    throw ConfigError("config key 'tuple': must be in 1.." + std::to_string(b.size()));
  return static_cast<std::size_t>(t - 1);
}

// Samples along the first axis through the lattice origin.
template <class F>
Series axis_profile(const Grid& g, const std::string& name, const std::string& label, F&& value_at) {
  Series s{name, "x1", label, {}};
  const int M = g.points_per_axis();
  std::array<int, kMaxDim> idx{M / 2, M / 2, M / 2};
  for (int k = 0; k < M; ++k) {
    idx[0] = k;
    const std::size_t i = g.flatten(idx);
    s.points.emplace_back(-g.half_extent() + g.spacing() * k, value_at(i));
  }
  return s;
}

inline std::vector<std::vector<double>> parse_points(const std::string& text, int dim) {
  std::vector<std::vector<double>> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      pts.push_back(parse_point(item, dim));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config key 'points': ") + e.what());
    }
  }
  return pts;
}

inline std::string cell(double v) { return format_number(v); }

inline CommandResult cmd_symbol_eval(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  std::vector<std::vector<double>> pts;
  if (cfg.has("points")) {
    pts = parse_points(cfg.str("points"), s.num_vars());
  } else {
    SamplerSpec spec;
    spec.radii = {1.0};
    spec.directions_per_shell = 16;
    spec.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    pts = sample_diagonal(s, spec).points;
  }
  CommandResult r;
  Table t{"values", {"index", "point", "re", "im", "singular"}, {}};
  Series plot{"abs", "index", "abs_sigma", {}};
  Json values = Json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto v = s.try_evaluate(pts[i]);
    values.push_back(Json{{"point", nums(pts[i])}, {"value", v ? num(*v) : Json(nullptr)}, {"singular", !v}});
    t.add({std::to_string(i + 1), format_point(pts[i]), v ? cell(v->real()) : "", v ? cell(v->imag()) : "",
           v ? "0" : "1"});
    if (v) plot.points.emplace_back(static_cast<double>(i + 1), std::abs(*v));
  }
  r.result = Json{{"symbol", s.name()}, {"m", s.m()}, {"n", s.n()}, {"expression", s.to_string()}, {"values", values}};
  r.tables.push_back(std::move(t));
  r.series.push_back(std::move(plot));
  return r;
}

inline int resolve_order(const RunConfig& cfg, const SymbolExpr& s) {
  const int N = cfg.integer("N");
  if (N >= 0) return N;
  if (cfg.has("p")) return required_N(holder_target(resolve_p(cfg, s.m())), s.n()).L;
  return 0;
}

inline SamplerSpec resolve_sampler(const RunConfig& cfg) {
  SamplerSpec spec;
  spec.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  return spec;
}

inline CommandResult cmd_cancel_check(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  const int N = resolve_order(cfg, s);
  int block = cfg.integer("block");
  if (block == 0) block = s.m();
  if (block < 1 || block > s.m()) throw ConfigError("config key 'block': must be in 1.." + std::to_string(s.m()));
  auto rep = check_cancellation(s, N, resolve_sampler(cfg), block - 1);
  CommandResult r;
  r.result = report::to_json(rep);
  r.pass = rep.pass;
  Table t{"samples", {"sample", "shell", "radius"}, {}};
  for (const auto& a : rep.alphas) t.header.push_back("abs_d" + to_string(a));
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& smp = rep.samples[i];
    std::vector<std::string> row{std::to_string(i + 1), std::to_string(smp.shell + 1),
                                 cell(rep.radii[static_cast<std::size_t>(smp.shell)])};
    for (double v : smp.values) row.push_back(cell(v));
    t.add(std::move(row));
  }
  // Per shell, the largest scale-invariant derivative over all alpha.
  Series plot{"shell_max", "radius", "max_scaled_derivative", {}};
  for (std::size_t sh = 0; sh < rep.radii.size(); ++sh) {
    double m = 0.0;
    bool any = false;
    for (const auto& smp : rep.samples) {
      if (static_cast<std::size_t>(smp.shell) != sh) continue;
      any = true;
      double rho = euclid_norm(smp.point);
      for (std::size_t a = 0; a < smp.values.size(); ++a)
        m = std::max(m, smp.values[a] * std::pow(rho, order(rep.alphas[a])));
    }
    if (any) plot.points.emplace_back(rep.radii[sh], m);
  }
  r.tables.push_back(std::move(t));
  r.series.push_back(std::move(plot));
  return r;
}

inline CommandResult cmd_decay_check(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  const auto p = resolve_p(cfg, s.m());
  const Grid g = resolve_grid(cfg, s.n());
  const int N = cfg.integer("N") >= 0 ? cfg.integer("N") : required_N(holder_target(p), s.n()).N;
  auto decay = estimate_decay(s, cfg.integer("order"), resolve_sampler(cfg));
  auto battery = resolve_battery(cfg, s.m(), g, N, p);
  const std::size_t t = resolve_tuple(cfg, battery);
  auto applied = apply_tuple(s, battery.tuples[t], g, parse_algorithm(cfg.str("algorithm")));
  const auto& d = applied.decay;
  const double ratio = d.far_field_ratio / d.predicted_ratio;
  CommandResult r;
  r.pass = std::isfinite(d.C) && d.violations == 0 && ratio >= 0.5 && ratio <= 2.0;
  r.result = Json{{"symbol", s.name()},
                  {"symbol_decay", report::to_json(decay)},
                  {"tuple", t + 1},
                  {"N", N},
                  {"pointwise", report::to_json(d)},
                  {"far_field_ratio_over_predicted", num(ratio)}};
  Table tab{"symbol_decay", {"alpha", "sup_cm", "sup_weak"}, {}};
  for (const auto& e : decay.entries) tab.add({to_string(e.alpha), cell(e.sup_cm), cell(e.sup_weak)});
  r.tables.push_back(std::move(tab));
  const Grid& og = applied.T.grid();
  const auto bv = applied.majorant.values();
  r.series.push_back(axis_profile(og, "abs_T", "abs_T", [&](std::size_t i) { return std::abs(applied.T[i]); }));
  r.series.push_back(axis_profile(og, "majorant", "b", [&](std::size_t i) { return bv[i]; }));
  return r;
}

inline CommandResult cmd_atom_make(const RunConfig& cfg) {
  const Grid g = cfg.grid();
  const int n = g.dim();
  if (!cfg.has("beta")) throw ConfigError("config key 'beta' is required for atom-make");
  MultiIndex beta;
  std::vector<double> center(static_cast<std::size_t>(n), 0.0);
  try {
    beta = parse_multiindex(cfg.str("beta"), n);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'beta': ") + e.what());
  }
  if (cfg.has("center")) {
    try {
      center = parse_point(cfg.str("center"), n);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config key 'center': ") + e.what());
    }
  }
  const double radius = cfg.real("radius");
  const double p = cfg.has("p") ? cfg.reals("p").front() : 1.0;
  SmoothAtom a = normalize(derivative_atom(beta, center, radius, g), p);
  CommandResult r;
  r.result = Json{{"atom", report::to_json(a)}, {"file", "atom.csv"}};
  std::ostringstream os;
  write_atom_csv(os, a);
  r.files.emplace_back("atom.csv", os.str());
  r.series.push_back(axis_profile(g, "atom", "a", [&](std::size_t i) { return a.field()[i].real(); }));
  return r;
}

inline CommandResult cmd_atom_verify(const RunConfig& cfg) {
  if (!cfg.has("atom-file")) throw ConfigError("config key 'atom-file' is required for atom-verify");
  std::ifstream is(cfg.str("atom-file"));
  if (!is) throw ConfigError("config key 'atom-file': cannot open '" + cfg.str("atom-file") + "'");
  SmoothAtom a = read_atom_csv(is);
  CommandResult r;
  // Closed-form atoms are re-certified on the certification lattice; the
  // working-grid residual is reported alongside.
  const int N = a.vanishing_order();
  const double certified = a.closed_form() ? verify_moments(a.callable(), a.cube(), N) : verify_moments(a, N);
  r.result = Json{{"atom", report::to_json(a)},
                  {"verify_moments", num(certified)},
                  {"grid_moment_residual", num(verify_moments(a, N))},
                  {"certified", true}};
  return r;
}

inline CommandResult cmd_apply(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  const auto p = resolve_p(cfg, s.m());
  const Grid g = resolve_grid(cfg, s.n());
  const int N = cfg.integer("N") >= 0 ? cfg.integer("N") : required_N(holder_target(p), s.n()).N;
  auto battery = resolve_battery(cfg, s.m(), g, N, p);
  const std::size_t t = resolve_tuple(cfg, battery);
  MultiplierPlan plan{s, g, parse_algorithm(cfg.str("algorithm")), 0.0, false};
  std::vector<SampledField> fields;
  for (const auto& a : battery.tuples[t]) fields.push_back(a.field());
  ApplyInfo info;
  SampledField T = apply(plan, fields, &info);
  CommandResult r;
  r.result = Json{{"symbol", s.name()},
                  {"algorithm", to_string(plan.algorithm)},
                  {"grid", report::to_json(g)},
                  {"tuple", t + 1},
                  {"max_abs", num(T.max_abs())},
                  {"singular_points", info.singular_points},
                  {"max_input_tail_ratio", num(info.max_input_tail_ratio)},
                  {"tail_warning", info.tail_warning},
                  {"file", "T.csv"}};
  std::ostringstream os;
  write_field_csv(os, T, {{"symbol", s.name()}, {"algorithm", to_string(plan.algorithm)}});
  r.files.emplace_back("T.csv", os.str());
  r.series.push_back(axis_profile(g, "re_T", "re_T", [&](std::size_t i) { return T[i].real(); }));
  r.series.push_back(axis_profile(g, "im_T", "im_T", [&](std::size_t i) { return T[i].imag(); }));
  return r;
}

inline std::vector<MultiIndex> resolve_alphas(const RunConfig& cfg, int n) {
  if (!cfg.has("alpha")) return multiindices_up_to(n, 1);
  std::vector<MultiIndex> out;
  std::stringstream ss(cfg.str("alpha"));
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(parse_multiindex(item, n));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config key 'alpha': ") + e.what());
    }
  }
  return out;
}

inline QuadratureSpec resolve_quadrature(const RunConfig& cfg) {
  QuadratureSpec q;
  q.delta = cfg.real("delta");
  return q;
}

struct IdentityOutcome {
  Json reports = Json::array();
  Table table{"identity", {"tuple", "alpha", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_err", "verdict"}, {}};
  Series plot{"rel_err", "entry", "rel_err", {}};
  double worst = 0.0;
  bool pass = true;
};

inline IdentityOutcome run_identity(const SymbolExpr& s, const AtomBattery& b, const std::vector<MultiIndex>& alphas,
                                    const Grid& g, const QuadratureSpec& q, double tol, Algorithm algo) {
  IdentityOutcome o;
  for (std::size_t t = 0; t < b.size(); ++t) {
    auto applied = apply_tuple(s, b.tuples[t], g, algo);
    for (const auto& a : alphas) {
      auto rep = identity_report(applied, s, b.tuples[t], a, q, tol);
      Json j = report::to_json(rep);
      j["tuple"] = t + 1;
      o.reports.push_back(std::move(j));
      o.table.add({std::to_string(t + 1), to_string(a), cell(rep.lhs.real()), cell(rep.lhs.imag()),
                   cell(rep.rhs.real()), cell(rep.rhs.imag()), cell(rep.rel_err), rep.pass ? "pass" : "fail"});
      o.plot.points.emplace_back(static_cast<double>(o.plot.points.size() + 1), rep.rel_err);
      o.worst = std::max(o.worst, rep.rel_err);
      o.pass = o.pass && rep.pass;
    }
  }
  return o;
}

inline CommandResult cmd_identity(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  const auto p = resolve_p(cfg, s.m());
  const Grid g = resolve_grid(cfg, s.n());
  const int N = cfg.integer("N") >= 0 ? cfg.integer("N") : required_N(holder_target(p), s.n()).N;
  auto battery = resolve_battery(cfg, s.m(), g, N, p);
  const double tol = cfg.real("tolerance") > 0.0 ? cfg.real("tolerance") : kIdentityTolerance;
  auto o = run_identity(s, battery, resolve_alphas(cfg, s.n()), g, resolve_quadrature(cfg), tol,
                        parse_algorithm(cfg.str("algorithm")));
  CommandResult r;
  r.pass = o.pass;
  r.result = Json{{"symbol", s.name()}, {"battery_N", N}, {"tolerance", num(tol)}, {"worst_rel_err", num(o.worst)},
                  {"reports", std::move(o.reports)}};
  r.tables.push_back(std::move(o.table));
  r.series.push_back(std::move(o.plot));
  return r;
}

inline Table equivalence_table(const EquivalenceReport& e) {
  Table t{"moments", {"tuple", "alpha", "abs_lhs", "threshold", "tail_estimate", "verdict"}, {}};
  for (const auto& m : e.moment_battery)
    t.add({std::to_string(m.tuple + 1), to_string(m.alpha), cell(m.abs_lhs), cell(m.threshold), cell(m.tail_estimate),
           m.pass ? "pass" : "fail"});
  return t;
}

inline CommandResult cmd_equivalence(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  const auto p = resolve_p(cfg, s.m());
  const Grid g = resolve_grid(cfg, s.n());
  const int N = required_N(holder_target(p), s.n()).N;
  auto battery = resolve_battery(cfg, s.m(), g, N, p);
  auto e = equivalence_harness(s, p, battery, resolve_sampler(cfg));
  CommandResult r;
  r.pass = e.agree && e.block_independent;
  r.result = report::to_json(e);
  r.tables.push_back(equivalence_table(e));
  Series plot{"abs_lhs", "entry", "abs_lhs", {}};
  for (const auto& m : e.moment_battery) plot.points.emplace_back(static_cast<double>(plot.points.size() + 1), m.abs_lhs);
  r.series.push_back(std::move(plot));
  return r;
}

inline MaximalSpec resolve_maximal(const RunConfig& cfg) {
  MaximalSpec m;
  m.j_min = cfg.integer("j-min");
  m.j_max = cfg.integer("j-max");
  return m;
}

inline CommandResult cmd_maximal(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  const auto p = resolve_p(cfg, s.m());
  const Grid g = resolve_grid(cfg, s.n());
  const int N = cfg.integer("N") >= 0 ? cfg.integer("N") : required_N(holder_target(p), s.n()).N;
  auto battery = resolve_battery(cfg, s.m(), g, N, p);
  const std::size_t t = resolve_tuple(cfg, battery);
  auto applied = apply_tuple(s, battery.tuples[t], g, parse_algorithm(cfg.str("algorithm")));
  const double hp = cfg.real("hp-p") > 0.0 ? cfg.real("hp-p") : holder_target(p);
  MaximalSpec spec = resolve_maximal(cfg).clipped(applied.T.grid());
  auto Mf = maximal_with_scales(applied.T, spec);
  auto q = hp_quasinorm(applied.T, hp, spec);
  CommandResult r;
  r.result = Json{{"symbol", s.name()},
                  {"tuple", t + 1},
                  {"output_grid", report::to_json(applied.T.grid())},
                  {"kernel", spec.kernel_name},
                  {"kernel_integral_error", num(spec.kernel_integral_error(g.dim()))},
                  {"scales", nums(Mf.scales)},
                  {"max_Mf", num(Mf.Mf.max_abs())},
                  {"hp_p", num(hp)},
                  {"hp_quasinorm", num(q.value)}};
  r.series.push_back(axis_profile(applied.T.grid(), "Mf", "Mf", [&](std::size_t i) { return Mf.Mf[i].real(); }));
  return r;
}

inline constexpr double kWeakGapTolerance = 1e-3;

inline CommandResult cmd_weakconv(const RunConfig& cfg) {
  const SymbolExpr s = resolve_symbol(cfg);
  const Grid g = resolve_grid(cfg, 1);
  auto ks = cfg.reals("k-list");
  if (ks.empty()) throw ConfigError("config key 'k-list' is empty");
  WeakConvReport w;
  try {
    w = weakconv_demo(s, default_weakconv_inputs(), ks, g);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'k-list': ") + e.what());
  }
  // Hypothesis sigma(xi, -xi) = 0: the gaps must vanish; otherwise they must not.
  const bool cancels = check_cancellation(s, 0, resolve_sampler(cfg)).pass;
  const bool vanishes = w.relative_gaps.back() <= kWeakGapTolerance;
  CommandResult r;
  r.pass = cancels == vanishes;
  r.result = report::to_json(w);
  r.result["cancels_on_diagonal"] = cancels;
  r.result["gap_vanishes"] = vanishes;
  r.result["gap_tolerance"] = kWeakGapTolerance;
  r.result["prediction_rel_error"] =
      num(std::abs(w.gaps.back() - std::abs(w.predicted_gap)) / std::max(std::abs(w.predicted_gap), 1e-300));
  Series plot{"gaps", "k", "gap", {}};
  for (std::size_t i = 0; i < ks.size(); ++i) plot.points.emplace_back(ks[i], w.gaps[i]);
  r.series.push_back(std::move(plot));
  return r;
}

}  // namespace multcancel::cli
