#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "multcancel/atoms/atoms.hpp"
#include "multcancel/multiplier/tail.hpp"
#include "multcancel/symbols/checks.hpp"
#include "multcancel/verify/equivalence.hpp"
#include "multcancel/verify/moments.hpp"
#include "multcancel/verify/weakconv.hpp"

namespace multcancel::report {

using Json = nlohmann::ordered_json;

// JSON has no inf/nan; those are written as strings.
inline Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline Json num(cplx v) { return Json::array({num(v.real()), num(v.imag())}); }

inline Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json to_json(const Grid& g) {
  return Json{{"n", g.dim()}, {"L", g.half_extent()}, {"M", g.points_per_axis()}};
}

inline Json to_json(const MultiIndex& a) { return to_string(a); }

inline Json to_json(const SupportCube& q) { return Json{{"center", nums(q.center)}, {"side", num(q.side)}}; }

inline Json to_json(const SmoothAtom& a) {
  Json j{{"provenance", a.provenance()},
         {"representation", a.closed_form() ? "closed_form" : "spectral"},
         {"grid", to_json(a.grid())},
         {"cube", to_json(a.cube())},
         {"vanishing_order", a.vanishing_order()},
         {"p", num(a.p())},
         {"sup_bound", num(a.sup_bound())},
         {"moment_residual", num(a.moment_residual())},
         {"grid_moment_residual", num(a.grid_moment_residual())},
         {"support_leakage", num(a.support_leakage())}};
  return j;
}

inline Json to_json(const CancellationReport& r) {
  Json per = Json::array();
  for (std::size_t a = 0; a < r.alphas.size(); ++a) {
    const auto& s = r.samples.empty() ? CancellationSample{} : r.samples[r.per_alpha_argmax[a]];
    per.push_back(Json{{"alpha", to_json(r.alphas[a])}, {"max", num(r.per_alpha_max[a])}, {"argmax", nums(s.point)}});
  }
  return Json{{"symbol", r.symbol},
              {"max_order", r.max_order},
              {"block", r.block + 1},
              {"seed", r.seed},
              {"tolerance", num(r.tolerance)},
              {"confidence", r.confidence},
              {"samples", r.samples.size()},
              {"rejected_slots", r.rejected_slots},
              {"per_alpha", per},
              {"verdict", r.pass ? "pass" : "fail"}};
}

inline Json to_json(const DecayReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back(Json{{"alpha", to_json(e.alpha)}, {"sup_cm", num(e.sup_cm)}, {"sup_weak", num(e.sup_weak)}});
  return Json{{"symbol", r.symbol},
              {"max_order", r.max_order},
              {"radii", nums(r.radii)},
              {"entries", entries},
              {"cm_consistent", r.cm_consistent}};
}

inline Json to_json(const DecayCheck& d) {
  return Json{{"C", num(d.C)},
              {"C_far", num(d.C_far)},
              {"C_ref", num(d.C_ref)},
              {"violations", d.violations},
              {"argmax", nums(d.argmax)},
              {"far_field_radius", num(d.far_field_radius)},
              {"far_field_ratio", num(d.far_field_ratio)},
              {"predicted_ratio", num(d.predicted_ratio)}};
}

inline Json to_json(const MomentReport& r) {
  Json tubes = Json::array();
  for (int t : r.excluded_tubes) tubes.push_back(t);
  return Json{{"alpha", to_json(r.alpha)},
              {"lhs", num(r.lhs)},
              {"rhs", num(r.rhs)},
              {"abs_err", num(r.abs_err)},
              {"rel_err", num(r.rel_err)},
              {"scale", num(r.scale)},
              {"floor_scale", num(r.floor_scale)},
              {"tail_estimate", num(r.tail_estimate)},
              {"tolerance", num(r.tolerance)},
              {"quadrature",
               Json{{"grid", to_json(r.grid)},
                    {"output_grid", to_json(r.output_grid)},
                    {"delta", num(r.delta)},
                    {"truncation_radius", num(r.truncation_radius)},
                    {"excluded_tubes", tubes}}},
              {"verdict", r.pass ? "pass" : "fail"}};
}

inline Json to_json(const MomentEntry& e) {
  return Json{{"tuple", e.tuple + 1},
              {"alpha", to_json(e.alpha)},
              {"lhs", num(e.lhs)},
              {"abs_lhs", num(e.abs_lhs)},
              {"scale", num(e.scale)},
              {"tail_estimate", num(e.tail_estimate)},
              {"threshold", num(e.threshold)},
              {"verdict", e.pass ? "pass" : "fail"}};
}

inline Json to_json(const EquivalenceReport& r) {
  Json moments = Json::array();
  for (const auto& e : r.moment_battery) moments.push_back(to_json(e));
  return Json{{"symbol", r.symbol},
              {"p", nums(r.p)},
              {"p_target", num(r.p_target)},
              {"L", r.L},
              {"battery_N", r.battery_N},
              {"grid", to_json(r.grid)},
              {"cancellation", to_json(r.cancellation)},
              {"cancellation_block_1", to_json(r.cancellation_first)},
              {"block_independent", r.block_independent},
              {"moments_pass", r.moments_pass},
              {"moment_battery", moments},
              {"agree", r.agree}};
}

inline Json to_json(const LinearReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) entries.push_back(to_json(e));
  return Json{{"symbol", r.symbol}, {"N", r.N}, {"entries", entries}, {"verdict", r.pass ? "pass" : "fail"}};
}

inline Json to_json(const WeakConvReport& r) {
  Json pairings = Json::array();
  for (auto p : r.pairings) pairings.push_back(num(p));
  return Json{{"symbol", r.symbol},
              {"grid", to_json(r.grid)},
              {"k_list", nums(r.k_list)},
              {"pairings", pairings},
              {"limit_pairing", num(r.limit_pairing)},
              {"gaps", nums(r.gaps)},
              {"relative_gaps", nums(r.relative_gaps)},
              {"scale", num(r.scale)},
              {"predicted_gap", num(r.predicted_gap)}};
}

}  // namespace multcancel::report
