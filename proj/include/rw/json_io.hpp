#pragma once

// JSON encodings of the library's reports. Schemas live in schemas/.

#include <rw/construct.hpp>
#include <rw/errors.hpp>
#include <rw/intlat.hpp>
#include <rw/oracle.hpp>
#include <rw/verify.hpp>
#include <rw/wreath.hpp>
#include <rw/zqmod.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace rw {

using nlohmann::json;

inline json to_json(const ExtNat& n) {
  if (n.is_infinite()) return "infinite";
  if (n.value() <= std::numeric_limits<std::uint64_t>::max()) return n.value().convert_to<std::uint64_t>();
  return n.value().str();
}

inline ExtNat ext_nat_from_json(const json& j) {
  if (j.is_number_unsigned()) return ExtNat(Int(j.get<std::uint64_t>()));
  if (j.is_number_integer()) return ExtNat(Int(j.get<std::int64_t>()));
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "infinite") return ExtNat::infinite();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("bad extended natural '" + s + "'", 0);
    return ExtNat(Int(s));
  }
  throw ParseError("extended natural must be an integer or \"infinite\"", 0);
}

inline json to_json(const ZkVector& v) { return json(v); }

inline std::string component_spec(const Component& c) {
  return std::to_string(c.p) + "^" + std::to_string(c.r) + ":" + std::to_string(c.d);
}

inline json to_json(const CaseReport& rep, const FiniteAbelianGroup& g, std::size_t k) {
  json cases = json::array();
  for (int c = 1; c <= 3; ++c)
    cases.push_back({{"case", c},
                     {"applicable", rep.applicable[static_cast<std::size_t>(c - 1)]},
                     {"reason", rep.reasons[static_cast<std::size_t>(c - 1)]}});
  auto low = rep.lowest();
  return {{"schema", "rw.classification/1"},
          {"group", g.to_string()},
          {"k", k},
          {"cases", cases},
          {"default_case", low ? json(case_number(*low)) : json(nullptr)}};
}

inline json to_json(const Construction& c) {
  json f = json::array(), layout = json::array();
  const auto& comps = c.group.components();
  for (std::size_t i = 0; i < comps.size(); ++i)
    f.push_back({{"component", component_spec(comps[i])},
                 {"matrix", format_mod_matrix(c.automorphism.F().blocks()[i])}});
  for (const auto& l : c.block_layout)
    layout.push_back({{"component", component_spec(l.component)},
                      {"blocks", l.blocks},
                      {"scalar", l.scalar ? json(*l.scalar) : json(nullptr)}});
  return {{"schema", "rw.construction/1"},
          {"group", c.group.to_string()},
          {"k", c.k},
          {"case", case_number(c.case_tag)},
          {"M", format_matrix(c.automorphism.M())},
          {"twist", c.automorphism.twist()},
          {"F", f},
          {"predicted_R", to_json(c.predicted_R)},
          {"block_layout", layout}};
}

/// Rebuilds and validates a Construction; any inconsistency is a
/// PreconditionError or ParseError.
inline Construction construction_from_json(const json& j) {
  try {
    FiniteAbelianGroup g = FiniteAbelianGroup::parse(j.at("group").get<std::string>());
    auto k = j.at("k").get<std::size_t>();
    CaseTag tag = case_from_number(j.at("case").get<int>());
    IntMatrix m = parse_matrix(j.at("M").get<std::string>());
    if (m.dim() != k) throw PreconditionError("M has dimension " + std::to_string(m.dim()) + ", expected k = " + std::to_string(k));
    ZkVector twist = j.contains("twist") ? j.at("twist").get<ZkVector>() : ZkVector(k, 0);
    const auto& fj = j.at("F");
    const auto& comps = g.components();
    if (fj.size() != comps.size()) throw PreconditionError("F must list one block per component");
    std::vector<ModMatrix> blocks;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (fj[i].at("component").get<std::string>() != component_spec(comps[i]))
        throw PreconditionError("F block " + std::to_string(i) + " names the wrong component");
      IntMatrix raw = parse_matrix(fj[i].at("matrix").get<std::string>());
      if (raw.dim() != comps[i].d) throw PreconditionError("F block " + std::to_string(i) + " has the wrong size");
      blocks.push_back(ModMatrix::reduce(raw, comps[i].q()));
    }
    WreathAutomorphism phi(GAutomorphism(g, std::move(blocks)), std::move(m), std::move(twist));
    std::vector<ComponentLayout> layout;
    if (j.contains("block_layout"))
      for (const auto& l : j.at("block_layout")) {
        Component c = FiniteAbelianGroup::parse(l.at("component").get<std::string>()).components().at(0);
        std::optional<std::int64_t> scalar;
        if (l.contains("scalar") && !l.at("scalar").is_null()) scalar = l.at("scalar").get<std::int64_t>();
        layout.push_back({c, l.at("blocks").get<std::vector<std::string>>(), scalar});
      }
    return {g, k, tag, std::move(phi), ext_nat_from_json(j.at("predicted_R")), std::move(layout)};
  } catch (const json::exception& e) {
    throw ParseError(std::string("construction JSON: ") + e.what(), 0);
  }
}

inline json to_json(const OrbitCheck& o, const WreathProduct& w) {
  json ev = json::array();
  for (const auto& e : o.evidence)
    ev.push_back({{"component", component_spec(e.component)},
                  {"det_assembled_mod_p", e.det_assembled_mod_p},
                  {"det_power_mod_p", e.det_power_mod_p}});
  json fixed = nullptr;
  if (o.fixed_element) fixed = w.format(WreathElement{*o.fixed_element, ZkVector(w.rank(), 0)});
  return {{"x", o.x}, {"length", o.length()}, {"points", o.points},
          {"epimorphic", o.epimorphic}, {"evidence", ev}, {"fixed_element", fixed}};
}

inline json to_json(const VerificationReport& r, const WreathProduct& w) {
  json per = json::array();
  for (const auto& rc : r.per_rep) {
    json orbits = json::array();
    for (const auto& o : rc.orbits) orbits.push_back(to_json(o, w));
    per.push_back({{"z", rc.z}, {"verdict", verdict_name(rc.verdict)}, {"orbits", orbits}});
  }
  return {{"schema", "rw.verification/1"},
          {"r_bar", to_json(r.r_bar)},
          {"order_M", r.order_M ? json(*r.order_M) : json(nullptr)},
          {"representatives", r.representatives},
          {"per_representative", per},
          {"r_total", to_json(r.r_total)}};
}

inline json to_json(const PullbackResult& p) {
  return {{"cylinders", p.cylinders},
          {"quotient_epimorphic", p.quotient_epi},
          {"verdict", pullback_verdict_name(p.verdict)},
          {"classes", p.classes},
          {"base_classes", p.base_classes},
          {"counterexample", p.counterexample ? json::array({p.counterexample->first, p.counterexample->second})
                                               : json(nullptr)}};
}

}  // namespace rw
