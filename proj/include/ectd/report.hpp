#pragma once

// JSON and CSV serialization of the library's result types.

#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ectd/constants.hpp"
#include "ectd/curves.hpp"
#include "ectd/family.hpp"
#include "ectd/galois.hpp"
#include "ectd/reduction.hpp"
#include "ectd/titchmarsh.hpp"

namespace ectd {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

/// Integers that may exceed 64 bits are written as strings when they do.
inline Json json_integer(i128 v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
    return Json(std::int64_t(v));
  }
  return Json(to_string(v));
}

inline Json json_integer(u128 v) {
  if (v <= std::numeric_limits<std::uint64_t>::max()) return Json(std::uint64_t(v));
  return Json(to_string(v));
}

inline Json to_json(const ConstantValue& c) {
  return Json{{"value", c.value}, {"error_bound", c.error_bound}, {"cutoff", c.cutoff}};
}

inline Json to_json(const ConstantTriple& t) {
  return Json{{"c_d1", to_json(t.c_d1)}, {"c_tau_d1", to_json(t.c_tau_d1)},
              {"c_d2", to_json(t.c_d2)}};
}

inline Json rational_json(const Rational& r) {
  return Json{{"exact", to_string(r)}, {"value", to_double(r)}};
}

inline Json to_json(const SerreConstantReport& r) {
  Json factors = Json::object();
  for (std::size_t i = 0; i < kAllKinds.size(); ++i) {
    factors[to_string(kAllKinds[i])] = rational_json(r.correction_factors[i]);
  }
  return Json{{"m_E", r.m_e}, {"constants", to_json(r.triple)}, {"correction_factors", factors}};
}

inline Json to_json(const Curve& c) {
  Json j{{"a", json_integer(c.a)}, {"b", json_integer(c.b)}, {"delta", json_integer(c.delta)}};
  if (c.j_den == 1) {
    j["j"] = json_integer(c.j_num);
  } else {
    j["j"] = to_string(c.j_num) + "/" + to_string(c.j_den);
  }
  return j;
}

inline Json to_json(const SerreData& s) {
  return Json{{"delta_sf", json_integer(s.delta_sf)},
              {"d_E", json_integer(s.d_e)},
              {"m_E", s.m_e},
              {"unit_discriminant", s.unit_discriminant}};
}

inline Json to_json(const SerreVerdict& v) {
  Json j{{"status", to_string(v.status)},
         {"witness_modulus", v.witness_modulus ? Json(*v.witness_modulus) : Json(nullptr)},
         {"occupancy", v.occupancy}};
  Json moduli = Json::array();
  for (const auto& e : v.evidence) {
    moduli.push_back(Json{{"modulus", e.modulus},
                          {"sample_size", e.sample_size},
                          {"expected_classes", e.expected_classes},
                          {"observed_expected", e.observed_expected},
                          {"observed_unexpected", e.observed_unexpected},
                          {"starved_classes", e.starved_classes},
                          {"occupancy", e.occupancy},
                          {"full_occupancy", e.full_occupancy},
                          {"min_index2_occupancy", e.min_index2_occupancy},
                          {"uses_discriminant_character", e.uses_discriminant_character}});
  }
  j["moduli"] = moduli;
  return j;
}

inline Json optional_json(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json to_json(const ConjectureReport& r) {
  Json j{{"curve", to_json(r.curve)},
         {"cm_discriminant", r.cm_discriminant ? Json(*r.cm_discriminant) : Json(nullptr)},
         {"serre_level", r.level ? to_json(*r.level) : Json(nullptr)},
         {"verdict", to_json(r.verdict)},
         {"constants_provenance", to_string(r.provenance)},
         {"conditional_on_serre_hypothesis", r.provenance == Provenance::serre_exact},
         {"constants", to_json(r.constants)}};
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    const auto& c = r.checkpoints[i];
    const auto& q = r.ratios[i];
    Json row{{"x", c.x},
             {"good_primes", c.good_primes},
             {"s_d1", c.s_d1},
             {"s_tau_d1", c.s_tau_d1},
             {"s_d2", c.s_d2},
             {"li_x", c.li_x},
             {"li_x2", c.li_x2},
             {"ratio_d1", optional_json(q.d1)},
             {"ratio_tau_d1", optional_json(q.tau_d1)},
             {"ratio_d2", optional_json(q.d2)}};
    if (r.cm_discriminant) row["d1_over_x"] = optional_json(q.d1_over_x);
    rows.push_back(row);
  }
  j["checkpoints"] = rows;
  return j;
}

inline void write_csv(std::ostream& out, const ConjectureReport& r) {
  const bool cm = r.cm_discriminant.has_value();
  out << "x,s_d1,s_tau_d1,s_d2,li_x,li_x2,ratio_d1,ratio_tau_d1,ratio_d2,constants_provenance";
  if (cm) out << ",d1_over_x";
  out << '\n';
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    const auto& c = r.checkpoints[i];
    const auto& q = r.ratios[i];
    out << c.x << ',' << c.s_d1 << ',' << c.s_tau_d1 << ',' << c.s_d2 << ','
        << format_double(c.li_x) << ',' << format_double(c.li_x2) << ',' << format_optional(q.d1)
        << ',' << format_optional(q.tau_d1) << ',' << format_optional(q.d2) << ','
        << to_string(r.provenance);
    if (cm) out << ',' << format_optional(q.d1_over_x);
    out << '\n';
  }
}

inline Json to_json(const FamilyCensus& c) {
  Json counts = Json::array();
  for (const auto& e : kCmTable) {
    counts.push_back(Json{{"j", e.j},
                          {"order_discriminant", e.order_discriminant},
                          {"count", c.cm_counts.at(e.j)}});
  }
  return Json{{"total", c.total},
              {"cm_counts", counts},
              {"serre_like", c.serre_like},
              {"non_serre", c.non_serre},
              {"screen_x", c.screen_x ? Json(*c.screen_x) : Json(nullptr)}};
}

inline void write_csv(std::ostream& out, const FamilyCensus& c) {
  out << "class,j,order_discriminant,count\n";
  out << "total,,," << c.total << '\n';
  for (const auto& e : kCmTable) {
    out << "cm," << e.j << ',' << e.order_discriminant << ',' << c.cm_counts.at(e.j) << '\n';
  }
  out << "serre_like,,," << c.serre_like << '\n';
  out << "non_serre,,," << c.non_serre << '\n';
}

inline Json to_json(const MomentReport& m) {
  return Json{{"A", m.spec.A},
              {"B", m.spec.B},
              {"n", m.n},
              {"kind", to_string(m.kind)},
              {"estimate", m.estimate},
              {"mean", m.mean},
              {"mean_deviation", m.mean_deviation},
              {"absolute_moment", m.absolute_moment},
              {"central_moment", m.central_moment},
              {"min_constant", m.min_constant},
              {"max_constant", m.max_constant},
              {"idealized", to_json(m.idealized)},
              {"curves_used", m.curves_used},
              {"cm_excluded", m.cm_excluded},
              {"not_serre_flags", m.not_serre_flags},
              {"screen_x", m.screen_x ? Json(*m.screen_x) : Json(nullptr)}};
}

inline void write_csv(std::ostream& out, const MomentReport& m) {
  out << "A,B,n,kind,estimate,mean,mean_deviation,absolute_moment,central_moment,idealized,"
         "curves_used,cm_excluded,not_serre_flags\n";
  out << m.spec.A << ',' << m.spec.B << ',' << m.n << ',' << to_string(m.kind) << ','
      << format_double(m.estimate) << ',' << format_double(m.mean) << ','
      << format_double(m.mean_deviation) << ',' << format_double(m.absolute_moment) << ','
      << format_double(m.central_moment) << ',' << format_double(m.idealized.value) << ','
      << m.curves_used << ',' << m.cm_excluded << ',' << m.not_serre_flags << '\n';
}

}  // namespace ectd
