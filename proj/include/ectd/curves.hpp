#pragma once

// Short Weierstrass curves y^2 = x^3 + a x + b over Q and their level data.

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "ectd/arith.hpp"
#include "ectd/cm_table.hpp"
#include "ectd/multiplicative.hpp"

namespace ectd {

struct Curve {
  i128 a = 0;
  i128 b = 0;
  i128 delta = 0;  // -16 (4a^3 + 27b^2)
  i128 j_num = 0;
  i128 j_den = 1;  // > 0, gcd(j_num, j_den) = 1
};

inline Curve curve_invariants(i128 a, i128 b) {
  const i128 a3 = checked_mul(checked_mul(a, a), a);
  const i128 core = checked_add(checked_mul(4, a3), checked_mul(27, checked_mul(b, b)));
  if (core == 0) throw std::domain_error("singular curve");
  Curve c;
  c.a = a;
  c.b = b;
  c.delta = checked_mul(-16, core);
  i128 num = checked_mul(6912, a3);
  i128 den = core;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const i128 g = i128(gcd(uabs(num), uabs(den)));
  c.j_num = num / g;
  c.j_den = den / g;
  return c;
}

inline bool j_is_integral(const Curve& c) { return c.j_den == 1; }

/// CM order discriminant when j is one of the thirteen rational CM j-invariants.
inline std::optional<int> cm_class(const Curve& c) {
  if (c.j_den != 1) return std::nullopt;
  if (c.j_num > std::numeric_limits<std::int64_t>::max() ||
      c.j_num < std::numeric_limits<std::int64_t>::min()) {
    return std::nullopt;
  }
  return cm_discriminant_for_j(std::int64_t(c.j_num));
}

struct SerreData {
  i128 delta_sf = 0;
  i128 d_e = 0;
  std::uint64_t m_e = 0;
  bool unit_discriminant = false;  // delta_sf = +-1
};

inline SerreData serre_level(const Curve& c) {
  if (cm_class(c)) throw std::domain_error("serre_level: curve has complex multiplication");
  SerreData s;
  s.delta_sf = squarefree_part(c.delta);
  const i128 r = ((s.delta_sf % 4) + 4) % 4;
  s.d_e = r == 1 ? s.delta_sf : checked_mul(4, s.delta_sf);
  const u128 abs_d = uabs(s.d_e);
  const u128 m = abs_d % 2 == 0 ? abs_d : 2 * abs_d;
  if (m > std::numeric_limits<std::uint64_t>::max()) {
    throw std::domain_error("serre_level: level exceeds 64 bits");
  }
  s.m_e = std::uint64_t(m);
  s.unit_discriminant = s.delta_sf == 1 || s.delta_sf == -1;
  return s;
}

/// [Q(E[m]) : Q] for a Serre curve.
inline u128 division_degree_serre(const SerreData& s, std::uint64_t m) {
  if (m == 0) throw std::domain_error("division_degree_serre: m must be positive");
  const u128 full = gl2_order(m);
  if (m % s.m_e != 0) return full;
  if (full % 2 != 0) throw std::logic_error("division_degree_serre: odd group order");
  return full / 2;
}

}  // namespace ectd
