#pragma once

// Frobenius (trace, determinant) statistics modulo small m and a sampling
// test for the Serre-curve property.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ectd/arith.hpp"
#include "ectd/curves.hpp"
#include "ectd/reduction.hpp"

namespace ectd {

/// Counts of (a_p mod m, p mod m), indexed trace * m + det.
struct FrobeniusSignature {
  std::uint64_t modulus = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t sample_size = 0;

  [[nodiscard]] std::uint64_t count(std::uint64_t trace, std::uint64_t det) const {
    return counts[trace * modulus + det];
  }

  void merge(const FrobeniusSignature& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    sample_size += other.sample_size;
  }
};

inline FrobeniusSignature frobenius_signature(std::uint64_t m,
                                              const std::vector<ReductionRecord>& records,
                                              std::uint64_t x) {
  if (m == 0 || m > 100) throw std::domain_error("frobenius_signature: modulus must be in [1, 100]");
  FrobeniusSignature s;
  s.modulus = m;
  s.counts.assign(m * m, 0);
  for (const auto& r : records) {
    if (r.p > x || std::gcd(r.p, m) != 1) continue;
    const auto t = std::uint64_t(((r.a_p % std::int64_t(m)) + std::int64_t(m)) % std::int64_t(m));
    ++s.counts[t * m + r.p % m];
    ++s.sample_size;
  }
  return s;
}

inline FrobeniusSignature frobenius_signature(const Curve& c, std::uint64_t m, std::uint64_t x) {
  std::vector<ReductionRecord> records;
  for (std::uint64_t p : good_primes(c, x)) {
    if (std::gcd(p, m) != 1) continue;
    records.push_back({p, trace_ap(c, p), 0, 0, 0});
  }
  return frobenius_signature(m, records, x);
}

// ---------------------------------------------------------------------------
// Class tables for GL_2(Z/mZ)
// ---------------------------------------------------------------------------

/// Per-(trace, det) element counts of GL_2(Z/mZ), split by the sign character
/// through GL_2(Z/2Z) = S_3 when m is even, and the smallest class occupancy of
/// any index-2 subgroup.
struct ClassTable {
  std::uint64_t m = 0;
  std::uint64_t group_order = 0;
  std::vector<std::uint64_t> even_counts;  // elements with sign +1
  std::vector<std::uint64_t> odd_counts;   // elements with sign -1 (zero for odd m)
  std::uint64_t attainable = 0;            // m * phi(m)
  double min_index2_occupancy = 1.0;
};

namespace detail {

struct Mat {
  std::uint32_t a, b, c, d;
};

inline std::uint32_t encode(const Mat& g, std::uint32_t m) {
  return ((g.a * m + g.b) * m + g.c) * m + g.d;
}

inline Mat decode(std::uint32_t code, std::uint32_t m) {
  Mat g{};
  g.d = code % m;
  code /= m;
  g.c = code % m;
  code /= m;
  g.b = code % m;
  g.a = code / m;
  return g;
}

inline Mat multiply(const Mat& x, const Mat& y, std::uint32_t m) {
  return {(x.a * y.a + x.b * y.c) % m, (x.a * y.b + x.b * y.d) % m, (x.c * y.a + x.d * y.c) % m,
          (x.c * y.b + x.d * y.d) % m};
}

inline ClassTable build_class_table(std::uint32_t m) {
  ClassTable t;
  t.m = m;
  t.even_counts.assign(std::size_t(m) * m, 0);
  t.odd_counts.assign(std::size_t(m) * m, 0);
  const std::uint32_t total = m * m * m * m;
  std::vector<std::uint32_t> elements;
  std::vector<std::int8_t> in_group(total, 0);
  for (std::uint32_t code = 0; code < total; ++code) {
    const Mat g = decode(code, m);
    const std::uint32_t det = (g.a * g.d + m * m - (g.b * g.c) % m) % m;
    if (std::gcd(det, m) != 1) continue;
    in_group[code] = 1;
    elements.push_back(code);
    const std::uint32_t tr = (g.a + g.d) % m;
    bool odd = false;
    if (m % 2 == 0) {
      const bool identity_mod2 = g.a % 2 == 1 && g.b % 2 == 0 && g.c % 2 == 0 && g.d % 2 == 1;
      odd = tr % 2 == 0 && !identity_mod2;
    }
    ++(odd ? t.odd_counts : t.even_counts)[tr * m + det];
  }
  t.group_order = elements.size();
  std::uint64_t units = 0;
  for (std::uint32_t u = 0; u < m; ++u) units += std::gcd(u, m) == 1;
  t.attainable = std::uint64_t(m) * units;

  // The subgroup generated by squares, grown one generator at a time.
  std::vector<std::int8_t> in_h(total, 0);
  std::vector<std::uint32_t> h{encode({1, 0, 0, 1 % m}, m)};
  in_h[h[0]] = 1;
  std::vector<Mat> gens;
  for (std::uint32_t code : elements) {
    const Mat g = decode(code, m);
    const std::uint32_t sq = encode(multiply(g, g, m), m);
    if (in_h[sq]) continue;
    gens.push_back(decode(sq, m));
    for (std::size_t i = 0; i < h.size(); ++i) {
      const Mat x = decode(h[i], m);
      for (const Mat& s : gens) {
        const std::uint32_t y = encode(multiply(x, s, m), m);
        if (!in_h[y]) {
          in_h[y] = 1;
          h.push_back(y);
        }
      }
    }
  }
  // Cosets of the square subgroup form an elementary abelian 2-group.
  std::vector<std::int32_t> coset(total, -1);
  std::vector<std::uint32_t> reps;
  for (std::uint32_t code : elements) {
    if (coset[code] >= 0) continue;
    const Mat g = decode(code, m);
    const auto label = std::int32_t(reps.size());
    reps.push_back(code);
    for (std::uint32_t hc : h) coset[encode(multiply(g, decode(hc, m), m), m)] = label;
  }
  const std::size_t q = reps.size();
  if (q == 1) return t;
  auto qmul = [&](std::size_t i, std::size_t j) {
    return std::size_t(coset[encode(multiply(decode(reps[i], m), decode(reps[j], m), m), m)]);
  };
  // Coordinates over F_2 with respect to a greedily chosen basis.
  std::vector<std::int64_t> coords(q, -1);
  const auto identity_coset = std::size_t(coset[h[0]]);
  coords[identity_coset] = 0;
  std::vector<std::size_t> span{identity_coset};
  unsigned rank = 0;
  for (std::size_t i = 0; i < q; ++i) {
    if (coords[i] >= 0) continue;
    const std::int64_t bit = std::int64_t(1) << rank++;
    const std::size_t n = span.size();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t prod = qmul(span[k], i);
      coords[prod] = coords[span[k]] | bit;
      span.push_back(prod);
    }
  }
  for (std::int64_t v = 1; v < (std::int64_t(1) << rank); ++v) {
    std::vector<std::int8_t> seen(std::size_t(m) * m, 0);
    std::uint64_t classes = 0;
    for (std::uint32_t code : elements) {
      if (__builtin_popcountll(std::uint64_t(coords[coset[code]] & v)) % 2 != 0) continue;
      const Mat g = decode(code, m);
      const std::uint32_t det = (g.a * g.d + m * m - (g.b * g.c) % m) % m;
      const std::size_t key = std::size_t((g.a + g.d) % m) * m + det;
      if (!seen[key]) {
        seen[key] = 1;
        ++classes;
      }
    }
    t.min_index2_occupancy =
        std::min(t.min_index2_occupancy, double(classes) / double(t.attainable));
  }
  return t;
}

}  // namespace detail

inline constexpr std::uint64_t kMaxClassTableModulus = 32;

inline const ClassTable& class_table(std::uint64_t m) {
  if (m < 2 || m > kMaxClassTableModulus) {
    throw std::domain_error("class_table: modulus must be in [2, 32]");
  }
  static std::mutex mutex;
  static std::map<std::uint64_t, std::unique_ptr<ClassTable>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[m];
  if (!slot) slot = std::make_unique<ClassTable>(detail::build_class_table(std::uint32_t(m)));
  return *slot;
}

// ---------------------------------------------------------------------------
// Serre heuristic
// ---------------------------------------------------------------------------

enum class SerreStatus { likely_serre, not_serre, inconclusive };

inline std::string to_string(SerreStatus s) {
  switch (s) {
    case SerreStatus::likely_serre: return "likely_serre";
    case SerreStatus::not_serre: return "not_serre";
    case SerreStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ModulusEvidence {
  std::uint64_t modulus = 0;
  std::uint64_t sample_size = 0;
  std::uint64_t expected_classes = 0;
  std::uint64_t observed_expected = 0;  // expected classes seen at least once
  std::uint64_t observed_unexpected = 0;
  std::uint64_t starved_classes = 0;  // expected count >= 25 but never seen
  double min_lambda = 0.0;            // smallest expected count over expected classes
  double occupancy = 0.0;             // observed_expected / expected_classes
  double full_occupancy = 0.0;        // observed classes / all attainable classes
  double min_index2_occupancy = 0.0;
  bool uses_discriminant_character = false;
};

struct SerreVerdict {
  SerreStatus status = SerreStatus::inconclusive;
  std::optional<std::uint64_t> witness_modulus;
  double occupancy = 0.0;
  std::vector<ModulusEvidence> evidence;
};

inline const std::vector<std::uint64_t>& default_serre_moduli() {
  static const std::vector<std::uint64_t> moduli{3, 4, 5, 7, 8, 9, 11, 13};
  return moduli;
}

inline constexpr double kStarvationThreshold = 25.0;

/// Evidence at one modulus. For a Serre curve the image mod m is all of
/// GL_2(Z/mZ) unless m_e | m, when it is the kernel of sign * (d_E / det).
inline ModulusEvidence modulus_evidence(const FrobeniusSignature& sig,
                                        const std::optional<SerreData>& level) {
  const ClassTable& t = class_table(sig.modulus);
  const std::uint64_t m = sig.modulus;
  ModulusEvidence ev;
  ev.modulus = m;
  ev.sample_size = sig.sample_size;
  ev.min_index2_occupancy = t.min_index2_occupancy;
  ev.uses_discriminant_character = level && m % level->m_e == 0;
  std::uint64_t image_order = 0;
  std::vector<std::uint64_t> weight(m * m, 0);
  for (std::uint64_t tr = 0; tr < m; ++tr) {
    for (std::uint64_t det = 0; det < m; ++det) {
      const std::size_t k = tr * m + det;
      if (std::gcd(det, m) != 1) {
        weight[k] = 0;
      } else if (ev.uses_discriminant_character) {
        const int chi = kronecker(level->d_e, det);
        weight[k] = chi == 1 ? t.even_counts[k] : (chi == -1 ? t.odd_counts[k] : 0);
      } else {
        weight[k] = t.even_counts[k] + t.odd_counts[k];
      }
      image_order += weight[k];
    }
  }
  std::uint64_t observed_any = 0;
  ev.min_lambda = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m * m; ++k) {
    const bool seen = sig.counts[k] > 0;
    observed_any += seen;
    if (weight[k] == 0) {
      ev.observed_unexpected += seen;
      continue;
    }
    ++ev.expected_classes;
    ev.observed_expected += seen;
    const double lambda = double(sig.sample_size) * double(weight[k]) / double(image_order);
    ev.min_lambda = std::min(ev.min_lambda, lambda);
    if (!seen && lambda >= kStarvationThreshold) ++ev.starved_classes;
  }
  ev.occupancy = ev.expected_classes ? double(ev.observed_expected) / double(ev.expected_classes) : 0;
  ev.full_occupancy = double(observed_any) / double(t.attainable);
  return ev;
}

/// Semi-decision: likely_serre is evidence, not proof.
inline SerreVerdict serre_heuristic(const Curve& c, const std::vector<ReductionRecord>& records,
                                    std::uint64_t x,
                                    const std::vector<std::uint64_t>& moduli = default_serre_moduli(),
                                    double threshold = 0.95) {
  if (moduli.empty()) throw std::domain_error("serre_heuristic: no moduli");
  SerreVerdict v;
  const bool cm = cm_class(c).has_value();
  std::optional<SerreData> level;
  if (!cm) level = serre_level(c);

  std::uint64_t samples = 0;
  v.occupancy = 1.0;
  std::optional<std::uint64_t> deficit_witness;
  for (std::uint64_t m : moduli) {
    const ModulusEvidence ev = modulus_evidence(frobenius_signature(m, records, x), level);
    samples = std::max(samples, ev.sample_size);
    v.occupancy = std::min(v.occupancy, ev.occupancy);
    // Occupancy is only compared with the index-2 floor once every class is
    // expected often enough that a Serre curve would have shown it.
    const bool below_floor = ev.min_lambda >= kStarvationThreshold &&
                             ev.full_occupancy < ev.min_index2_occupancy;
    const bool deficit = ev.sample_size > 0 &&
                         (below_floor || ev.observed_unexpected > 0 || ev.starved_classes > 0);
    if (deficit && !deficit_witness) deficit_witness = m;
    v.evidence.push_back(ev);
  }
  if (cm) {
    v.status = SerreStatus::not_serre;
    v.witness_modulus = deficit_witness.value_or(moduli.front());
    return v;
  }
  if (samples == 0) {
    v.status = SerreStatus::inconclusive;
    v.occupancy = 0.0;
    return v;
  }
  if (deficit_witness) {
    v.status = SerreStatus::not_serre;
    v.witness_modulus = deficit_witness;
    return v;
  }
  v.status = v.occupancy >= threshold ? SerreStatus::likely_serre : SerreStatus::inconclusive;
  return v;
}

inline SerreVerdict serre_heuristic(const Curve& c, std::uint64_t x,
                                    const std::vector<std::uint64_t>& moduli = default_serre_moduli(),
                                    double threshold = 0.95) {
  std::vector<ReductionRecord> records;
  for (std::uint64_t p : good_primes(c, x)) records.push_back({p, trace_ap(c, p), 0, 0, 0});
  return serre_heuristic(c, records, x, moduli, threshold);
}

}  // namespace ectd
