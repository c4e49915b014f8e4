#pragma once

// Exact divisor sums over primes for one curve, compared with the
// conjectured main terms.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ectd/arith.hpp"
#include "ectd/constants.hpp"
#include "ectd/curves.hpp"
#include "ectd/galois.hpp"
#include "ectd/reduction.hpp"

namespace ectd {

struct Checkpoint {
  std::uint64_t x = 0;
  std::uint64_t s_d1 = 0;
  std::uint64_t s_tau_d1 = 0;
  std::uint64_t s_d2 = 0;
  std::uint64_t good_primes = 0;
  double li_x = 0.0;   // 0 when x < 2
  double li_x2 = 0.0;  // li(x^2)
};

/// x_i = x / 10^((K - 1 - i) / 4), i = 0..K-1, rounded down.
inline std::vector<std::uint64_t> checkpoint_bounds(std::uint64_t x, unsigned count) {
  if (count == 0) throw std::domain_error("checkpoints must be positive");
  std::vector<std::uint64_t> out(count);
  for (unsigned i = 0; i < count; ++i) {
    const double scale = std::pow(10.0, double(count - 1 - i) / 4.0);
    out[i] = i + 1 == count ? x : std::uint64_t(std::floor(double(x) / scale));
  }
  for (unsigned i = 1; i < count; ++i) out[i] = std::max(out[i], out[i - 1]);
  return out;
}

/// Folds p-ascending records into cumulative checkpoints. Throws if a running
/// d2 sum exceeds the Hasse bound.
inline std::vector<Checkpoint> accumulate_checkpoints(const std::vector<ReductionRecord>& records,
                                                      const std::vector<std::uint64_t>& bounds) {
  std::vector<Checkpoint> out;
  out.reserve(bounds.size());
  Checkpoint run;
  double hasse = 0.0;
  std::size_t i = 0;
  for (std::uint64_t bound : bounds) {
    for (; i < records.size() && records[i].p <= bound; ++i) {
      const auto& r = records[i];
      run.s_d1 += r.d1;
      run.s_tau_d1 += divisor_count(r.d1);
      run.s_d2 += r.d2;
      ++run.good_primes;
      hasse += double(r.p) + 1.0 + 2.0 * std::sqrt(double(r.p));
      if (double(run.s_d2) > hasse + 1e-6 * hasse) {
        throw std::logic_error("d2 sum exceeds the Hasse bound at p = " + std::to_string(r.p));
      }
    }
    Checkpoint c = run;
    c.x = bound;
    if (bound >= 2) {
      c.li_x = log_integral(double(bound));
      c.li_x2 = log_integral(double(bound) * double(bound));
    }
    out.push_back(c);
  }
  return out;
}

inline std::vector<Checkpoint> empirical_sums(const Curve& c, std::uint64_t x, unsigned checkpoints,
                                              unsigned workers = 1) {
  const auto records = reduce_all(c, good_primes(c, x), workers);
  return accumulate_checkpoints(records, checkpoint_bounds(x, checkpoints));
}

enum class Provenance { serre_exact, idealized_fallback };

inline std::string to_string(Provenance p) {
  return p == Provenance::serre_exact ? "serre_exact" : "idealized_fallback";
}

struct CheckpointRatios {
  std::optional<double> d1;
  std::optional<double> tau_d1;
  std::optional<double> d2;
  std::optional<double> d1_over_x;  // CM curves only
};

struct ConjectureReport {
  Curve curve;
  std::optional<int> cm_discriminant;
  std::optional<SerreData> level;
  SerreVerdict verdict;
  Provenance provenance = Provenance::idealized_fallback;
  ConstantTriple constants;
  std::vector<Checkpoint> checkpoints;
  std::vector<CheckpointRatios> ratios;
};

inline std::optional<double> positive_ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

/// Ratios against C li(x) for d1 and tau(d1) and against C li(x^2) for d2,
/// since sum_{p <= x} p ~ li(x^2). Serre constants are used only for non-CM
/// curves the heuristic accepts.
inline ConjectureReport conjecture_report(const Curve& c, std::vector<Checkpoint> checkpoints,
                                          const SerreVerdict& verdict,
                                          const ConstantTriple& idealized) {
  if (checkpoints.empty() || checkpoints.back().x < 2) {
    throw std::domain_error("conjecture_report: x must be at least 2");
  }
  ConjectureReport r;
  r.curve = c;
  r.cm_discriminant = cm_class(c);
  r.verdict = verdict;
  r.constants = idealized;
  if (!r.cm_discriminant) {
    r.level = serre_level(c);
    if (verdict.status == SerreStatus::likely_serre) {
      r.provenance = Provenance::serre_exact;
      r.constants = serre_constants(factorize(i128(r.level->m_e)), idealized).triple;
    }
  }
  r.checkpoints = std::move(checkpoints);
  for (const auto& cp : r.checkpoints) {
    CheckpointRatios q;
    if (r.cm_discriminant) {
      if (cp.x > 0) q.d1_over_x = double(cp.s_d1) / double(cp.x);
    } else {
      q.d1 = positive_ratio(double(cp.s_d1), r.constants.c_d1.value * cp.li_x);
    }
    q.tau_d1 = positive_ratio(double(cp.s_tau_d1), r.constants.c_tau_d1.value * cp.li_x);
    q.d2 = positive_ratio(double(cp.s_d2), r.constants.c_d2.value * cp.li_x2);
    r.ratios.push_back(q);
  }
  return r;
}

}  // namespace ectd
