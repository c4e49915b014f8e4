#pragma once

// The box family C(A, B) of curves y^2 = x^3 + a x + b with |a| <= A,
// |b| <= B: enumeration, CM census, constant moments and averaged sums.

#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ectd/arith.hpp"
#include "ectd/cm_table.hpp"
#include "ectd/constants.hpp"
#include "ectd/curves.hpp"
#include "ectd/galois.hpp"
#include "ectd/parallel.hpp"
#include "ectd/reduction.hpp"

namespace ectd {

struct FamilySpec {
  std::int64_t A = 3;
  std::int64_t B = 3;
};

inline void validate(const FamilySpec& s) {
  if (s.A <= 2 || s.B <= 2) throw std::domain_error("family: A and B must exceed 2");
}

inline constexpr std::int64_t kMaxFamilyArea = 100'000'000;

inline void validate_enumerable(const FamilySpec& s) {
  validate(s);
  if (s.A > kMaxFamilyArea / s.B) throw std::domain_error("family: A*B exceeds 10^8");
}

namespace detail {

inline std::vector<std::int64_t> mobius_table(std::uint64_t n) {
  std::vector<std::int64_t> mu(n + 1, 1);
  std::vector<bool> composite(n + 1, false);
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    for (std::uint64_t j = i; j <= n; j += i) {
      if (j > i) composite[j] = true;
      mu[j] = -mu[j];
    }
    for (std::uint64_t j = i * i; j <= n; j += i * i) mu[j] = 0;
  }
  mu[0] = 0;
  return mu;
}

inline std::uint64_t iroot(std::uint64_t n, unsigned k) {
  auto r = std::uint64_t(std::pow(double(n), 1.0 / k));
  auto pw = [k](std::uint64_t v) {
    long double p = 1;
    for (unsigned i = 0; i < k; ++i) p *= v;
    return p;
  };
  while (r > 0 && pw(r) > n) --r;
  while (pw(r + 1) <= n) ++r;
  return r;
}

inline std::uint64_t ipow(std::uint64_t v, unsigned k) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < k; ++i) r *= v;
  return r;
}

}  // namespace detail

/// True when no prime l has l^4 | a and l^6 | b.
inline bool minimal_pair(std::int64_t a, std::int64_t b) {
  const std::uint64_t ua = a < 0 ? std::uint64_t(-a) : std::uint64_t(a);
  const std::uint64_t ub = b < 0 ? std::uint64_t(-b) : std::uint64_t(b);
  if (ua == 0 && ub == 0) return false;
  std::uint64_t lim = 0;
  if (ua == 0) {
    lim = detail::iroot(ub, 6);
  } else if (ub == 0) {
    lim = detail::iroot(ua, 4);
  } else {
    lim = std::min(detail::iroot(ua, 4), detail::iroot(ub, 6));
  }
  for (std::uint64_t l : trial_primes().primes) {
    if (l > lim) break;
    if (ua % detail::ipow(l, 4) == 0 && ub % detail::ipow(l, 6) == 0) return false;
  }
  return true;
}

inline bool nonsingular_pair(std::int64_t a, std::int64_t b) {
  return 4 * i128(a) * a * a + 27 * i128(b) * b != 0;
}

/// Lazy range over C(A, B) in (a, b) lexicographic order.
class FamilyRange {
 public:
  explicit FamilyRange(FamilySpec spec) : spec_(spec) { validate_enumerable(spec_); }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Curve;
    using difference_type = std::ptrdiff_t;
    using pointer = const Curve*;
    using reference = const Curve&;

    iterator() = default;
    iterator(FamilySpec spec, bool end) : spec_(spec), a_(-spec.A), b_(-spec.B), end_(end) {
      if (!end_) settle();
    }
    const Curve& operator*() const { return curve_; }
    const Curve* operator->() const { return &curve_; }
    iterator& operator++() {
      step();
      settle();
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& x, const iterator& y) {
      if (x.end_ || y.end_) return x.end_ == y.end_;
      return x.a_ == y.a_ && x.b_ == y.b_;
    }

   private:
    void step() {
      if (++b_ > spec_.B) {
        b_ = -spec_.B;
        if (++a_ > spec_.A) end_ = true;
      }
    }
    void settle() {
      while (!end_ && !(nonsingular_pair(a_, b_) && minimal_pair(a_, b_))) step();
      if (!end_) curve_ = curve_invariants(a_, b_);
    }
    FamilySpec spec_{};
    std::int64_t a_ = 0, b_ = 0;
    bool end_ = true;
    Curve curve_;
  };

  [[nodiscard]] iterator begin() const { return iterator(spec_, false); }
  [[nodiscard]] iterator end() const { return iterator(spec_, true); }

 private:
  FamilySpec spec_;
};

inline FamilyRange enumerate_family(const FamilySpec& spec) { return FamilyRange(spec); }

inline std::vector<Curve> collect_family(const FamilySpec& spec) {
  std::vector<Curve> out;
  for (const Curve& c : enumerate_family(spec)) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

struct FamilyCensus {
  std::uint64_t total = 0;
  std::map<std::int64_t, std::uint64_t> cm_counts;  // j -> count, all thirteen j present
  std::uint64_t serre_like = 0;
  std::uint64_t non_serre = 0;
  std::optional<std::uint64_t> screen_x;  // set when non-CM curves were screened
};

/// j = 0 and 1728 share their count: 2 sum_d mu(d) floor(N / d^k).
inline std::uint64_t axis_count(std::int64_t n, unsigned k) {
  const std::uint64_t top = detail::iroot(std::uint64_t(n), k);
  const auto mu = detail::mobius_table(top);
  std::int64_t s = 0;
  for (std::uint64_t d = 1; d <= top; ++d) s += mu[d] * (n / std::int64_t(detail::ipow(d, k)));
  return std::uint64_t(2 * s);
}

/// Minimal pairs in the box for the CM class of a j other than 0 or 1728:
/// b^2 = c a^3 with c = 4(1728 - j) / (27 j), so a = sf(PQ) k^2 for c = P/Q.
inline std::uint64_t cm_j_count(std::int64_t j, const FamilySpec& spec) {
  using boost::multiprecision::sqrt;
  const int sign = j < 0 ? -1 : 1;
  const Rational c(BigInt(4) * (1728 - BigInt(j)) * sign, BigInt(27) * BigInt(j) * sign);
  const BigInt P = numerator(c), Q = denominator(c);
  // P and Q are coprime, so sf(PQ) = sf(P) sf(Q).
  const i128 s = squarefree_part(i128(P.convert_to<long long>())) *
                 squarefree_part(i128(Q.convert_to<long long>()));
  std::uint64_t count = 0;
  for (std::int64_t k = 1; uabs(s) * u128(k) * u128(k) <= u128(spec.A); ++k) {
    const i128 a = s * k * k;
    const BigInt num = P * BigInt(std::int64_t(a)) * BigInt(std::int64_t(a)) * BigInt(std::int64_t(a));
    if (num % Q != 0) continue;
    const BigInt b2 = num / Q;
    if (b2 <= 0) continue;
    const BigInt b = sqrt(b2);
    if (b * b != b2 || b > spec.B) continue;
    if (minimal_pair(std::int64_t(a), b.convert_to<std::int64_t>())) count += 2;
  }
  return count;
}

/// |C(A, B)| by inclusion-exclusion over d with d^4 | a and d^6 | b.
inline std::uint64_t family_size(const FamilySpec& spec) {
  validate(spec);
  const std::uint64_t root4 = detail::iroot(std::uint64_t(spec.A), 4);
  const std::uint64_t root6 = detail::iroot(std::uint64_t(spec.B), 6);
  const std::uint64_t top = std::max(root4, root6);
  const auto mu = detail::mobius_table(top);
  i128 total = 0;
  for (std::uint64_t d = 1; d <= top; ++d) {
    if (mu[d] == 0) continue;
    const i128 na = d <= root4 ? spec.A / std::int64_t(detail::ipow(d, 4)) : 0;
    const i128 nb = d <= root6 ? spec.B / std::int64_t(detail::ipow(d, 6)) : 0;
    total += mu[d] * ((2 * na + 1) * (2 * nb + 1) - 1);
  }
  // Singular minimal pairs are (-3t^2, +-2t^3) with t squarefree.
  for (std::int64_t t = 1; 3 * t * t <= spec.A && 2 * t * t * t <= spec.B; ++t) {
    if (squarefree_part(i128(t)) == t) total -= 2;
  }
  return std::uint64_t(total);
}

inline FamilyCensus cm_census(const FamilySpec& spec, std::optional<std::uint64_t> screen_x = {}) {
  FamilyCensus census;
  census.total = family_size(spec);
  std::uint64_t cm_total = 0;
  for (const auto& e : kCmTable) {
    std::uint64_t n = 0;
    if (e.j == 0) {
      n = axis_count(spec.B, 6);
    } else if (e.j == 1728) {
      n = axis_count(spec.A, 4);
    } else {
      n = cm_j_count(e.j, spec);
    }
    census.cm_counts[e.j] = n;
    cm_total += n;
  }
  census.serre_like = census.total - cm_total;
  if (screen_x) {
    census.screen_x = screen_x;
    for (const Curve& c : enumerate_family(spec)) {
      if (cm_class(c)) continue;
      if (serre_heuristic(c, *screen_x).status == SerreStatus::not_serre) {
        ++census.non_serre;
        --census.serre_like;
      }
    }
  }
  return census;
}

// ---------------------------------------------------------------------------
// Moments of the Serre-curve constants
// ---------------------------------------------------------------------------

struct MomentReport {
  unsigned n = 1;
  ConstantKind kind = ConstantKind::tau_d1;
  FamilySpec spec;
  double estimate = 0.0;  // ((1/N) sum C(E)^n)^(1/n)
  double mean = 0.0;
  double mean_deviation = 0.0;   // |mean - C|
  double absolute_moment = 0.0;  // (1/N) sum |C(E) - C|^n
  double central_moment = 0.0;   // (1/N) sum (C(E) - mean)^n
  double min_constant = 0.0;
  double max_constant = 0.0;
  ConstantValue idealized;
  std::uint64_t curves_used = 0;
  std::uint64_t cm_excluded = 0;
  std::uint64_t not_serre_flags = 0;
  std::optional<std::uint64_t> screen_x;
};

inline MomentReport constant_moments(const FamilySpec& spec, unsigned n, ConstantKind kind,
                                     const ConstantTriple& idealized,
                                     std::optional<std::uint64_t> screen_x = {}) {
  validate_enumerable(spec);
  if (n < 1 || n > 4) throw std::domain_error("constant_moments: n must be in [1, 4]");
  MomentReport r;
  r.n = n;
  r.kind = kind;
  r.spec = spec;
  r.idealized = idealized.get(kind);
  r.screen_x = screen_x;
  const double base = r.idealized.value;
  std::unordered_map<std::uint64_t, double> by_level;
  std::vector<double> values;
  for (const Curve& c : enumerate_family(spec)) {
    if (cm_class(c)) {
      ++r.cm_excluded;
      continue;
    }
    const std::uint64_t m = serre_level(c).m_e;
    auto it = by_level.find(m);
    if (it == by_level.end()) {
      it = by_level.emplace(m, base * to_double(1 + serre_correction(kind, factorize(i128(m))))).first;
    }
    values.push_back(it->second);
    if (screen_x && serre_heuristic(c, *screen_x).status == SerreStatus::not_serre) {
      ++r.not_serre_flags;
    }
  }
  r.curves_used = values.size();
  if (values.empty()) return r;
  CompensatedSum sum, power_sum, abs_sum;
  r.min_constant = values.front();
  r.max_constant = values.front();
  for (double v : values) {
    sum.add(v);
    power_sum.add(std::pow(v, double(n)));
    abs_sum.add(std::pow(std::abs(v - base), double(n)));
    r.min_constant = std::min(r.min_constant, v);
    r.max_constant = std::max(r.max_constant, v);
  }
  const double count = double(values.size());
  r.mean = sum.value() / count;
  r.estimate = std::pow(power_sum.value() / count, 1.0 / double(n));
  r.mean_deviation = std::abs(r.mean - base);
  r.absolute_moment = abs_sum.value() / count;
  CompensatedSum central;
  for (double v : values) central.add(std::pow(v - r.mean, double(n)));
  r.central_moment = central.value() / count;
  return r;
}

// ---------------------------------------------------------------------------
// Family-averaged divisor sums
// ---------------------------------------------------------------------------

inline constexpr double kPointCountBudget = 1e9;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FamilyAverage {
  FamilySpec spec;
  std::uint64_t x = 0;
  std::uint64_t curves = 0;
  std::array<double, 3> raw_average{};  // (1/|C|) sum_E sum_p term, per kind
  std::array<double, 3> ratio{};        // raw average over li(x), or li(x^2) for d2
};

/// One pass over C(A, B) computing all three averages.
inline FamilyAverage family_empirical_averages(const FamilySpec& spec, std::uint64_t x,
                                               unsigned workers = 1) {
  validate_enumerable(spec);
  FamilyAverage out;
  out.spec = spec;
  out.x = x;
  out.curves = family_size(spec);
  if (x < 5) return out;
  const PrimeTable primes = sieve(x);
  if (double(out.curves) * double(primes.size()) > kPointCountBudget) {
    throw BudgetExceeded("family average needs |C(A,B)| * pi(x) = " +
                         std::to_string(double(out.curves) * double(primes.size())) +
                         " point counts, above the 1e9 budget; lower A, B or x");
  }
  struct Sums {
    u128 d1 = 0, tau = 0, d2 = 0;
  };
  Sums total;
  std::vector<Curve> batch;
  std::vector<Sums> per_curve;
  auto flush = [&] {
    per_curve.assign(batch.size(), Sums{});
    parallel_for(batch.size(), workers, [&](std::size_t i) {
      Sums s;
      for (std::uint32_t p : primes.primes) {
        if (!good_prime(batch[i], p)) continue;
        const ReductionRecord r = group_structure(batch[i], p);
        s.d1 += r.d1;
        s.tau += divisor_count(r.d1);
        s.d2 += r.d2;
      }
      per_curve[i] = s;
    });
    for (const auto& s : per_curve) {
      total.d1 += s.d1;
      total.tau += s.tau;
      total.d2 += s.d2;
    }
    batch.clear();
  };
  for (const Curve& c : enumerate_family(spec)) {
    batch.push_back(c);
    if (batch.size() == 4096) flush();
  }
  flush();
  const double count = double(out.curves);
  out.raw_average = {double(total.d1) / count, double(total.tau) / count, double(total.d2) / count};
  const double li_x = log_integral(double(x));
  const double li_x2 = log_integral(double(x) * double(x));
  out.ratio = {out.raw_average[0] / li_x, out.raw_average[1] / li_x,
               out.raw_average[2] / li_x2};
  return out;
}

/// The average for one kind, normalized by li(x) (d1, tau_d1) or li(x^2) (d2).
inline double family_empirical_average(const FamilySpec& spec, std::uint64_t x, ConstantKind kind,
                                       unsigned workers = 1) {
  const FamilyAverage avg = family_empirical_averages(spec, x, workers);
  switch (kind) {
    case ConstantKind::d1: return avg.ratio[0];
    case ConstantKind::tau_d1: return avg.ratio[1];
    default: return avg.ratio[2];
  }
}

}  // namespace ectd
