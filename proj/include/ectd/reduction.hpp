#pragma once

// Reductions of a curve modulo primes p > 3 of good reduction: a_p, #E(F_p)
// and the elementary divisors d1 | d2 of E(F_p).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "ectd/arith.hpp"
#include "ectd/curves.hpp"
#include "ectd/parallel.hpp"

namespace ectd {

struct ReductionRecord {
  std::uint64_t p = 0;
  std::int64_t a_p = 0;
  std::uint64_t n_points = 0;
  std::uint64_t d1 = 0;
  std::uint64_t d2 = 0;

  friend bool operator==(const ReductionRecord&, const ReductionRecord&) = default;
};

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = std::uint64_t(std::sqrt(double(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Bitmask of violated record invariants; 0 when the record is consistent.
inline unsigned record_violations(const ReductionRecord& r) {
  unsigned bad = 0;
  if (r.d1 == 0 || r.d2 % r.d1 != 0) bad |= 1;
  if (r.d1 * r.d2 != r.n_points ||
      std::int64_t(r.p) + 1 - r.a_p != std::int64_t(r.n_points)) {
    bad |= 2;
  }
  if (r.d1 == 0 || (r.p - 1) % r.d1 != 0) bad |= 4;
  if (r.a_p * r.a_p > std::int64_t(4 * r.p)) bad |= 8;
  return bad;
}

inline bool good_prime(const Curve& c, std::uint64_t p) {
  return p > 3 && uabs(c.delta) % p != 0;
}

inline std::vector<std::uint64_t> good_primes(const Curve& c, const PrimeTable& primes,
                                              std::uint64_t x) {
  std::vector<std::uint64_t> out;
  for (std::uint32_t p : primes.primes) {
    if (p > x) break;
    if (good_prime(c, p)) out.push_back(p);
  }
  return out;
}

inline std::vector<std::uint64_t> good_primes(const Curve& c, std::uint64_t x) {
  if (x < 5) return {};
  return good_primes(c, sieve(x), x);
}

namespace detail {

struct Point {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  bool inf = true;
  friend bool operator==(const Point&, const Point&) = default;
};

// Arithmetic on y^2 = x^3 + a x + b over F_p, p < 2^32.
class CurveModP {
 public:
  CurveModP(std::uint64_t a, std::uint64_t b, std::uint64_t p) : a_(a), b_(b), p_(p) {}

  [[nodiscard]] std::uint64_t p() const { return p_; }
  [[nodiscard]] std::uint64_t mul(std::uint64_t x, std::uint64_t y) const { return x * y % p_; }
  [[nodiscard]] std::uint64_t add(std::uint64_t x, std::uint64_t y) const {
    const std::uint64_t s = x + y;
    return s >= p_ ? s - p_ : s;
  }
  [[nodiscard]] std::uint64_t sub(std::uint64_t x, std::uint64_t y) const {
    return x >= y ? x - y : x + p_ - y;
  }
  [[nodiscard]] std::uint64_t inv(std::uint64_t v) const {
    std::int64_t t = 0, nt = 1;
    std::int64_t r = std::int64_t(p_), nr = std::int64_t(v);
    while (nr != 0) {
      const std::int64_t q = r / nr;
      std::tie(t, nt) = std::pair{nt, t - q * nt};
      std::tie(r, nr) = std::pair{nr, r - q * nr};
    }
    return std::uint64_t(t < 0 ? t + std::int64_t(p_) : t);
  }
  [[nodiscard]] std::uint64_t rhs(std::uint64_t x) const {
    return add(mul(add(mul(x, x), a_), x), b_);
  }

  [[nodiscard]] Point negate(const Point& P) const {
    if (P.inf) return P;
    return {P.x, P.y == 0 ? 0 : p_ - P.y, false};
  }

  [[nodiscard]] Point plus(const Point& P, const Point& Q) const {
    if (P.inf) return Q;
    if (Q.inf) return P;
    std::uint64_t lambda;
    if (P.x == Q.x) {
      if (P.y != Q.y || P.y == 0) return {};
      lambda = mul(add(mul(3, mul(P.x, P.x)), a_), inv(add(P.y, P.y)));
    } else {
      lambda = mul(sub(Q.y, P.y), inv(sub(Q.x, P.x)));
    }
    const std::uint64_t x3 = sub(sub(mul(lambda, lambda), P.x), Q.x);
    return {x3, sub(mul(lambda, sub(P.x, x3)), P.y), false};
  }

  [[nodiscard]] Point times(Point P, std::uint64_t k) const {
    Point r;
    while (k > 0) {
      if (k & 1) r = plus(r, P);
      k >>= 1;
      if (k > 0) P = plus(P, P);
    }
    return r;
  }

  [[nodiscard]] std::uint64_t pow(std::uint64_t v, std::uint64_t e) const {
    std::uint64_t r = 1;
    while (e > 0) {
      if (e & 1) r = mul(r, v);
      v = mul(v, v);
      e >>= 1;
    }
    return r;
  }

  [[nodiscard]] int legendre(std::uint64_t v) const {
    if (v == 0) return 0;
    return pow(v, (p_ - 1) / 2) == 1 ? 1 : -1;
  }

  // Square root of a quadratic residue (Tonelli-Shanks).
  [[nodiscard]] std::uint64_t sqrt(std::uint64_t v) const {
    if (v == 0) return 0;
    if (p_ % 4 == 3) return pow(v, (p_ + 1) / 4);
    std::uint64_t q = p_ - 1;
    unsigned s = 0;
    while (q % 2 == 0) {
      q /= 2;
      ++s;
    }
    std::uint64_t z = 2;
    while (legendre(z) != -1) ++z;
    std::uint64_t m = s, c = pow(z, q), t = pow(v, q), r = pow(v, (q + 1) / 2);
    while (t != 1) {
      std::uint64_t i = 0, tt = t;
      while (tt != 1) {
        tt = mul(tt, tt);
        ++i;
      }
      std::uint64_t bb = c;
      for (std::uint64_t k = 0; k + i + 1 < m; ++k) bb = mul(bb, bb);
      m = i;
      c = mul(bb, bb);
      t = mul(t, c);
      r = mul(r, bb);
    }
    return r;
  }

  // Point with the given x-coordinate, if any.
  [[nodiscard]] std::optional<Point> lift(std::uint64_t x) const {
    const std::uint64_t f = rhs(x);
    if (f == 0) return Point{x, 0, false};
    if (legendre(f) != 1) return std::nullopt;
    return Point{x, sqrt(f), false};
  }

  template <class Rng>
  Point random_point(Rng& rng) const {
    std::uniform_int_distribution<std::uint64_t> dist(0, p_ - 1);
    for (;;) {
      if (auto P = lift(dist(rng))) {
        if (rng() & 1) return negate(*P);
        return *P;
      }
    }
  }

  [[nodiscard]] std::uint64_t a() const { return a_; }
  [[nodiscard]] std::uint64_t b() const { return b_; }

 private:
  std::uint64_t a_, b_, p_;
};

inline std::uint64_t reduce_mod(i128 v, std::uint64_t p) {
  i128 r = v % i128(p);
  if (r < 0) r += p;
  return std::uint64_t(r);
}

inline std::uint64_t count_points_enumeration(const CurveModP& E) {
  const std::uint64_t p = E.p();
  std::vector<std::int8_t> chi(p, -1);
  chi[0] = 0;
  for (std::uint64_t x = 1; x <= p / 2; ++x) chi[x * x % p] = 1;
  std::int64_t s = 0;
  for (std::uint64_t x = 0; x < p; ++x) s += chi[E.rhs(x)];
  return p + 1 + std::uint64_t(s);  // wraps correctly for negative s
}

struct IntervalScan {
  std::vector<std::uint64_t> annihilators;  // all m in [lo, hi] with mP = O
  std::uint64_t order = 0;                   // exact order when it was found to be small
};

// Baby-step giant-step search for every m in [lo, hi] with mP = O.
inline IntervalScan scan_interval(const CurveModP& E, const Point& P, std::uint64_t lo,
                                  std::uint64_t hi) {
  IntervalScan out;
  const std::uint64_t width = hi - lo + 1;
  const std::uint64_t s = isqrt(width) + 1;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> baby;  // (x(jP), j)
  baby.reserve(s);
  std::vector<Point> multiples(s + 1);
  Point jp;
  bool small_order = false;
  for (std::uint64_t j = 1; j <= s && !small_order; ++j) {
    jp = E.plus(jp, P);
    multiples[j] = jp;
    if (jp.inf) {
      small_order = true;
    } else {
      baby.emplace_back(jp.x, j);
    }
  }
  std::sort(baby.begin(), baby.end());
  for (std::size_t i = 1; i < baby.size() && !small_order; ++i) {
    small_order = baby[i].first == baby[i - 1].first;
  }
  if (small_order) {
    // A repeated x-coordinate or O among the baby steps bounds the order by 2s.
    std::uint64_t ord = 1;
    for (Point q = P; !q.inf; q = E.plus(q, P)) ++ord;
    out.order = ord;
    for (std::uint64_t m = (lo + ord - 1) / ord * ord; m <= hi; m += ord) {
      out.annihilators.push_back(m);
    }
    return out;
  }
  const Point step = E.times(P, 2 * s + 1);
  std::uint64_t center = lo + s;
  Point R = E.times(P, center);
  for (; center - s <= hi; center += 2 * s + 1) {
    if (R.inf) {
      out.annihilators.push_back(center);
    } else if (auto it = std::lower_bound(baby.begin(), baby.end(), std::pair{R.x, std::uint64_t(0)});
               it != baby.end() && it->first == R.x) {
      const std::uint64_t j = it->second;
      const Point& B = multiples[j];
      // R = jP gives (center - j)P = O; R = -jP gives (center + j)P = O.
      if (B.y == R.y) out.annihilators.push_back(center - j);
      if (B.y == (R.y == 0 ? 0 : E.p() - R.y)) out.annihilators.push_back(center + j);
    }
    R = E.plus(R, step);
  }
  std::vector<std::uint64_t> in_range;
  for (std::uint64_t m : out.annihilators) {
    if (m >= lo && m <= hi) in_range.push_back(m);
  }
  std::sort(in_range.begin(), in_range.end());
  in_range.erase(std::unique(in_range.begin(), in_range.end()), in_range.end());
  out.annihilators = std::move(in_range);
  return out;
}

inline std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b) {
  return a / std::gcd(a, b) * b;
}

// The order of P given that it divides one of the annihilators.
inline std::uint64_t order_from_scan(const IntervalScan& scan) {
  if (scan.order != 0) return scan.order;
  if (scan.annihilators.size() >= 2) return scan.annihilators[1] - scan.annihilators[0];
  return 0;
}

using Rng = std::minstd_rand;

inline Rng seeded_rng(i128 a, i128 b, std::uint64_t p) {
  std::uint64_t h = p * 0x9E3779B97F4A7C15ULL;
  h ^= std::uint64_t(a) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
  h ^= std::uint64_t(b) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
  return Rng(std::uint32_t(h ^ (h >> 32)) | 1u);
}

inline constexpr std::uint64_t kEnumerationLimit = 1024;

// #E(F_p) through point orders in the Hasse interval, using the quadratic
// twist when E alone leaves the count ambiguous.
inline std::uint64_t count_points_bsgs(const CurveModP& E, Rng& rng) {
  const std::uint64_t p = E.p();
  const std::uint64_t w = isqrt(4 * p);
  const std::uint64_t lo = p + 1 - w, hi = p + 1 + w;
  std::optional<CurveModP> twist;
  std::uint64_t lcm_e = 1, lcm_t = 1;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const bool on_twist = attempt % 2 == 1;
    if (on_twist && !twist) {
      std::uint64_t u = 2;
      while (E.legendre(u) != -1) ++u;
      const std::uint64_t u2 = E.mul(u, u);
      twist.emplace(E.mul(E.a(), u2), E.mul(E.b(), E.mul(u2, u)), p);
    }
    const CurveModP& C = on_twist ? *twist : E;
    const IntervalScan scan = scan_interval(C, C.random_point(rng), lo, hi);
    if (scan.annihilators.size() == 1) {
      const std::uint64_t m = scan.annihilators.front();
      return on_twist ? 2 * p + 2 - m : m;
    }
    const std::uint64_t ord = order_from_scan(scan);
    if (ord != 0) (on_twist ? lcm_t : lcm_e) = lcm_u64(on_twist ? lcm_t : lcm_e, ord);
    std::uint64_t found = 0;
    int matches = 0;
    for (std::uint64_t n = (lo + lcm_e - 1) / lcm_e * lcm_e; n <= hi; n += lcm_e) {
      if ((2 * p + 2 - n) % lcm_t == 0) {
        found = n;
        if (++matches > 1) break;
      }
    }
    if (matches == 1) return found;
  }
  return count_points_enumeration(E);
}

inline std::vector<std::pair<std::uint64_t, unsigned>> small_factor(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t d = 2; d * d <= n; d += (d == 2 ? 1 : 2)) {
    if (n % d == 0) {
      unsigned e = 0;
      while (n % d == 0) {
        n /= d;
        ++e;
      }
      out.emplace_back(d, e);
    }
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

// Exponent of the order of Q, an element of an l-group: ord Q = l^result.
inline unsigned l_order(const CurveModP& E, Point Q, std::uint64_t l) {
  unsigned e = 0;
  while (!Q.inf) {
    Q = E.times(Q, l);
    ++e;
  }
  return e;
}

// Whether X lies in the cyclic group generated by P1 of order l^a.
inline bool in_cyclic(const CurveModP& E, const Point& P1, unsigned a, std::uint64_t l,
                      const Point& X) {
  if (X.inf) return true;
  if (a == 0) return false;
  std::vector<Point> pow_l(a);  // l^i P1
  pow_l[0] = P1;
  for (unsigned i = 1; i < a; ++i) pow_l[i] = E.times(pow_l[i - 1], l);
  const Point gamma = pow_l[a - 1];
  // X = sum d_i l^i P1, found digit by digit.
  Point rest = X;
  Point recovered;
  for (unsigned i = 0; i < a; ++i) {
    // l^(a-1-i) rest must be a multiple of gamma.
    Point probe = rest;
    for (unsigned k = 0; k + i + 1 < a; ++k) probe = E.times(probe, l);
    std::uint64_t digit = l;
    Point g;
    for (std::uint64_t d = 0; d < l; ++d) {
      if (g == probe) {
        digit = d;
        break;
      }
      g = E.plus(g, gamma);
    }
    if (digit == l) return false;
    const Point part = E.times(pow_l[i], digit);
    rest = E.plus(rest, E.negate(part));
    recovered = E.plus(recovered, part);
  }
  return rest.inf && recovered == X;
}

// Exponent of l in d1: the Sylow l-subgroup is Z/l^(k - e) x Z/l^e with e
// its exponent, certified once two elements generate it.
inline unsigned sylow_small_exponent(const CurveModP& E, std::uint64_t n, std::uint64_t l,
                                     unsigned k, Rng& rng) {
  std::uint64_t lk = 1;
  for (unsigned i = 0; i < k; ++i) lk *= l;
  const std::uint64_t h = n / lk;
  Point P1;
  unsigned a = 0;
  auto consider = [&](const Point& R) -> std::optional<unsigned> {
    const Point Q = E.times(R, h);
    const unsigned b = l_order(E, Q, l);
    Point other = Q;
    unsigned other_order = b;
    if (b > a) {
      std::swap(P1, other);
      std::swap(a, other_order);
    }
    if (a == k) return 0u;
    // Order of the image of `other` in S / <P1>.
    unsigned t = 0;
    Point X = other;
    while (!in_cyclic(E, P1, a, l, X)) {
      X = E.times(X, l);
      ++t;
    }
    if (a + t == k) return k - std::max(a, other_order);
    return std::nullopt;
  };
  for (int attempt = 0; attempt < 256; ++attempt) {
    if (auto r = consider(E.random_point(rng))) return *r;
  }
  for (std::uint64_t x = 0; x < E.p(); ++x) {
    if (auto P = E.lift(x)) {
      if (auto r = consider(*P)) return *r;
    }
  }
  throw std::logic_error("sylow_small_exponent: group not generated");
}

inline ReductionRecord structure_from_count(const CurveModP& E, std::uint64_t n,
                                            Rng& rng) {
  const std::uint64_t p = E.p();
  ReductionRecord r;
  r.p = p;
  r.n_points = n;
  r.a_p = std::int64_t(p + 1) - std::int64_t(n);
  r.d1 = 1;
  const std::uint64_t g = std::gcd(n, p - 1);
  for (const auto& [l, e_g] : small_factor(g)) {
    unsigned k = 0;
    for (std::uint64_t m = n; m % l == 0; m /= l) ++k;
    if (k < 2) continue;
    const unsigned i_l = sylow_small_exponent(E, n, l, k, rng);
    for (unsigned i = 0; i < i_l; ++i) r.d1 *= l;
  }
  r.d2 = n / r.d1;
  return r;
}

inline CurveModP reduce_curve(const Curve& c, std::uint64_t p) {
  if (!good_prime(c, p)) throw std::domain_error("bad reduction at p = " + std::to_string(p));
  if (p >= (std::uint64_t(1) << 32)) throw std::domain_error("prime exceeds 2^32");
  return CurveModP(reduce_mod(c.a, p), reduce_mod(c.b, p), p);
}

inline std::uint64_t count_points(const CurveModP& E, Rng& rng) {
  if (E.p() < kEnumerationLimit) return count_points_enumeration(E);
  return count_points_bsgs(E, rng);
}

}  // namespace detail

inline std::int64_t trace_ap(const Curve& c, std::uint64_t p) {
  const detail::CurveModP E = detail::reduce_curve(c, p);
  auto rng = detail::seeded_rng(c.a, c.b, p);
  return std::int64_t(p + 1) - std::int64_t(detail::count_points(E, rng));
}

inline ReductionRecord group_structure(const Curve& c, std::uint64_t p) {
  const detail::CurveModP E = detail::reduce_curve(c, p);
  auto rng = detail::seeded_rng(c.a, c.b, p);
  const std::uint64_t n = detail::count_points(E, rng);
  return detail::structure_from_count(E, n, rng);
}

/// Records for the given primes, in the same order; identical for any worker count.
inline std::vector<ReductionRecord> reduce_all(const Curve& c,
                                               const std::vector<std::uint64_t>& primes,
                                               unsigned workers = 1) {
  std::vector<ReductionRecord> out(primes.size());
  parallel_for(primes.size(), workers, [&](std::size_t i) { out[i] = group_structure(c, primes[i]); });
  return out;
}

// ---------------------------------------------------------------------------
// Record cache and CSV export
// ---------------------------------------------------------------------------

inline constexpr char kCacheMagic[4] = {'E', 'C', 'R', 'C'};
inline constexpr std::uint32_t kCacheVersion = 1;

/// Append-only binary store of records for one curve. Layout: "ECRC", u32
/// version, i64 a, i64 b, then packed (u64 p, i64 a_p, u64 N, u64 d1, u64 d2).
class ReductionCache {
 public:
  ReductionCache(std::filesystem::path path, const Curve& c) : path_(std::move(path)) {
    if (c.a > std::numeric_limits<std::int64_t>::max() ||
        c.a < std::numeric_limits<std::int64_t>::min() ||
        c.b > std::numeric_limits<std::int64_t>::max() ||
        c.b < std::numeric_limits<std::int64_t>::min()) {
      throw std::domain_error("cache: coefficients exceed 64 bits");
    }
    a_ = std::int64_t(c.a);
    b_ = std::int64_t(c.b);
    load();
  }

  static std::filesystem::path default_path(const std::filesystem::path& dir, const Curve& c) {
    return dir / ("curve_" + to_string(c.a) + "_" + to_string(c.b) + ".ecrc");
  }

  [[nodiscard]] const ReductionRecord* find(std::uint64_t p) const {
    auto it = records_.find(p);
    return it == records_.end() ? nullptr : &it->second;
  }

  [[nodiscard]] std::size_t size() const { return records_.size(); }

  void append(const std::vector<ReductionRecord>& fresh) {
    std::vector<ReductionRecord> todo;
    for (const auto& r : fresh) {
      if (records_.emplace(r.p, r).second) todo.push_back(r);
    }
    if (todo.empty()) return;
    const bool exists = std::filesystem::exists(path_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cache: cannot open " + path_.string());
    if (!exists) {
      out.write(kCacheMagic, 4);
      put(out, kCacheVersion);
      put(out, a_);
      put(out, b_);
    }
    for (const auto& r : todo) {
      put(out, r.p);
      put(out, r.a_p);
      put(out, r.n_points);
      put(out, r.d1);
      put(out, r.d2);
    }
  }

 private:
  template <class T>
  static void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  template <class T>
  static bool get(std::istream& in, T& v) {
    return bool(in.read(reinterpret_cast<char*>(&v), sizeof v));
  }

  void load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    char magic[4];
    std::uint32_t version = 0;
    std::int64_t a = 0, b = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, kCacheMagic, 4) != 0 || !get(in, version) ||
        version != kCacheVersion || !get(in, a) || !get(in, b)) {
      throw std::runtime_error("cache: bad header in " + path_.string());
    }
    if (a != a_ || b != b_) throw std::runtime_error("cache: file belongs to another curve");
    ReductionRecord r;
    while (get(in, r.p) && get(in, r.a_p) && get(in, r.n_points) && get(in, r.d1) &&
           get(in, r.d2)) {
      records_.emplace(r.p, r);
    }
  }

  std::filesystem::path path_;
  std::int64_t a_ = 0, b_ = 0;
  std::map<std::uint64_t, ReductionRecord> records_;
};

/// Cache directory from ECTD_CACHE_DIR, if set.
inline std::optional<std::filesystem::path> cache_dir_from_env() {
  if (const char* d = std::getenv("ECTD_CACHE_DIR"); d != nullptr && *d != '\0') {
    return std::filesystem::path(d);
  }
  return std::nullopt;
}

inline std::vector<ReductionRecord> reduce_all_cached(const Curve& c,
                                                      const std::vector<std::uint64_t>& primes,
                                                      unsigned workers,
                                                      const std::optional<std::filesystem::path>& dir) {
  if (!dir) return reduce_all(c, primes, workers);
  std::filesystem::create_directories(*dir);
  ReductionCache cache(ReductionCache::default_path(*dir, c), c);
  std::vector<std::uint64_t> missing;
  for (std::uint64_t p : primes) {
    if (!cache.find(p)) missing.push_back(p);
  }
  cache.append(reduce_all(c, missing, workers));
  std::vector<ReductionRecord> out;
  out.reserve(primes.size());
  for (std::uint64_t p : primes) out.push_back(*cache.find(p));
  return out;
}

inline void write_records_csv(std::ostream& out, const std::vector<ReductionRecord>& records) {
  out << "p,a_p,N,d1,d2\n";
  for (const auto& r : records) {
    out << r.p << ',' << r.a_p << ',' << r.n_points << ',' << r.d1 << ',' << r.d2 << '\n';
  }
}

}  // namespace ectd
