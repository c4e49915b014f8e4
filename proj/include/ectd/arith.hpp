#pragma once

// Exact integer arithmetic: 128-bit helpers, factorization, divisor-type
// functions, the Kronecker symbol, prime sieving and the logarithmic integral.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ectd {

using i128 = __int128;
using u128 = unsigned __int128;

// ---------------------------------------------------------------------------
// 128-bit helpers
// ---------------------------------------------------------------------------

inline u128 uabs(i128 v) { return v < 0 ? u128(0) - u128(v) : u128(v); }

inline std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(char('0' + int(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

inline std::string to_string(i128 v) {
  return v < 0 ? "-" + to_string(uabs(v)) : to_string(u128(v));
}

inline i128 parse_i128(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer");
  bool neg = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    neg = text[0] == '-';
    i = 1;
  }
  if (i == text.size()) throw std::invalid_argument("malformed integer");
  u128 acc = 0;
  const u128 limit = u128(std::numeric_limits<i128>::max()) + (neg ? 1 : 0);
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') throw std::invalid_argument("malformed integer");
    acc = acc * 10 + u128(text[i] - '0');
    if (acc > limit) throw std::out_of_range("integer exceeds 127 bits");
  }
  return neg ? i128(u128(0) - acc) : i128(acc);
}

inline i128 checked_mul(i128 x, i128 y) {
  i128 r;
  if (__builtin_mul_overflow(x, y, &r)) throw std::domain_error("128-bit overflow");
  return r;
}

inline i128 checked_add(i128 x, i128 y) {
  i128 r;
  if (__builtin_add_overflow(x, y, &r)) throw std::domain_error("128-bit overflow");
  return r;
}

inline u128 gcd(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return std::uint64_t(u128(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

namespace detail {

// a*b mod m for m possibly above 2^64. Double-and-add is slow but only
// reached for cofactors that survive trial division and exceed 64 bits.
inline u128 mulmod_wide(u128 a, u128 b, u128 m) {
  if (m <= std::numeric_limits<std::uint64_t>::max()) {
    return u128(std::uint64_t(a % m)) * std::uint64_t(b % m) % m;
  }
  a %= m;
  b %= m;
  u128 r = 0;
  while (b > 0) {
    if (b & 1) {
      r = (r >= m - a) ? r - (m - a) : r + a;
    }
    a = (a >= m - a) ? a - (m - a) : a + a;
    b >>= 1;
  }
  return r;
}

inline u128 powmod_wide(u128 base, u128 exp, u128 m) {
  u128 r = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) r = mulmod_wide(r, base, m);
    base = mulmod_wide(base, base, m);
    exp >>= 1;
  }
  return r;
}

}  // namespace detail

// Miller-Rabin with the first 20 prime bases: deterministic below 3.3e24 and
// far beyond any input this library produces (|n| < 2^90 for boxed curves).
inline bool is_prime(u128 n) {
  static constexpr std::array<std::uint32_t, 20> bases{2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                                       31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (n < 2) return false;
  for (std::uint32_t p : bases) {
    if (n % p == 0) return n == p;
  }
  u128 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint32_t a : bases) {
    u128 x = detail::powmod_wide(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = detail::mulmod_wide(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Prime tables
// ---------------------------------------------------------------------------

struct PrimeTable {
  std::uint64_t limit = 0;
  std::vector<std::uint32_t> primes;

  [[nodiscard]] std::size_t size() const { return primes.size(); }
  [[nodiscard]] bool contains(std::uint64_t n) const {
    return n <= limit && std::binary_search(primes.begin(), primes.end(), std::uint32_t(n));
  }
  // Number of listed primes <= x.
  [[nodiscard]] std::size_t count_upto(std::uint64_t x) const {
    return std::size_t(std::upper_bound(primes.begin(), primes.end(), x) - primes.begin());
  }
};

inline constexpr std::uint64_t kMaxSieveLimit = 1'000'000'000;

// Segmented sieve of Eratosthenes. Memory is dominated by the output list.
inline PrimeTable sieve(std::uint64_t limit) {
  PrimeTable table;
  table.limit = limit;
  if (limit < 2) return table;
  if (limit > kMaxSieveLimit) throw std::domain_error("sieve limit above 1e9");

  const auto root = std::uint64_t(std::sqrt(double(limit))) + 1;
  std::vector<char> small(root + 1, 1);
  std::vector<std::uint32_t> base;
  for (std::uint64_t i = 2; i <= root; ++i) {
    if (!small[i]) continue;
    base.push_back(std::uint32_t(i));
    for (std::uint64_t j = i * i; j <= root; j += i) small[j] = 0;
  }

  constexpr std::uint64_t kSegment = 1 << 18;
  std::vector<char> seg(kSegment);
  for (std::uint64_t lo = 2; lo <= limit; lo += kSegment) {
    const std::uint64_t hi = std::min(limit, lo + kSegment - 1);
    std::fill(seg.begin(), seg.begin() + std::ptrdiff_t(hi - lo + 1), 1);
    for (std::uint32_t p : base) {
      const std::uint64_t pp = std::uint64_t(p) * p;
      if (pp > hi) break;
      std::uint64_t start = std::max(pp, (lo + p - 1) / p * p);
      for (std::uint64_t j = start; j <= hi; j += p) seg[j - lo] = 0;
    }
    for (std::uint64_t n = lo; n <= hi; ++n) {
      if (seg[n - lo]) table.primes.push_back(std::uint32_t(n));
    }
  }
  return table;
}

// Primes up to 10^6, shared by all trial divisions.
inline const PrimeTable& trial_primes() {
  static const PrimeTable table = sieve(1'000'000);
  return table;
}

// ---------------------------------------------------------------------------
// Factorization
// ---------------------------------------------------------------------------

struct PrimePower {
  u128 prime;
  unsigned exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

class FactoredInteger {
 public:
  FactoredInteger() = default;
  FactoredInteger(i128 value, std::vector<PrimePower> factors)
      : value_(value), factors_(std::move(factors)) {
    if (value_ == 0) throw std::domain_error("FactoredInteger of zero");
  }

  [[nodiscard]] i128 value() const { return value_; }
  [[nodiscard]] u128 magnitude() const { return uabs(value_); }
  [[nodiscard]] int sign() const { return value_ < 0 ? -1 : 1; }
  [[nodiscard]] const std::vector<PrimePower>& factors() const { return factors_; }

  [[nodiscard]] unsigned valuation(u128 prime) const {
    for (const auto& f : factors_) {
      if (f.prime == prime) return f.exponent;
    }
    return 0;
  }

  // Recomputes sign * prod p^e; used by invariant checks.
  [[nodiscard]] bool consistent() const {
    if (value_ == 0) return false;
    u128 acc = 1;
    u128 prev = 1;
    for (const auto& f : factors_) {
      if (f.exponent == 0 || f.prime <= prev) return false;
      prev = f.prime;
      for (unsigned e = 0; e < f.exponent; ++e) acc *= f.prime;
    }
    return acc == magnitude();
  }

 private:
  i128 value_ = 1;
  std::vector<PrimePower> factors_;
};

namespace detail {

inline u128 pollard_brent(u128 n, std::uint64_t seed) {
  if (n % 2 == 0) return 2;
  const u128 c = 1 + seed % (n - 1);
  u128 y = seed % n;
  u128 g = 1, q = 1, x = 0, ys = 0;
  constexpr std::uint64_t kBlock = 128;
  std::uint64_t r = 1;
  auto step = [&](u128 v) { return (mulmod_wide(v, v, n) + c) % n; };
  do {
    x = y;
    for (std::uint64_t i = 0; i < r; ++i) y = step(y);
    std::uint64_t k = 0;
    while (k < r && g == 1) {
      ys = y;
      const std::uint64_t lim = std::min(kBlock, r - k);
      for (std::uint64_t i = 0; i < lim; ++i) {
        y = step(y);
        q = mulmod_wide(q, x > y ? x - y : y - x, n);
      }
      g = gcd(q, n);
      k += kBlock;
    }
    r *= 2;
  } while (g == 1);
  if (g == n) {
    do {
      ys = step(ys);
      g = gcd(x > ys ? x - ys : ys - x, n);
    } while (g == 1);
  }
  return g;
}

inline void split_cofactor(u128 n, std::vector<u128>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  for (std::uint64_t seed = 1;; ++seed) {
    u128 d = pollard_brent(n, seed);
    if (d != n && d != 1) {
      split_cofactor(d, out);
      split_cofactor(n / d, out);
      return;
    }
  }
}

}  // namespace detail

// Trial division by primes below 10^6, then Pollard-Brent on the cofactor.
inline FactoredInteger factorize(i128 n) {
  if (n == 0) throw std::domain_error("factorize: zero has no factorization");
  u128 m = uabs(n);
  std::vector<PrimePower> factors;
  for (std::uint32_t p : trial_primes().primes) {
    if (u128(p) * p > m) break;
    if (m % p != 0) continue;
    unsigned e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    factors.push_back({p, e});
  }
  if (m > 1) {
    std::vector<u128> big;
    detail::split_cofactor(m, big);
    std::sort(big.begin(), big.end());
    for (u128 p : big) {
      if (!factors.empty() && factors.back().prime == p) {
        ++factors.back().exponent;
      } else {
        factors.push_back({p, 1});
      }
    }
  }
  return FactoredInteger(n, std::move(factors));
}

// sign(n) * product of primes with odd exponent.
inline i128 squarefree_part(const FactoredInteger& f) {
  i128 r = f.sign();
  for (const auto& pf : f.factors()) {
    if (pf.exponent % 2 == 1) r *= i128(pf.prime);
  }
  return r;
}

inline i128 squarefree_part(i128 n) { return squarefree_part(factorize(n)); }

struct ArithmeticFunctions {
  u128 phi;
  u128 tau;
  unsigned omega;
  u128 rad;
};

// phi, tau, omega, rad of |f|, computed multiplicatively.
inline ArithmeticFunctions arithmetic_functions(const FactoredInteger& f) {
  ArithmeticFunctions r{1, 1, 0, 1};
  for (const auto& pf : f.factors()) {
    u128 pk1 = 1;
    for (unsigned e = 1; e < pf.exponent; ++e) pk1 *= pf.prime;
    r.phi *= pk1 * (pf.prime - 1);
    r.tau *= pf.exponent + 1;
    r.omega += 1;
    r.rad *= pf.prime;
  }
  return r;
}

// Number of divisors of a small positive integer, by trial division.
inline std::uint64_t divisor_count(std::uint64_t n) {
  std::uint64_t tau = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    tau *= e + 1;
  }
  if (n > 1) tau *= 2;
  return tau;
}

// Kronecker symbol (D/n) for n > 0, with (D/2) fixed by D mod 8.
inline int kronecker(i128 d, u128 n) {
  if (n == 0) throw std::domain_error("kronecker: n must be positive");
  int result = 1;
  while (n % 2 == 0) {
    n /= 2;
    if (d % 2 == 0) return 0;
    const int r8 = int(((d % 8) + 8) % 8);
    if (r8 == 3 || r8 == 5) result = -result;
  }
  if (n == 1) return result;
  // Jacobi symbol (d mod n / n) for odd n.
  u128 a = u128(((d % i128(n)) + i128(n)) % i128(n));
  u128 m = n;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      const unsigned r8 = unsigned(m % 8);
      if (r8 == 3 || r8 == 5) result = -result;
    }
    std::swap(a, m);
    if (a % 4 == 3 && m % 4 == 3) result = -result;
    a %= m;
  }
  return m == 1 ? result : 0;
}

// ---------------------------------------------------------------------------
// Logarithmic integral li(x) = int_2^x dt / log t
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gauss_kronrod_15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[std::size_t(i)];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[std::size_t(i)] * s;
    if (i % 2 == 1) gauss += kGaussWeights[std::size_t(i / 2)] * s;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

template <class F>
double adaptive_gk(const F& f, double a, double b, double abs_tol, double rel_tol) {
  struct Piece {
    double a, b, value, error;
  };
  std::vector<Piece> pieces;
  auto [v0, e0] = gauss_kronrod_15(f, a, b);
  pieces.push_back({a, b, v0, e0});
  double total = v0, error = e0;
  for (int iter = 0; iter < 10000 && error > std::max(abs_tol, rel_tol * std::abs(total)); ++iter) {
    auto worst = std::max_element(pieces.begin(), pieces.end(),
                                  [](const Piece& x, const Piece& y) { return x.error < y.error; });
    Piece p = *worst;
    pieces.erase(worst);
    const double mid = 0.5 * (p.a + p.b);
    auto [vl, el] = gauss_kronrod_15(f, p.a, mid);
    auto [vr, er] = gauss_kronrod_15(f, mid, p.b);
    pieces.push_back({p.a, mid, vl, el});
    pieces.push_back({mid, p.b, vr, er});
    total = 0;
    error = 0;
    for (const auto& q : pieces) {
      total += q.value;
      error += q.error;
    }
  }
  return total;
}

}  // namespace detail

// Integrates e^u / u over [log 2, log x]; tolerance 1e-12 absolute or
// 1e-15 relative, whichever is looser.
inline double log_integral(double x) {
  if (!(x >= 2.0)) throw std::domain_error("log_integral: x must be >= 2");
  if (x == 2.0) return 0.0;
  auto f = [](double u) { return std::exp(u) / u; };
  return detail::adaptive_gk(f, std::log(2.0), std::log(x), 1e-12, 1e-15);
}

}  // namespace ectd
