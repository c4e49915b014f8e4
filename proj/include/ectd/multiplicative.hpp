#pragma once

// Group orders, Euler functions of imaginary quadratic orders, Euler products
// with rigorous tail bounds, and the two series lemmas used to assemble the
// divisor-sum constants.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "ectd/arith.hpp"
#include "ectd/cm_table.hpp"
#include "ectd/parallel.hpp"

namespace ectd {

/// A real constant together with a bound on |true value - value|.
struct ConstantValue {
  double value = 0.0;
  double error_bound = 0.0;
  std::uint64_t cutoff = 0;
};

// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.carry_);
  }
  [[nodiscard]] double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// ---------------------------------------------------------------------------
// Group orders
// ---------------------------------------------------------------------------

/// |GL_2(Z/mZ)| = prod over l^k || m of l^(4k) (1 - 1/l)(1 - 1/l^2).
inline u128 gl2_order(const FactoredInteger& m) {
  u128 r = 1;
  for (const auto& pf : m.factors()) {
    const u128 l = pf.prime;
    u128 lk1 = 1;  // l^(k-1)
    for (unsigned e = 1; e < pf.exponent; ++e) lk1 *= l;
    const u128 base = (l - 1) * (l - 1) * l * (l + 1);  // |GL_2(F_l)|
    const u128 fourth = lk1 * lk1 * lk1 * lk1;
    if (base != 0 && fourth > std::numeric_limits<u128>::max() / base / (r == 0 ? 1 : r)) {
      throw std::domain_error("gl2_order overflow");
    }
    r *= base * fourth;
  }
  return r;
}

inline u128 gl2_order(std::uint64_t m) { return gl2_order(factorize(i128(m))); }

/// Phi_O(m) = |(O/mO)^x| for the CM order of discriminant d.
inline u128 order_phi(int d, const FactoredInteger& m) {
  if (!is_cm_discriminant(d)) throw std::domain_error("order_phi: unsupported discriminant");
  u128 r = 1;
  for (const auto& pf : m.factors()) {
    const u128 l = pf.prime;
    u128 local = 0;
    switch (kronecker(d, l)) {
      case -1: local = (l + 1) * (l - 1); break;
      case 1: local = (l - 1) * (l - 1); break;
      default: local = l * (l - 1); break;
    }
    for (unsigned e = 1; e < pf.exponent; ++e) local *= l * l;
    r *= local;
  }
  return r;
}

inline u128 order_phi(int d, std::uint64_t m) { return order_phi(d, factorize(i128(m))); }

// ---------------------------------------------------------------------------
// Riemann zeta at real s > 1 by Euler-Maclaurin summation
// ---------------------------------------------------------------------------

inline ConstantValue zeta(double s) {
  if (!(s > 1.0)) throw std::domain_error("zeta: s must exceed 1");
  // B_2k / (2k)! for k = 1..9.
  static constexpr std::array<double, 9> kBernoulliOverFactorial{
      1.0 / 12.0,
      -1.0 / 720.0,
      1.0 / 30240.0,
      -1.0 / 1209600.0,
      1.0 / 47900160.0,
      -691.0 / 1307674368000.0,
      1.0 / 74724249600.0,
      -3617.0 / 10670622842880000.0,
      43867.0 / 5109094217170944000.0};
  constexpr int kTerms = 20;
  const double n = kTerms;
  CompensatedSum acc;
  for (int k = kTerms - 1; k >= 1; --k) acc.add(std::pow(double(k), -s));
  acc.add(std::pow(n, 1.0 - s) / (s - 1.0));
  acc.add(0.5 * std::pow(n, -s));
  // Rising factorial s (s+1) ... (s + 2k - 2) times N^(-s-2k+1).
  double rising = s;
  double power = std::pow(n, -s - 1.0);
  for (std::size_t k = 0; k + 1 < kBernoulliOverFactorial.size(); ++k) {
    acc.add(kBernoulliOverFactorial[k] * rising * power);
    rising *= (s + double(2 * k + 1)) * (s + double(2 * k + 2));
    power /= n * n;
  }
  // For real s the remainder is bounded by the first omitted term.
  const double omitted = std::abs(kBernoulliOverFactorial.back() * rising * power);
  const double v = acc.value();
  return {v, omitted + 4 * std::numeric_limits<double>::epsilon() * v, 0};
}

// ---------------------------------------------------------------------------
// Euler products
// ---------------------------------------------------------------------------

/// (1 - l^-s)^(-power) peeled off each local factor; its tail over l > cutoff
/// is supplied exactly through zeta(s).
struct ZetaFactor {
  int s;
  int power;
};

/// Local factor g_l = 1 + excess(l). decay_* bound the residual factor
/// r_l = g_l * prod (1 - l^-s)^power over zeta_factors:
/// |r_l - 1| <= decay_coefficient * l^(-decay_exponent).
struct LocalFactorSpec {
  std::function<double(std::uint64_t)> excess;
  double decay_exponent = 2.0;
  double decay_coefficient = 1.0;
  std::vector<ZetaFactor> zeta_factors;
};

namespace detail {

inline double residual_log(const LocalFactorSpec& spec, std::uint64_t l) {
  double lg = std::log1p(spec.excess(l));
  for (const auto& z : spec.zeta_factors) {
    lg += double(z.power) * std::log1p(-std::pow(double(l), -double(z.s)));
  }
  return lg;
}

inline void check_decay(const LocalFactorSpec& spec, const std::vector<std::uint32_t>& primes) {
  auto check = [&](std::uint64_t l) {
    const double r = std::expm1(residual_log(spec, l));
    const double allowed = spec.decay_coefficient * std::pow(double(l), -spec.decay_exponent);
    if (std::abs(r) > allowed * (1 + 1e-9) + 1e-15) {
      throw std::domain_error("euler_product: decay bound violated at l = " + std::to_string(l));
    }
  };
  const std::size_t n = primes.size();
  for (std::size_t i = 0; i < std::min<std::size_t>(n, 200); ++i) check(primes[i]);
  for (std::size_t i = n > 20 ? n - 20 : 0; i < n; ++i) check(primes[i]);
}

}  // namespace detail

/// prod_{l <= cutoff} g_l times the exact zeta tails, with error_bound
/// enclosing the infinite product. Partitions merge in order, so the value is
/// bitwise reproducible for a fixed partition count.
inline ConstantValue euler_product(const LocalFactorSpec& spec, const PrimeTable& primes,
                                   unsigned partitions = 1, unsigned workers = 1) {
  if (!(spec.decay_exponent > 1.0)) {
    throw std::domain_error("euler_product: decay exponent must exceed 1");
  }
  if (!(spec.decay_coefficient >= 0.0)) {
    throw std::domain_error("euler_product: negative decay coefficient");
  }
  if (primes.limit < 100) throw std::domain_error("euler_product: cutoff below 100");
  detail::check_decay(spec, primes.primes);

  const std::size_t n = primes.primes.size();
  std::vector<CompensatedSum> parts(std::max(1u, partitions));
  std::vector<double> magnitudes(parts.size(), 0.0);
  parallel_chunks(n, parts.size(), workers, [&](std::size_t c, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double t = std::log1p(spec.excess(primes.primes[i]));
      parts[c].add(t);
      magnitudes[c] += std::abs(t);
    }
  });
  CompensatedSum log_sum;
  double magnitude = 0.0;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    log_sum.add(parts[c]);
    magnitude += magnitudes[c];
  }

  double relative_error = 0.0;
  // Exact tails of the peeled zeta factors: prod_{l > L} (1 - l^-s)^-k
  // = (zeta(s) prod_{l <= L} (1 - l^-s))^k.
  for (const auto& z : spec.zeta_factors) {
    const ConstantValue zv = zeta(double(z.s));
    CompensatedSum inner;
    inner.add(std::log(zv.value));
    for (std::uint32_t l : primes.primes) inner.add(std::log1p(-std::pow(double(l), -double(z.s))));
    log_sum.add(double(z.power) * inner.value());
    magnitude += std::abs(double(z.power) * inner.value());
    relative_error += std::abs(double(z.power)) * (zv.error_bound / zv.value) * 1.01;
  }

  const double big_l = double(primes.limit);
  const double s = spec.decay_exponent;
  const double c = spec.decay_coefficient;
  // sum_{l > L} l^-s <= int_L^inf t^-s dt; |log r| <= |r - 1| / (1 - |r - 1|).
  const double tail = std::pow(big_l, 1.0 - s) / (s - 1.0);
  const double shrink = 1.0 - c * std::pow(big_l, -s);
  relative_error += std::expm1(c * tail / shrink);
  // log1p and pow each carry about one ulp per term; exp adds one more.
  if (magnitude > 0.0) {
    relative_error += 4.0 * std::numeric_limits<double>::epsilon() * (magnitude + 1.0);
  }

  const double v = std::exp(log_sum.value());
  return {v, std::abs(v) * relative_error, primes.limit};
}

inline ConstantValue euler_product(const LocalFactorSpec& spec, std::uint64_t cutoff) {
  return euler_product(spec, sieve(cutoff));
}

// ---------------------------------------------------------------------------
// L(1, chi_O)
// ---------------------------------------------------------------------------

/// L(1, chi) for chi = (d / .), by partial sums with an Abel-summation
/// correction. Exact period data bound the remainder by 2H / ((N+1)(N+2)).
inline ConstantValue l_one_chi(int d, std::uint64_t cutoff = 100000) {
  if (!is_cm_discriminant(d)) throw std::domain_error("l_one_chi: unsupported discriminant");
  const std::uint64_t q = std::uint64_t(-d);
  const std::uint64_t big_n = std::max<std::uint64_t>(cutoff, q);

  // Over one period: q * mean(S) and H = max |T(n)|, T(n) = sum (S(k) - mean).
  std::int64_t period_sum = 0;
  {
    std::int64_t s = 0;
    for (std::uint64_t k = 1; k <= q; ++k) {
      s += kronecker(d, k);
      period_sum += s;
    }
  }
  std::int64_t h_scaled = 0;  // q * H
  {
    std::int64_t s = 0, t = 0;
    for (std::uint64_t k = 1; k <= q; ++k) {
      s += kronecker(d, k);
      t += std::int64_t(q) * s - period_sum;
      h_scaled = std::max(h_scaled, std::abs(t));
    }
  }
  const double mean_s = double(period_sum) / double(q);
  const double h = double(h_scaled) / double(q);

  CompensatedSum acc;
  std::int64_t s_n = 0;
  for (std::uint64_t k = 1; k <= big_n; ++k) {
    const int chi = kronecker(d, k);
    s_n += chi;
    if (chi != 0) acc.add(double(chi) / double(k));
  }
  const double np1 = double(big_n) + 1.0;
  acc.add((mean_s - double(s_n)) / np1);
  const double v = acc.value();
  const double err = 2.0 * h / (np1 * (np1 + 1.0)) + 1e-15 * std::sqrt(double(big_n)) + 1e-16;
  return {v, err, big_n};
}

// ---------------------------------------------------------------------------
// Series lemmas
// ---------------------------------------------------------------------------

/// f(m) = alpha g(m) if M | m, g(m) otherwise, with g multiplicative and
/// g(mM) = m^-kappa g(M) for m | M^inf. prime_power(l, r) returns g(l^r).
struct AlmostMultSpec {
  FactoredInteger modulus;
  double alpha = 1.0;
  int kappa = 2;
  LocalFactorSpec g;
  std::function<double(std::uint64_t, unsigned)> prime_power;
};

namespace detail {

inline void validate_almost_mult(const AlmostMultSpec& spec) {
  if (spec.kappa < 2) throw std::domain_error("almost_mult_sum: kappa must be >= 2");
  if (!(spec.alpha > 0.0)) throw std::domain_error("almost_mult_sum: alpha must be positive");
  if (spec.modulus.value() <= 0) throw std::domain_error("almost_mult_sum: M must be positive");
  for (const auto& pf : spec.modulus.factors()) {
    const auto l = std::uint64_t(pf.prime);
    const unsigned e = pf.exponent;
    const double ge = spec.prime_power(l, e);
    // g(l^(e+j)) = l^(-j kappa) g(l^e), the prime-power form of g(mM) = m^-kappa g(M).
    for (unsigned j = 1; j <= 3; ++j) {
      const double expect = ge * std::pow(double(l), -double(j) * spec.kappa);
      const double got = spec.prime_power(l, e + j);
      if (std::abs(got - expect) > 1e-12 * std::abs(expect) + 1e-300) {
        throw std::domain_error("almost_mult_sum: g(mM) != m^-kappa g(M) at l = " +
                                std::to_string(l));
      }
    }
    // The declared local factor must be the full series sum_r g(l^r).
    CompensatedSum series;
    series.add(1.0);
    for (unsigned r = 1; r < 400; ++r) {
      const double t = spec.prime_power(l, r);
      series.add(t);
      if (r > e + 1 && std::abs(t) < 1e-19) break;
    }
    const double declared = 1.0 + spec.g.excess(l);
    if (std::abs(series.value() - declared) > 1e-10 * std::abs(declared)) {
      throw std::domain_error("almost_mult_sum: local factor inconsistent with g at l = " +
                              std::to_string(l));
    }
  }
}

}  // namespace detail

/// Closed form sum_m f(m) = (1 + (alpha-1) g(M) prod_{l|M} g_l^-1 (1 - l^-kappa)^-1) prod_l g_l.
inline ConstantValue almost_mult_sum(const AlmostMultSpec& spec, const PrimeTable& primes) {
  detail::validate_almost_mult(spec);
  const ConstantValue product = euler_product(spec.g, primes);
  double g_m = 1.0;
  double local = 1.0;
  for (const auto& pf : spec.modulus.factors()) {
    const auto l = std::uint64_t(pf.prime);
    g_m *= spec.prime_power(l, pf.exponent);
    local /= (1.0 + spec.g.excess(l)) * (1.0 - std::pow(double(l), -double(spec.kappa)));
  }
  const double factor = 1.0 + (spec.alpha - 1.0) * g_m * local;
  return {factor * product.value,
          std::abs(factor) * product.error_bound +
              4 * std::numeric_limits<double>::epsilon() * std::abs(factor * product.value),
          product.cutoff};
}

inline ConstantValue almost_mult_sum(const AlmostMultSpec& spec, std::uint64_t cutoff) {
  return almost_mult_sum(spec, sieve(cutoff));
}

inline std::vector<std::uint64_t> divisors(const FactoredInteger& m) {
  std::vector<std::uint64_t> out{1};
  for (const auto& pf : m.factors()) {
    const std::size_t n = out.size();
    std::uint64_t pk = 1;
    for (unsigned e = 1; e <= pf.exponent; ++e) {
      pk *= std::uint64_t(pf.prime);
      for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Upper bound prod_{l|M} (1 - l^-kappa)^-1 (sum_{m|M} |f(m)|) (sum_m |g(m)|)
/// for f, g satisfying the factorization and vertical-growth hypotheses.
/// `abs_g` must describe sum_r |g(l^r)| as its local factor.
inline double bounded_sum(const std::map<std::uint64_t, double>& abs_f_on_divisors,
                          const LocalFactorSpec& abs_g, const FactoredInteger& modulus,
                          double kappa, const PrimeTable& primes) {
  if (!(kappa >= 2.0)) throw std::domain_error("bounded_sum: kappa must be real and >= 2");
  CompensatedSum divisor_sum;
  for (std::uint64_t d : divisors(modulus)) {
    auto it = abs_f_on_divisors.find(d);
    if (it == abs_f_on_divisors.end()) {
      throw std::domain_error("bounded_sum: missing |f(" + std::to_string(d) + ")|");
    }
    divisor_sum.add(std::abs(it->second));
  }
  double correction = 1.0;
  for (const auto& pf : modulus.factors()) {
    correction /= 1.0 - std::pow(double(pf.prime), -kappa);
  }
  const ConstantValue g_sum = euler_product(abs_g, primes);
  return correction * divisor_sum.value() * (g_sum.value + g_sum.error_bound);
}

}  // namespace ectd
