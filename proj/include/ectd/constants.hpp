#pragma once

// Classical Titchmarsh constant, the three idealized Euler-product constants
// and their exact corrections for Serre curves.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "ectd/arith.hpp"
#include "ectd/multiplicative.hpp"

namespace ectd {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class ConstantKind { d1, tau_d1, d2 };

inline constexpr std::array<ConstantKind, 3> kAllKinds{ConstantKind::d1, ConstantKind::tau_d1,
                                                       ConstantKind::d2};

inline std::string to_string(ConstantKind k) {
  switch (k) {
    case ConstantKind::d1: return "d1";
    case ConstantKind::tau_d1: return "tau_d1";
    case ConstantKind::d2: return "d2";
  }
  return "?";
}

inline ConstantKind parse_kind(const std::string& s) {
  if (s == "d1") return ConstantKind::d1;
  if (s == "tau_d1" || s == "tau") return ConstantKind::tau_d1;
  if (s == "d2") return ConstantKind::d2;
  throw std::invalid_argument("unknown constant kind '" + s + "'");
}

struct ConstantTriple {
  ConstantValue c_d1;
  ConstantValue c_tau_d1;
  ConstantValue c_d2;

  [[nodiscard]] const ConstantValue& get(ConstantKind k) const {
    switch (k) {
      case ConstantKind::d1: return c_d1;
      case ConstantKind::tau_d1: return c_tau_d1;
      default: return c_d2;
    }
  }
  ConstantValue& get(ConstantKind k) {
    return const_cast<ConstantValue&>(static_cast<const ConstantTriple&>(*this).get(k));
  }
};

/// Exponent kappa with g(l^(r+1)) = l^-kappa g(l^r).
inline int kind_kappa(ConstantKind k) {
  switch (k) {
    case ConstantKind::d1: return 3;
    case ConstantKind::tau_d1: return 4;
    default: return 5;
  }
}

/// g(l^r) for r >= 1 in the series whose Euler product is the idealized constant.
inline double kind_prime_power(ConstantKind k, std::uint64_t prime, unsigned r) {
  const double l = double(prime);
  switch (k) {
    case ConstantKind::d1:
      return std::pow(l, -3.0 * r) / (1.0 - 1.0 / (l * l));
    case ConstantKind::tau_d1:
      return std::pow(l, -4.0 * r) / ((1.0 - 1.0 / l) * (1.0 - 1.0 / (l * l)));
    default:
      return -l * std::pow(l, -5.0 * r) / (1.0 - 1.0 / (l * l));
  }
}

/// Local factor minus one.
inline double kind_excess(ConstantKind k, std::uint64_t prime) {
  const double l = double(prime);
  const double l2 = l * l;
  switch (k) {
    case ConstantKind::d1:
      return l2 / ((l2 - 1.0) * (l2 * l - 1.0));
    case ConstantKind::tau_d1:
      return l2 * l / ((l - 1.0) * (l2 - 1.0) * (l2 * l2 - 1.0));
    default:
      return -(l2 * l) / ((l2 - 1.0) * (l2 * l2 * l - 1.0));
  }
}

inline LocalFactorSpec kind_local_spec(ConstantKind k) {
  LocalFactorSpec spec;
  spec.excess = [k](std::uint64_t l) { return kind_excess(k, l); };
  switch (k) {
    case ConstantKind::d1:
      spec.decay_exponent = 3.0;
      spec.decay_coefficient = 1.53;
      break;
    case ConstantKind::tau_d1:
      spec.decay_exponent = 4.0;
      spec.decay_coefficient = 2.85;
      break;
    case ConstantKind::d2:
      spec.decay_exponent = 4.0;
      spec.decay_coefficient = 1.38;
      break;
  }
  return spec;
}

inline ConstantTriple idealized_constants(const PrimeTable& primes) {
  if (primes.limit < 1000) throw std::domain_error("idealized_constants: cutoff below 1000");
  ConstantTriple t;
  for (ConstantKind k : kAllKinds) t.get(k) = euler_product(kind_local_spec(k), primes);
  return t;
}

inline ConstantTriple idealized_constants(std::uint64_t cutoff = 100000) {
  return idealized_constants(sieve(cutoff));
}

/// zeta(2) zeta(3) / zeta(6) * prod_{l | a} (1 - l / (l^2 - l + 1)).
inline ConstantValue classical_titchmarsh(i128 a, const PrimeTable& primes) {
  if (a == 0) throw std::domain_error("classical_titchmarsh: a must be nonzero");
  LocalFactorSpec spec;
  spec.excess = [](std::uint64_t l) {
    const double x = double(l);
    return 1.0 / (x * (x - 1.0));
  };
  // (1 + 1/(l(l-1))) (1 - l^-2) = 1 + l^-3.
  spec.zeta_factors = {{2, 1}};
  spec.decay_exponent = 3.0;
  spec.decay_coefficient = 1.0;
  ConstantValue v = euler_product(spec, primes);
  double factor = 1.0;
  const FactoredInteger fa = factorize(a);
  for (const auto& pf : fa.factors()) {
    const double l = double(pf.prime);
    factor *= 1.0 - l / (l * l - l + 1.0);
  }
  v.value *= factor;
  v.error_bound = v.error_bound * factor + 2 * std::numeric_limits<double>::epsilon() * v.value;
  return v;
}

inline ConstantValue classical_titchmarsh(i128 a, std::uint64_t cutoff = 100000) {
  return classical_titchmarsh(a, sieve(cutoff));
}

// ---------------------------------------------------------------------------
// Serre-curve corrections
// ---------------------------------------------------------------------------

/// m = 2n, 4n or 8n with n odd and squarefree.
inline bool admissible_level(const FactoredInteger& m) {
  if (m.value() < 2) return false;
  bool even = false;
  for (const auto& pf : m.factors()) {
    if (pf.prime == 2) {
      even = pf.exponent <= 3;
      if (!even) return false;
    } else if (pf.exponent != 1) {
      return false;
    }
  }
  return even;
}

namespace detail {

inline Rational inverse_power(std::uint64_t l, int k) {
  BigInt d = 1;
  for (int i = 0; i < k; ++i) d *= l;
  return Rational(BigInt(1), d);
}

}  // namespace detail

/// The exact correction c with C(E) = C (1 + c) for a Serre curve of level m.
inline Rational serre_correction(ConstantKind kind, const FactoredInteger& m) {
  if (!admissible_level(m)) {
    throw std::domain_error("serre_constants: inadmissible level " + to_string(m.value()));
  }
  const int kappa = kind_kappa(kind);
  BigInt mk = 1;
  for (int i = 0; i < kappa; ++i) mk *= BigInt(std::uint64_t(m.value()));
  Rational c(BigInt(1), mk);
  for (const auto& pf : m.factors()) {
    const auto l = std::uint64_t(pf.prime);
    using detail::inverse_power;
    Rational local;
    switch (kind) {
      case ConstantKind::d1:
        local = (1 - inverse_power(l, 2)) * (1 - inverse_power(l, 3)) + inverse_power(l, 3);
        break;
      case ConstantKind::tau_d1:
        local = (1 - inverse_power(l, 1)) * (1 - inverse_power(l, 2)) * (1 - inverse_power(l, 4)) +
                inverse_power(l, 4);
        break;
      case ConstantKind::d2:
        local = (1 - inverse_power(l, 2)) * (1 - inverse_power(l, 5)) - inverse_power(l, 4);
        c *= -BigInt(l);
        break;
    }
    c /= local;
  }
  return c;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

struct SerreConstantReport {
  std::uint64_t m_e = 0;
  ConstantTriple triple;
  std::array<Rational, 3> correction_factors;  // 1 + c, indexed like kAllKinds
};

inline ConstantValue apply_factor(const ConstantValue& base, double factor) {
  return {base.value * factor,
          std::abs(factor) * base.error_bound +
              2 * std::numeric_limits<double>::epsilon() * std::abs(base.value * factor),
          base.cutoff};
}

inline SerreConstantReport serre_constants(const FactoredInteger& m_e,
                                           const ConstantTriple& idealized) {
  SerreConstantReport r;
  r.m_e = std::uint64_t(m_e.value());
  for (std::size_t i = 0; i < kAllKinds.size(); ++i) {
    const ConstantKind k = kAllKinds[i];
    r.correction_factors[i] = 1 + serre_correction(k, m_e);
    r.triple.get(k) = apply_factor(idealized.get(k), to_double(r.correction_factors[i]));
  }
  return r;
}

inline SerreConstantReport serre_constants(const FactoredInteger& m_e,
                                           std::uint64_t cutoff = 100000) {
  if (!admissible_level(m_e)) {
    throw std::domain_error("serre_constants: inadmissible level " + to_string(m_e.value()));
  }
  return serre_constants(m_e, idealized_constants(cutoff));
}

/// The defining series with f(m) = 2 g(m) when m_e | m, as input to almost_mult_sum.
inline AlmostMultSpec serre_series_spec(ConstantKind kind, const FactoredInteger& m_e) {
  AlmostMultSpec spec;
  spec.modulus = m_e;
  spec.alpha = 2.0;
  spec.kappa = kind_kappa(kind);
  spec.g = kind_local_spec(kind);
  spec.prime_power = [kind](std::uint64_t l, unsigned r) { return kind_prime_power(kind, l, r); };
  return spec;
}

}  // namespace ectd
