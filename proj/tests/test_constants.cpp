#include <gtest/gtest.h>

#include <numbers>

#include "ectd/constants.hpp"
#include "oracle.hpp"

using namespace ectd;

namespace {

/// |GL_2(Z/mZ)| from the factorization, as a double.
double gl2_double(std::uint64_t m) {
  double r = 1.0;
  for (auto [l, k] : oracle::trial_factor(m)) {
    const double ld = double(l);
    r *= std::pow(ld, 4.0 * k) * (1 - 1 / ld) * (1 - 1 / (ld * ld));
  }
  return r;
}

/// Terms of the three defining series.
double series_term(ConstantKind kind, std::uint64_t m) {
  const auto f = oracle::trial_factor(m);
  double phi = 1.0, phi_rad = 1.0;
  for (auto [l, k] : f) {
    phi *= std::pow(double(l), double(k) - 1) * double(l - 1);
    phi_rad *= double(l - 1);
  }
  const double gl2 = gl2_double(m);
  switch (kind) {
    case ConstantKind::d1: return phi / gl2;
    case ConstantKind::tau_d1: return 1.0 / gl2;
    default: return (f.size() % 2 ? -1.0 : 1.0) * phi_rad / (double(m) * gl2);
  }
}

/// Correction c = sum_{M | m} g(m) / sum_m g(m) by partial sums.
double brute_correction(ConstantKind kind, std::uint64_t modulus) {
  CompensatedSum all, multiples;
  for (std::uint64_t m = 20000; m >= 1; --m) all.add(series_term(kind, m));
  for (std::uint64_t k = 20000; k >= 1; --k) multiples.add(series_term(kind, modulus * k));
  return multiples.value() / all.value();
}

const ConstantTriple& idealized() {
  static const ConstantTriple t = idealized_constants(100000);
  return t;
}

}  // namespace

TEST(IdealizedConstants, Digits) {
  const auto& t = idealized();
  EXPECT_NEAR(t.c_d1.value, 1.25844835, 5e-8);
  EXPECT_NEAR(t.c_tau_d1.value, 1.2059016, 1e-7);
  EXPECT_NEAR(t.c_d2.value, 0.89922825, 5e-8);
  for (ConstantKind k : kAllKinds) {
    EXPECT_LT(t.get(k).error_bound, 5e-8);
    EXPECT_EQ(t.get(k).cutoff, 100000u);
  }
  EXPECT_LE(t.c_d2.value, t.c_tau_d1.value);
}

TEST(IdealizedConstants, MatchDefiningSeries) {
  for (ConstantKind k : kAllKinds) {
    CompensatedSum s;
    for (std::uint64_t m = 20000; m >= 1; --m) s.add(series_term(k, m));
    EXPECT_NEAR(idealized().get(k).value, s.value(), 1e-8) << to_string(k);
  }
}

TEST(IdealizedConstants, CutoffContract) {
  EXPECT_THROW(idealized_constants(999), std::domain_error);
  EXPECT_NO_THROW(idealized_constants(1000));
}

TEST(ClassicalTitchmarsh, Examples) {
  const double pi = std::numbers::pi;
  const double truth = (pi * pi / 6) * oracle::zeta_direct(3.0) / (std::pow(pi, 6) / 945);
  const auto one = classical_titchmarsh(1);
  EXPECT_NEAR(one.value, 1.9435964, 1e-7);
  EXPECT_NEAR(one.value, truth, 1e-7);
  const auto two = classical_titchmarsh(2);
  EXPECT_NEAR(two.value, 0.6478655, 1e-7);
  EXPECT_NEAR(two.value, truth / 3.0, 1e-7);
  EXPECT_EQ(classical_titchmarsh(-2).value, two.value);
  EXPECT_NEAR(classical_titchmarsh(12).value, truth / 3.0 * (1.0 - 3.0 / 7.0), 1e-7);
  EXPECT_THROW(classical_titchmarsh(0), std::domain_error);
}

TEST(KindNames, RoundTrip) {
  for (ConstantKind k : kAllKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_EQ(parse_kind("tau"), ConstantKind::tau_d1);
  EXPECT_THROW(parse_kind("d3"), std::invalid_argument);
}

TEST(AdmissibleLevel, Shapes) {
  for (std::uint64_t m : {2u, 4u, 8u, 6u, 46u, 62u, 652u, 120u, 2 * 3 * 5 * 7 * 11u})
    EXPECT_TRUE(admissible_level(factorize(i128(m)))) << m;
  for (std::uint64_t m : {1u, 3u, 16u, 18u, 31u, 50u, 2 * 9u})
    EXPECT_FALSE(admissible_level(factorize(i128(m)))) << m;
}

TEST(SerreConstants, LevelTwoExactD1Factor) {
  const auto r = serre_constants(factorize(2), idealized());
  EXPECT_EQ(r.m_e, 2u);
  EXPECT_EQ(r.correction_factors[0], Rational(29, 25));
  EXPECT_EQ(to_string(r.correction_factors[0]), "29/25");
  EXPECT_DOUBLE_EQ(to_double(r.correction_factors[0]), 1.16);
  EXPECT_NEAR(r.triple.c_d1.value, 1.16 * idealized().c_d1.value, 1e-15);
}

TEST(SerreConstants, CorrectionSigns) {
  for (std::uint64_t m : {2u, 4u, 6u, 46u, 62u, 652u, 2 * 3 * 5u, 8 * 3 * 5 * 7u}) {
    const auto r = serre_constants(factorize(i128(m)), idealized());
    EXPECT_GT(r.correction_factors[0], 1) << m;
    EXPECT_GT(r.correction_factors[1], 1) << m;
    EXPECT_NE(r.correction_factors[2], 1) << m;
    const unsigned omega = unsigned(factorize(i128(m)).factors().size());
    EXPECT_EQ(r.correction_factors[2] > 1, omega % 2 == 0) << m;
    EXPECT_LE(r.triple.c_d2.value, r.triple.c_tau_d1.value) << m;
  }
  EXPECT_LT(serre_constants(factorize(2), idealized()).correction_factors[2], 1);
}

TEST(SerreConstants, InadmissibleLevelsRejected) {
  EXPECT_THROW(serre_constants(factorize(1), 1000), std::domain_error);
  EXPECT_THROW(serre_constants(factorize(3), 1000), std::domain_error);
  EXPECT_THROW(serre_constants(factorize(16), 1000), std::domain_error);
  EXPECT_THROW(serre_correction(ConstantKind::d1, factorize(18)), std::domain_error);
}

TEST(SerreConstants, RouteEquivalence) {
  const auto primes = sieve(100000);
  for (std::uint64_t m : {2u, 46u, 62u}) {
    const auto fm = factorize(i128(m));
    const auto r = serre_constants(fm, idealized());
    for (ConstantKind k : kAllKinds) {
      const auto route = almost_mult_sum(serre_series_spec(k, fm), primes);
      const auto& direct = r.triple.get(k);
      ASSERT_LE(std::abs(route.value - direct.value), route.error_bound + direct.error_bound + 1e-15)
          << m << " " << to_string(k);
    }
  }
}

TEST(SerreConstants, LevelSixtyTwoTauMatchesSeriesRoute) {
  const auto fm = factorize(62);
  const auto route = almost_mult_sum(serre_series_spec(ConstantKind::tau_d1, fm), 100000);
  EXPECT_NEAR(route.value, 1.205901811023, 1e-11);
  EXPECT_NEAR(serre_constants(fm, idealized()).triple.c_tau_d1.value, route.value, 1e-12);
}

TEST(SerreConstants, CorrectionsMatchBruteForceSeries) {
  for (std::uint64_t m : {2u, 4u, 46u, 62u, 652u}) {
    for (ConstantKind k : kAllKinds) {
      const double exact = to_double(serre_correction(k, factorize(i128(m))));
      const double brute = brute_correction(k, m);
      ASSERT_NEAR(brute / exact, 1.0, 1e-7) << m << " " << to_string(k);
    }
  }
}

TEST(SerreConstants, CorrectionsShrinkWithLevel) {
  for (ConstantKind k : kAllKinds) {
    double prev = 1e9;
    for (std::uint64_t m : {2u, 46u, 62u, 652u}) {
      const double c = std::abs(to_double(serre_correction(k, factorize(i128(m)))));
      EXPECT_LT(c, prev) << m << " " << to_string(k);
      prev = c;
    }
  }
}
