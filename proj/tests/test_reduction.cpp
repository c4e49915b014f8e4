#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "ectd/reduction.hpp"
#include "oracle.hpp"

using namespace ectd;

namespace {

void expect_matches_oracle(std::int64_t a, std::int64_t b, std::uint64_t p) {
  const auto c = curve_invariants(a, b);
  const auto r = group_structure(c, p);
  const auto o = oracle::group_structure(a, b, std::int64_t(p));
  ASSERT_EQ(r.p, p);
  ASSERT_EQ(r.a_p, o.a_p) << a << " " << b << " " << p;
  ASSERT_EQ(r.n_points, o.n) << a << " " << b << " " << p;
  ASSERT_EQ(r.d1, o.d1) << a << " " << b << " " << p;
  ASSERT_EQ(r.d2, o.d2) << a << " " << b << " " << p;
}

std::int64_t legendre_trace(std::int64_t a, std::int64_t b, std::int64_t p) {
  std::int64_t s = 0;
  for (std::int64_t x = 0; x < p; ++x) {
    const std::int64_t v = (((x * x % p) * x % p + (a % p + p) % p * x) % p + (b % p + p)) % p;
    s += oracle::legendre(v, p);
  }
  return -s;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("ectd_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(GoodPrimes, Examples) {
  const auto c = curve_invariants(1, 1);
  EXPECT_EQ(good_primes(c, 20), (std::vector<std::uint64_t>{5, 7, 11, 13, 17, 19}));
  EXPECT_TRUE(good_primes(c, 4).empty());
  const auto e = curve_invariants(0, 1);
  EXPECT_EQ(good_primes(e, 20), (std::vector<std::uint64_t>{5, 7, 11, 13, 17, 19}));
  const auto g = good_primes(c, 100);
  EXPECT_TRUE(std::find(g.begin(), g.end(), 31) == g.end());
  EXPECT_TRUE(std::find(g.begin(), g.end(), 29) != g.end());
}

TEST(TraceAp, Examples) {
  EXPECT_EQ(trace_ap(curve_invariants(1, 1), 5), -3);
  EXPECT_EQ(trace_ap(curve_invariants(1, 1), 7), 3);
  EXPECT_EQ(trace_ap(curve_invariants(0, 1), 5), 0);
  EXPECT_THROW(trace_ap(curve_invariants(1, 1), 31), std::domain_error);
  EXPECT_THROW(trace_ap(curve_invariants(1, 1), 3), std::domain_error);
  EXPECT_THROW(group_structure(curve_invariants(0, 1), 2), std::domain_error);
}

TEST(GroupStructure, Examples) {
  auto r = group_structure(curve_invariants(1, 1), 5);
  EXPECT_EQ(r.n_points, 9u);
  EXPECT_EQ(r.d1, 1u);
  EXPECT_EQ(r.d2, 9u);
  r = group_structure(curve_invariants(-1, 0), 5);
  EXPECT_EQ(r.n_points, 8u);
  EXPECT_EQ(r.d1, 2u);
  EXPECT_EQ(r.d2, 4u);
  r = group_structure(curve_invariants(0, 1), 5);
  EXPECT_EQ(r.d1, 1u);
  EXPECT_EQ(r.d2, 6u);
}

TEST(GroupStructure, MatchesEnumerationOracleSmallPrimes) {
  std::mt19937_64 rng(20);
  int curves = 0;
  while (curves < 20) {
    const std::int64_t a = std::int64_t(rng() % 101) - 50, b = std::int64_t(rng() % 101) - 50;
    if (4 * a * a * a + 27 * b * b == 0) continue;
    const auto c = curve_invariants(a, b);
    for (std::uint64_t p : good_primes(c, 199)) expect_matches_oracle(a, b, p);
    ++curves;
  }
}

TEST(GroupStructure, MatchesEnumerationOracleAcrossBackendSwitch) {
  // Primes just above the enumeration limit go through baby-step giant-step.
  std::mt19937_64 rng(21);
  int curves = 0;
  while (curves < 6) {
    const std::int64_t a = std::int64_t(rng() % 101) - 50, b = std::int64_t(rng() % 101) - 50;
    if (4 * a * a * a + 27 * b * b == 0) continue;
    const auto c = curve_invariants(a, b);
    for (std::uint64_t p : good_primes(c, 1300)) {
      if (p > 950) expect_matches_oracle(a, b, p);
    }
    ++curves;
  }
  // Curves with full rational 2-torsion and with CM, where d1 > 1 is common.
  for (auto [a, b] : std::vector<std::pair<std::int64_t, std::int64_t>>{{-1, 0}, {0, 1}, {-7, 6}, {-43, 166}}) {
    const auto c = curve_invariants(a, b);
    for (std::uint64_t p : good_primes(c, 1200)) {
      if (p > 1000) expect_matches_oracle(a, b, p);
    }
  }
}

TEST(TraceAp, BsgsAgreesWithCharacterSum) {
  for (auto [a, b] : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 1}, {-1, 0}, {0, 1}, {5, -13}}) {
    const auto c = curve_invariants(a, b);
    for (std::uint64_t p : {1031u, 10007u, 65537u, 100003u, 199999u}) {
      if (!good_prime(c, p)) continue;
      EXPECT_EQ(trace_ap(c, p), legendre_trace(a, b, std::int64_t(p))) << a << " " << b << " " << p;
    }
  }
}

TEST(ReductionRecord, InvariantsHoldUpTo1e4) {
  for (auto [a, b] : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 1}, {-1, 0}, {0, 1}, {-7, 6}, {2, 3}}) {
    const auto c = curve_invariants(a, b);
    for (const auto& r : reduce_all(c, good_primes(c, 10000))) {
      ASSERT_EQ(record_violations(r), 0u) << a << " " << b << " " << r.p;
    }
  }
}

TEST(ReductionRecord, ViolationMask) {
  ReductionRecord ok{5, -3, 9, 1, 9};
  EXPECT_EQ(record_violations(ok), 0u);
  ReductionRecord bad = ok;
  bad.d1 = 2;
  bad.d2 = 3;
  EXPECT_NE(record_violations(bad) & 1u, 0u);
  bad = ok;
  bad.n_points = 10;
  EXPECT_NE(record_violations(bad) & 2u, 0u);
  bad = {7, 0, 8, 4, 2};
  EXPECT_NE(record_violations(bad) & 4u, 0u);
  bad = {5, 5, 1, 1, 1};
  EXPECT_NE(record_violations(bad) & 8u, 0u);
}

TEST(TraceAp, IsomorphicAndTwistedModels) {
  const auto base = curve_invariants(1, 1);
  for (i128 u : {2, 3, 5}) {
    const auto iso = curve_invariants(u * u * u * u, u * u * u * u * u * u);
    const auto twist = curve_invariants(u * u, u * u * u);
    for (std::uint64_t p : good_primes(base, 3000)) {
      if (p % std::uint64_t(u) == 0 || !good_prime(iso, p)) continue;
      ASSERT_EQ(trace_ap(iso, p), trace_ap(base, p)) << p;
      const int chi = oracle::legendre(std::int64_t(u), std::int64_t(p));
      ASSERT_EQ(trace_ap(twist, p), chi * trace_ap(base, p)) << p;
      ASSERT_EQ(std::abs(trace_ap(twist, p)), std::abs(trace_ap(base, p))) << p;
    }
  }
}

TEST(ReduceAll, IndependentOfWorkerCount) {
  const auto c = curve_invariants(-15, 22);
  const auto primes = good_primes(c, 30000);
  const auto one = reduce_all(c, primes, 1);
  const auto four = reduce_all(c, primes, 4);
  EXPECT_EQ(one, four);
  ASSERT_EQ(one.size(), primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i) ASSERT_EQ(one[i].p, primes[i]);
}

TEST(ReductionCache, RoundTripAndIncrementalAppend) {
  const auto dir = fresh_dir("cache");
  const auto c = curve_invariants(1, 1);
  const auto path = ReductionCache::default_path(dir, c);
  EXPECT_EQ(path.filename(), "curve_1_1.ecrc");
  const auto first = reduce_all(c, good_primes(c, 2000));
  {
    ReductionCache cache(path, c);
    EXPECT_EQ(cache.size(), 0u);
    cache.append(first);
    cache.append(first);
  }
  {
    ReductionCache cache(path, c);
    ASSERT_EQ(cache.size(), first.size());
    for (const auto& r : first) {
      const auto* hit = cache.find(r.p);
      ASSERT_NE(hit, nullptr);
      EXPECT_EQ(*hit, r);
    }
    EXPECT_EQ(cache.find(31), nullptr);
  }
  const auto size_before = std::filesystem::file_size(path);
  EXPECT_EQ(size_before, 4 + 4 + 8 + 8 + first.size() * 40);

  const auto primes = good_primes(c, 5000);
  const auto cached = reduce_all_cached(c, primes, 2, dir);
  EXPECT_EQ(cached, reduce_all(c, primes));
  EXPECT_EQ(std::filesystem::file_size(path), 24 + primes.size() * 40);
  EXPECT_EQ(reduce_all_cached(c, primes, 1, dir), cached);
  EXPECT_EQ(reduce_all_cached(c, primes, 1, std::nullopt), cached);
  std::filesystem::remove_all(dir);
}

TEST(ReductionCache, RejectsForeignOrCorruptFiles) {
  const auto dir = fresh_dir("corrupt");
  const auto c = curve_invariants(1, 1);
  const auto path = ReductionCache::default_path(dir, c);
  {
    ReductionCache cache(path, c);
    cache.append(reduce_all(c, good_primes(c, 100)));
  }
  EXPECT_THROW(ReductionCache(path, curve_invariants(2, 3)), std::runtime_error);
  {
    std::ofstream out(dir / "junk.ecrc", std::ios::binary);
    out << "NOPE0000000000000000000000";
  }
  EXPECT_THROW(ReductionCache(dir / "junk.ecrc", c), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(ReductionCache, EnvironmentOverride) {
  ::setenv("ECTD_CACHE_DIR", "/tmp/some_cache", 1);
  EXPECT_EQ(cache_dir_from_env(), std::filesystem::path("/tmp/some_cache"));
  ::setenv("ECTD_CACHE_DIR", "", 1);
  EXPECT_EQ(cache_dir_from_env(), std::nullopt);
  ::unsetenv("ECTD_CACHE_DIR");
  EXPECT_EQ(cache_dir_from_env(), std::nullopt);
}

TEST(RecordsCsv, HeaderAndRows) {
  const auto c = curve_invariants(1, 1);
  std::ostringstream out;
  write_records_csv(out, reduce_all(c, good_primes(c, 10)));
  EXPECT_EQ(out.str(), "p,a_p,N,d1,d2\n5,-3,9,1,9\n7,3,5,1,5\n");
}
