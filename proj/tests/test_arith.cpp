#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "rlab/arith.hpp"
#include "rlab/error.hpp"

using namespace rlab;

namespace {

const ArithTables& tables() {
  static const ArithTables t = [] {
    const int ks[] = {3, 4};
    return build_tables(100000, ks);
  }();
  return t;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an rlab::Error");
  return ErrorKind::argument;
}

}  // namespace

TEST_CASE("small tables match enumeration") {
  const int k3[] = {3};
  CHECK(build_tables(12, {}).d[12] == 6);
  CHECK(oracle::divisors(12) == 6);
  CHECK(build_tables(5, {}).r2[5] == 8);
  CHECK(oracle::sum_two_squares(5) == 8);
  CHECK(build_tables(4, k3).dk.at(3)[4] == 6);
  CHECK(oracle::ordered_factorizations(4, 3) == 6);
}

TEST_CASE("table invariants") {
  const auto& t = tables();
  CHECK(t.d[1] == 1);
  CHECK(t.r2[1] == 4);
  CHECK(t.omega[1] == 0);
  CHECK(t.squarefree[1] == 1);
  for (std::uint64_t n = 2; n <= 3000; ++n) {
    bool sf = false;
    const int w = oracle::distinct_primes(n, sf);
    REQUIRE(t.d[n] == oracle::divisors(n));
    REQUIRE(t.r2[n] == oracle::sum_two_squares(n));
    REQUIRE(t.omega[n] == w);
    REQUIRE(bool(t.squarefree[n]) == sf);
    if (w == 1 && oracle::divisors(n) == 2) REQUIRE(t.d[n] == 2);
  }
  for (std::uint64_t n = 1; n <= 300; ++n) {
    REQUIRE(t.dk.at(3)[n] == oracle::ordered_factorizations(n, 3));
    REQUIRE(t.dk.at(4)[n] == oracle::ordered_factorizations(n, 4));
  }
}

TEST_CASE("d2 table equals d") {
  const int k2[] = {2};
  const auto t = build_tables(5000, k2);
  for (std::uint64_t n = 1; n <= 5000; ++n) REQUIRE(t.dk.at(2)[n] == t.d[n]);
  CHECK(tables().divisor_k(2, 360) == tables().d[360]);
  CHECK(tables().divisor_k(1, 360) == 1);
}

TEST_CASE("squarefree density and divisor average") {
  const auto& t = tables();
  for (std::uint64_t N : {10000ull, 100000ull}) {
    const double count = std::accumulate(t.squarefree.begin() + 1, t.squarefree.begin() + N + 1, 0.0);
    CHECK(count / N >= 0.58);
    CHECK(count / N <= 0.65);
  }
  const auto big = build_tables(1000000, {});
  const double N = 1e6;
  const double s = std::accumulate(big.d.begin() + 1, big.d.end(), 0.0);
  CHECK(s / (N * std::log(N)) >= 0.9);
  CHECK(s / (N * std::log(N)) <= 1.1);
}

TEST_CASE("hyperbola method equals naive sums for x <= 10^4") {
  std::uint64_t naive = 0;
  for (std::uint64_t x = 1; x <= 10000; ++x) {
    naive += oracle::divisors(x);
    REQUIRE(divisor_summatory(x) == naive);
  }
}

TEST_CASE("lattice count equals 1 + sum r2 up to the table limit") {
  const auto& t = tables();
  std::uint64_t acc = 1;
  CHECK(lattice_count(0) == 1);
  for (std::uint64_t x = 1; x <= t.limit; ++x) {
    acc += t.r2[x];
    REQUIRE(lattice_count(x) == acc);
  }
  for (std::uint64_t x : {0ull, 1ull, 2ull, 50ull, 777ull}) CHECK(lattice_count(x) == oracle::lattice_points(x));
}

TEST_CASE("d and r2/4 are multiplicative on coprime pairs") {
  const auto& t = tables();
  auto g = oracle::rng(7);
  std::uniform_int_distribution<std::uint64_t> pick(1, 300);
  int tested = 0;
  while (tested < 500) {
    const std::uint64_t m = pick(g), n = pick(g);
    if (std::gcd(m, n) != 1) continue;
    ++tested;
    REQUIRE(t.d[m * n] == t.d[m] * t.d[n]);
    REQUIRE(4 * t.r2[m * n] == t.r2[m] * t.r2[n]);
  }
}

TEST_CASE("delta_exact examples") {
  // Frozen from the naive-sum oracle with gamma = 0.5772156649.
  const double g = 0.57721566490153286;
  auto naive = [&](double x) {
    std::uint64_t s = 0;
    for (std::uint64_t n = 1; n <= static_cast<std::uint64_t>(x); ++n) s += oracle::divisors(n);
    return static_cast<double>(s) - x * std::log(x) - (2 * g - 1) * x;
  };
  CHECK(delta_exact(1.0) == doctest::Approx(naive(1.0)).epsilon(1e-12));
  CHECK(delta_exact(4.0) == doctest::Approx(naive(4.0)).epsilon(1e-12));
  CHECK(delta_exact(2.5) == doctest::Approx(naive(2.5)).epsilon(1e-12));
  CHECK(std::abs(delta_exact(1.0) - 0.845569) < 1e-6);
  CHECK(std::abs(delta_exact(4.0) - 1.837097) < 1e-6);
  CHECK(std::abs(delta_exact(2.5) - 0.323195) < 1e-6);
  CHECK(delta_exact(4.0, tables()) == delta_exact(4.0));
}

TEST_CASE("delta_exact with tables refuses x past the limit") {
  CHECK(kind_of([] { delta_exact(2e5, tables()); }) == ErrorKind::range);
  CHECK(std::isfinite(delta_exact(2e5)));
}

TEST_CASE("midpoint delta halves the jump") {
  CHECK(delta_midpoint(12.0) == doctest::Approx(delta_exact(12.0) - 3.0).epsilon(1e-14));
  CHECK(delta_midpoint(12.5) == delta_exact(12.5));
}

TEST_CASE("circle_exact examples and origin convention") {
  CHECK(circle_exact(0.0) == 1.0);
  CHECK(std::abs(circle_exact(1.0) - (5 - std::numbers::pi)) < 1e-12);
  CHECK(std::abs(circle_exact(2.0) - (9 - 2 * std::numbers::pi)) < 1e-12);
  CHECK(std::abs(circle_exact(1.0) - 1.858407) < 1e-6);
  CHECK(std::abs(circle_exact(2.0) - 2.716815) < 1e-6);
}

TEST_CASE("residue polynomial") {
  const auto r1 = residue_polynomial(1);
  REQUIRE(r1.coefficients.size() == 1);
  CHECK(r1.coefficients[0] == 1.0);

  const auto r2 = residue_polynomial(2);
  REQUIRE(r2.coefficients.size() == 2);
  CHECK(r2.coefficients[0] == 2 * kEulerGamma - 1);
  CHECK(r2.coefficients[1] == 1.0);

  for (int k : {2, 3, 4}) {
    const auto poly = residue_polynomial(k);
    const auto ref = oracle::residue_coefficients(k);
    REQUIRE(poly.coefficients.size() == static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      INFO("k=" << k << " j=" << j);
      CHECK(std::abs(poly.coefficients[j] - ref[j]) < 1e-8);
    }
  }
  CHECK(kind_of([] { residue_polynomial(5); }) == ErrorKind::unsupported);
}

TEST_CASE("k = 2 residue reproduces the divisor main term exactly") {
  auto g = oracle::rng(11);
  for (int i = 0; i < 500; ++i) {
    const double x = oracle::uniform(g, 1.0, 99999.0);
    REQUIRE(delta_k_exact(x, 2, tables()) == delta_exact(x));
  }
}

TEST_CASE("delta_k_exact examples") {
  const auto& t = tables();
  CHECK(std::abs(delta_k_exact(4.0, 2, t) - delta_exact(4.0)) <= 1e-12);
  CHECK(delta_k_exact(7.5, 1, t) == doctest::Approx(-0.5).epsilon(1e-14));

  const auto ref = oracle::residue_coefficients(3);
  std::uint64_t s = 0;
  for (std::uint64_t n = 1; n <= 10; ++n) s += oracle::ordered_factorizations(n, 3);
  const double L = std::log(10.0);
  const double main = 10.0 * (ref[0] + ref[1] * L + ref[2] * L * L);
  CHECK(std::abs(delta_k_exact(10.0, 3, t) - (static_cast<double>(s) - main)) < 1e-6);

  const auto no_k = build_tables(100, {});
  CHECK(kind_of([&] { delta_k_exact(10.0, 3, no_k); }) == ErrorKind::config);
}

TEST_CASE("sieve refuses impossible limits") {
  CHECK(kind_of([] { build_tables(0, {}); }) == ErrorKind::capacity);
  SieveLimits tiny;
  tiny.max_bytes = 1000;
  CHECK(kind_of([&] { build_tables(10000, {}, tiny); }) == ErrorKind::capacity);
}

TEST_CASE("table cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rlab_cache_test";
  std::filesystem::remove_all(dir);
  const int ks[] = {3};
  const auto path = cache_path(dir, 5000, ks);
  CHECK(path.filename() == "tables_N5000_k3.bin");

  const auto built = load_or_build_tables(dir, 5000, ks);
  REQUIRE(std::filesystem::exists(path));
  const auto loaded = load_tables(path);
  CHECK(loaded.limit == built.limit);
  CHECK(loaded.d == built.d);
  CHECK(loaded.r2 == built.r2);
  CHECK(loaded.omega == built.omega);
  CHECK(loaded.squarefree == built.squarefree);
  CHECK(loaded.dk == built.dk);

  {
    std::ifstream f(path, std::ios::binary);
    char magic[4];
    f.read(magic, 4);
    CHECK(std::string(magic, 4) == "RLAB");
  }
  const auto bad = dir / "bad.bin";
  {
    std::ofstream f(bad, std::ios::binary);
    f << "NOPE";
  }
  CHECK(kind_of([&] { load_tables(bad); }) == ErrorKind::config);
  std::filesystem::resize_file(path, 40);
  CHECK(kind_of([&] { load_tables(path); }) == ErrorKind::config);
  std::filesystem::remove_all(dir);
}
