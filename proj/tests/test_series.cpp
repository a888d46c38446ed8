#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "rlab/error.hpp"
#include "rlab/series.hpp"

using namespace rlab;

namespace {

constexpr double kPi = std::numbers::pi;

const ArithTables& tables() {
  static const ArithTables t = [] {
    const int ks[] = {2, 3, 7};
    return build_tables(1000000, ks);
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

ExpSumSpec random_spec(std::mt19937_64& g, int terms, double phase) {
  std::vector<double> a, lam;
  double f = 0.0;
  for (int i = 0; i < terms; ++i) {
    f += oracle::uniform(g, 0.1, 10.0);
    lam.push_back(f);
    a.push_back(oracle::uniform(g, 0.0, 2.0));
  }
  return make_synthetic_spec(a, lam, phase);
}

}  // namespace

TEST_CASE("divisor series examples") {
  const auto s = divisor_series_spec(2.0, tables());
  REQUIRE(s.size() == 8);
  CHECK(s.coefficients[0] == 1.0);
  CHECK(s.frequencies[0] == doctest::Approx(4 * kPi).epsilon(1e-15));
  CHECK(s.phase == -kPi / 4);
  CHECK(s.label() == "divisor");
  CHECK(s.a1 == 3.0);
  CHECK(s.coefficients[3] == doctest::Approx(3.0 / std::pow(2.0, 1.5)).epsilon(1e-15));
  CHECK(std::abs(s.coefficients[3] - 1.060660) < 1e-6);
  CHECK(divisor_series_spec(1.9, tables()).size() == 6);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double n = static_cast<double>(s.index_map[i]);
    CHECK(s.frequencies[i] == doctest::Approx(4 * kPi * std::sqrt(n)).epsilon(1e-15));
    CHECK(s.coefficients[i] == doctest::Approx(oracle::divisors(s.index_map[i]) / std::pow(n, 0.75)));
  }
  // 10^6 is exactly representable and must give 100^3 terms, not one fewer.
  CHECK(divisor_series_spec(100.0, tables()).size() == 1000000);
  const auto small = build_tables(100, {});
  CHECK(kind_of([&] { divisor_series_spec(5.0, small); }) == ErrorKind::range);
}

TEST_CASE("circle series examples") {
  const auto s = circle_series_spec(2.0, tables());
  CHECK(s.coefficients[0] == 4.0);
  CHECK(s.frequencies[0] == doctest::Approx(2 * kPi).epsilon(1e-15));
  CHECK(s.phase == kPi / 4);
  CHECK(s.find_index(3) == s.size());
  CHECK(s.coefficients[s.find_index(2)] == doctest::Approx(4 / std::pow(2.0, 0.75)).epsilon(1e-15));
  CHECK(std::abs(s.coefficients[1] - 2.378414) < 1e-6);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(oracle::sum_two_squares(s.index_map[i]) > 0);
}

TEST_CASE("piltz series examples") {
  const auto s3 = piltz_series_spec(10.0, 3, 5.0, tables());
  CHECK(s3.phase == 0.0);
  CHECK(s3.label() == "piltz-3");
  CHECK(s3.a1 == doctest::Approx(1.6));
  CHECK(s3.size() == 39);  // floor(10^{8/5}) = 39
  const auto s2 = piltz_series_spec(10.0, 2, kPi * kPi, tables());
  CHECK(s2.coefficients[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(std::abs(s2.coefficients[0] - 0.367879) < 1e-6);
  const auto s7 = piltz_series_spec(10.0, 7, 5.0, tables());
  CHECK(s7.phase == doctest::Approx(kPi).epsilon(1e-15));
  for (std::size_t i = 0; i < s3.size(); ++i) {
    const double n = static_cast<double>(s3.index_map[i]);
    CHECK(s3.frequencies[i] == doctest::Approx(6 * kPi * std::cbrt(n)).epsilon(1e-14));
  }
  const auto no_k = build_tables(1000, {});
  CHECK(kind_of([&] { piltz_series_spec(10.0, 3, 5.0, no_k); }) == ErrorKind::config);
}

TEST_CASE("piltz k = 2 coefficients approach the divisor ones as alpha grows") {
  const auto s = piltz_series_spec(10.0, 2, 1e6, tables());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double n = static_cast<double>(s.index_map[i]);
    const double undone = s.coefficients[i] * std::exp(kPi * kPi * n / 1e6);
    CHECK(std::abs(undone - oracle::divisors(s.index_map[i]) / std::pow(n, 0.75)) < 1e-6);
  }
}

TEST_CASE("spec validation") {
  const double a[] = {1.0, 2.0};
  const double lam[] = {2.0, 1.0};
  const double neg[] = {-1.0, 1.0};
  const double ok[] = {1.0, 2.0};
  CHECK(kind_of([&] { make_synthetic_spec(a, lam, 0.0); }) == ErrorKind::argument);
  CHECK(kind_of([&] { make_synthetic_spec(neg, ok, 0.0); }) == ErrorKind::argument);
  CHECK(kind_of([&] { make_synthetic_spec(std::span(a, 1), ok, 0.0); }) == ErrorKind::argument);
  CHECK(make_synthetic_spec(a, ok, 3 * kPi).phase == doctest::Approx(kPi));
  CHECK(reduce_phase(-kPi) == doctest::Approx(kPi));
}

TEST_CASE("eval_spec examples") {
  const double one[] = {1.0};
  CHECK(eval_spec(make_synthetic_spec(one, one, 0.0), 0.0) == 1.0);
  const auto d1 = divisor_series_spec(1.0, tables());
  REQUIRE(d1.size() == 1);
  CHECK(eval_spec(d1, 0.0) == doctest::Approx(std::cos(-kPi / 4)).epsilon(1e-15));
  CHECK(std::abs(eval_spec(d1, 0.0) - 0.707107) < 1e-6);
}

TEST_CASE("eval_spec matches 256-bit evaluation") {
  auto g = oracle::rng(3);
  for (int rep = 0; rep < 40; ++rep) {
    const auto spec = random_spec(g, 5, oracle::uniform(g, -kPi, kPi));
    for (double scale : {1.0, 1e4, 1e8, 1e12}) {
      const double x = oracle::uniform(g, -scale, scale);
      const double ref = oracle::eval_high_precision(spec.coefficients, spec.frequencies, spec.phase, x);
      REQUIRE(std::abs(eval_spec(spec, x) - ref) < 1e-9);
    }
  }
  // Arithmetic frequencies: the reference rebuilds 4 pi sqrt n itself.
  const auto d = divisor_series_spec(10.0, tables());
  for (double x : {3.7, 1234.5678, 9.87654321e8, 1.5e11}) {
    const double ref = oracle::divisor_series_high_precision(d.coefficients, d.index_map, x);
    CHECK(std::abs(eval_spec(d, x) - ref) < 1e-9 * d.coefficient_sum());
  }
}

TEST_CASE("eval_spec rejects phases beyond 2^50") {
  const double one[] = {1.0};
  const auto s = make_synthetic_spec(one, one, 0.0);
  CHECK(kind_of([&] { eval_spec(s, 0x1p51); }) == ErrorKind::range);
}

TEST_CASE("eval_spec is linear under concatenation and bounded by sum a") {
  auto g = oracle::rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const double beta = oracle::uniform(g, -kPi, kPi);
    auto s1 = random_spec(g, 4, beta);
    auto s2 = random_spec(g, 3, beta);
    for (auto& f : s2.frequencies) f += 0.05;  // keep the two sets apart
    s2 = make_synthetic_spec(s2.coefficients, s2.frequencies, beta);
    bool disjoint = true;
    for (double f : s2.frequencies) {
      disjoint = disjoint && std::find(s1.frequencies.begin(), s1.frequencies.end(), f) == s1.frequencies.end();
    }
    if (!disjoint) continue;
    const auto both = concat(s1, s2);
    for (int i = 0; i < 10; ++i) {
      const double x = oracle::uniform(g, -1e3, 1e3);
      REQUIRE(std::abs(eval_spec(both, x) - eval_spec(s1, x) - eval_spec(s2, x)) < 1e-12 * (1 + both.coefficient_sum()));
      REQUIRE(std::abs(eval_spec(both, x)) <= both.coefficient_sum() * (1 + 1e-15));
    }
  }
}

TEST_CASE("phase reduction is periodic in x") {
  // Dyadic periods and x on the same dyadic grid keep x + period exact, so
  // only the phase reduction itself is under test.
  auto g = oracle::rng(9);
  std::uniform_int_distribution<std::int64_t> ticks(1, std::int64_t{1} << 40);
  for (int i = 0; i < 200; ++i) {
    const double period = std::ldexp(static_cast<double>(ticks(g) % (1 << 20) + 1), -20);
    const double one[] = {1.0};
    const double lam[] = {2 * kPi / period};
    const auto s = make_synthetic_spec(one, lam, 0.3);
    const double x = std::ldexp(static_cast<double>(ticks(g)), -20);
    REQUIRE(std::abs(eval_spec(s, x) - eval_spec(s, x + period)) < 1e-9);
  }
}

TEST_CASE("truncation residual examples") {
  CHECK(std::abs(truncation_residual(25.0, 5.0, tables())) < 0.5);
  CHECK(std::abs(truncation_residual(100.0, 30.0, tables())) < 0.2);
  CHECK(kind_of([] { truncation_residual(25.0, 4.0, tables()); }) == ErrorKind::range);
  CHECK(kind_of([] { truncation_residual(25.0, 126.0, tables()); }) == ErrorKind::range);
}

TEST_CASE("truncation residual shrinks with a longer truncation") {
  const auto short_spec = divisor_series_spec(10.0, tables());
  const auto long_spec = divisor_series_spec(20.0, tables());
  auto g = oracle::rng(13);
  double short_sum = 0.0, long_sum = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = oracle::uniform(g, std::sqrt(20.0), std::pow(10.0, 1.5));
    short_sum += std::abs(truncation_residual(short_spec, x));
    long_sum += std::abs(truncation_residual(long_spec, x));
  }
  CHECK(long_sum < short_sum);
}

TEST_CASE("Lau-Tsang parameters and sums") {
  const auto p = LauTsangParams::from_tau(4.0);
  CHECK(p.a > 0.34);
  CHECK(p.a < 0.35);
  CHECK(p.b > 2.03);
  CHECK(p.b < 2.04);
  CHECK(std::abs(p.a - 0.348311) < 1e-6);
  CHECK(std::abs(p.b - 2.030103) < 1e-6);
  CHECK(p.J == 1);
  CHECK(LauTsangParams::from_tau(1e6).J == static_cast<int>(std::floor(2 * std::log(std::log(1e6)))));

  CHECK(lau_tsang_weight(4, 4.0) == 1.0);   // n = tau^2 / 4
  CHECK(lau_tsang_weight(16, 4.0) == 0.0);  // n = tau^2

  // Direct three-term evaluation at tau = 2.
  double q = 0.0, pp = 0.0;
  for (std::uint64_t n = 1; n <= 4; ++n) {
    const double w = std::max(0.0, 1.0 - std::abs(2.0 * std::sqrt(double(n)) / 2.0 - 1.0));
    const double term = w * oracle::divisors(n) / std::pow(double(n), 0.75);
    q += term;
    pp += (n % 2 ? -1.0 : 1.0) * term;
  }
  CHECK(lau_tsang_Q(0.0, 2.0, tables()) == doctest::Approx(q).epsilon(1e-14));
  CHECK(lau_tsang_P(0.0, 2.0, tables()) == doctest::Approx(pp).epsilon(1e-14));
  // Frozen from a 30-digit evaluation of the same three terms.  The commonly
  // quoted 1.931702 and -0.538486 are 1.3e-5 off; they hold only to 2e-5.
  CHECK(std::abs(q - 1.931715) < 1e-6);
  CHECK(std::abs(pp + 0.538473) < 1e-6);
  CHECK(std::abs(q - 1.931702) < 2e-5);
  CHECK(std::abs(pp + 0.538486) < 2e-5);
}

TEST_CASE("P + Q keeps only the even terms") {
  auto g = oracle::rng(17);
  for (double tau : {3.0, 6.5, 10.0}) {
    for (int i = 0; i < 10; ++i) {
      const double x = oracle::uniform(g, 0.0, 50.0);
      double even = 0.0;
      for (std::uint64_t n = 2; n <= static_cast<std::uint64_t>(tau * tau); n += 2) {
        even += lau_tsang_weight(n, tau) * oracle::divisors(n) / std::pow(double(n), 0.75) *
                std::cos(4 * kPi * std::sqrt(double(n)) * x);
      }
      CHECK(lau_tsang_P(x, tau, tables()) + lau_tsang_Q(x, tau, tables()) ==
            doctest::Approx(2 * even).epsilon(1e-10));
    }
  }
}

TEST_CASE("Lau-Tsang relation residual") {
  for (double x : {0.0, 1.0}) {
    const double r = lau_tsang_relation_residual(x, 4.0, tables());
    CHECK(std::isfinite(r));
  }
  const auto small = build_tables(50, {});
  CHECK(kind_of([&] { lau_tsang_relation_residual(1.0, 6.0, small); }) == ErrorKind::range);
}

TEST_CASE("spec export") {
  const auto s = divisor_series_spec(2.0, tables());
  std::ostringstream os;
  write_spec_csv(s, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "n,a,lambda");
  std::getline(is, line);
  CHECK(line.rfind("1,1,12.56637061435917", 0) == 0);
  const auto j = spec_sidecar(s);
  CHECK(j["label"] == "divisor");
  CHECK(j["beta"].get<double>() == -kPi / 4);
  CHECK(j["X"].get<double>() == 2.0);
  CHECK(j["A1"].get<double>() == 3.0);
}

TEST_CASE("grid evaluation agrees with pointwise evaluation") {
  const auto s = divisor_series_spec(30.0, tables());
  const double lo = 123.25, step = kPi / (4 * s.max_frequency());
  GridEvaluator direct(s, lo, step, GridMethod::direct, 4096);
  GridEvaluator fast(s, lo, step, GridMethod::nufft, 4096);
  std::vector<double> a(4096), b(4096), c(4096);
  for (std::size_t first : {std::size_t{0}, std::size_t{4096 * 7 + 13}}) {
    direct.evaluate(first, a);
    fast.evaluate(first, b);
    fast.evaluate(first, c);
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(std::abs(a[i] - b[i]) < 1e-8 * s.coefficient_sum());
      REQUIRE(b[i] == c[i]);
    }
    CHECK(a[5] == eval_spec(s, direct.x_at(first + 5)));
  }
}
