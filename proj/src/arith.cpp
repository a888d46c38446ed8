#include "rlab/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rlab/error.hpp"

namespace rlab {

namespace {

// Stieltjes constants gamma_0..gamma_2 of the Laurent expansion of zeta at 1.
constexpr double kStieltjes[3] = {
    0.57721566490153286061,
    -0.072815845483676724861,
    -0.0096903631928723184845,
};

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::uint32_t ArithTables::divisor_k(int k, std::uint64_t n) const {
  if (k == 1) return 1;
  if (k == 2 && dk.count(2) == 0) return d.at(n);
  auto it = dk.find(k);
  if (it == dk.end()) fail(ErrorKind::config, "no d_k table for k=" + std::to_string(k));
  return it->second.at(n);
}

ArithTables build_tables(std::uint64_t limit, std::span<const int> k_list,
                         const SieveLimits& caps) {
  if (limit == 0) fail(ErrorKind::capacity, "sieve limit must be positive");
  std::vector<int> ks(k_list.begin(), k_list.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks) {
    if (k < 2) fail(ErrorKind::argument, "d_k tables need k >= 2, got " + std::to_string(k));
  }
  // d, r2, dk tables (4 bytes), omega and squarefree (1 byte), plus the
  // transient smallest-prime / remainder arrays of the sieve.
  const std::uint64_t per_entry = 4 + 4 + 2 + 4 * ks.size() + 9;
  if (limit > (caps.max_bytes / per_entry) || limit >= (std::uint64_t{1} << 32)) {
    fail(ErrorKind::capacity, "sieve limit " + std::to_string(limit) +
                                  " exceeds memory cap of " + std::to_string(caps.max_bytes) +
                                  " bytes");
  }

  const std::size_t n1 = static_cast<std::size_t>(limit) + 1;
  ArithTables t;
  t.limit = limit;
  t.d.assign(n1, 0);
  t.r2.assign(n1, 0);
  t.omega.assign(n1, 0);
  t.squarefree.assign(n1, 0);
  for (int k : ks) t.dk[k].assign(n1, 0);

  // Linear sieve: every n >= 2 is n = p^e * rest with p its least prime and
  // gcd(p, rest) = 1, so multiplicative functions follow from rest.
  std::vector<std::uint32_t> least(n1, 0);
  std::vector<std::uint32_t> rest(n1, 0);
  std::vector<std::uint8_t> expo(n1, 0);
  std::vector<std::uint32_t> primes;

  t.d[1] = 1;
  t.r2[1] = 4;
  t.omega[1] = 0;
  t.squarefree[1] = 1;
  for (auto& [k, tab] : t.dk) tab[1] = 1;

  for (std::uint64_t n = 2; n <= limit; ++n) {
    if (least[n] == 0) {
      least[n] = static_cast<std::uint32_t>(n);
      primes.push_back(static_cast<std::uint32_t>(n));
    }
    for (std::uint32_t p : primes) {
      std::uint64_t m = std::uint64_t{p} * n;
      if (p > least[n] || m > limit) break;
      least[m] = p;
    }

    const std::uint32_t p = least[n];
    const std::uint64_t q = n / p;
    if (q % p == 0) {
      expo[n] = static_cast<std::uint8_t>(expo[q] + 1);
      rest[n] = rest[q];
    } else {
      expo[n] = 1;
      rest[n] = static_cast<std::uint32_t>(q);
    }
    const std::uint32_t e = expo[n];
    const std::uint32_t r = rest[n];

    t.d[n] = t.d[r] * (e + 1);
    t.omega[n] = static_cast<std::uint8_t>(t.omega[r] + 1);
    t.squarefree[n] = static_cast<std::uint8_t>(e == 1 && t.squarefree[r]);
    // r2/4 is multiplicative: 1 at p = 2, e + 1 at p = 1 mod 4, and 1 or 0 at
    // p = 3 mod 4 by parity of e.
    std::uint32_t local;
    if (p == 2) {
      local = 1;
    } else if (p % 4 == 1) {
      local = e + 1;
    } else {
      local = (e % 2 == 0) ? 1 : 0;
    }
    t.r2[n] = (t.r2[r] / 4) * local * 4;
    for (auto& [k, tab] : t.dk) {
      tab[n] = tab[r] * static_cast<std::uint32_t>(binomial(e + k - 1, k - 1));
    }
  }
  return t;
}

std::uint64_t isqrt(std::uint64_t x) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(x)));
  while (r > 0 && (r > 0xFFFFFFFFull || r * r > x)) --r;
  while (r + 1 <= 0xFFFFFFFFull && (r + 1) * (r + 1) <= x) ++r;
  return r;
}

std::uint64_t divisor_summatory(std::uint64_t x) {
  const std::uint64_t s = isqrt(x);
  std::uint64_t acc = 0;
  for (std::uint64_t n = 1; n <= s; ++n) acc += 2 * (x / n);
  return acc - s * s;
}

std::uint64_t lattice_count(std::uint64_t x) {
  const std::uint64_t s = isqrt(x);
  // Column a = 0 plus two copies of columns a = 1..s.
  std::uint64_t acc = 2 * s + 1;
  for (std::uint64_t a = 1; a <= s; ++a) acc += 2 * (2 * isqrt(x - a * a) + 1);
  return acc;
}

namespace {

std::uint64_t floor_arg(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorKind::argument, "argument must be >= 0");
  if (x >= 0x1p62) fail(ErrorKind::range, "argument beyond 2^62");
  return static_cast<std::uint64_t>(std::floor(x));
}

double divisor_main_term(double x) { return x * std::log(x) + (2.0 * kEulerGamma - 1.0) * x; }

}  // namespace

double delta_exact(double x) {
  if (!(x > 0.0)) fail(ErrorKind::argument, "delta_exact needs x > 0");
  const std::uint64_t n = floor_arg(x);
  const auto sum = static_cast<long double>(divisor_summatory(n));
  return static_cast<double>(sum - static_cast<long double>(divisor_main_term(x)));
}

double delta_exact(double x, const ArithTables& tables) {
  const double value = delta_exact(x);
  const std::uint64_t n = floor_arg(x);
  if (n > tables.limit) {
    fail(ErrorKind::range, "x = " + std::to_string(x) + " beyond table limit " +
                               std::to_string(tables.limit));
  }
  std::uint64_t naive = 0;
  for (std::uint64_t m = 1; m <= n; ++m) naive += tables.d[m];
  if (naive != divisor_summatory(n)) {
    fail(ErrorKind::consistency, "hyperbola sum disagrees with tables at " + std::to_string(n));
  }
  return value;
}

double delta_midpoint(double x) {
  double value = delta_exact(x);
  const std::uint64_t n = floor_arg(x);
  if (static_cast<double>(n) == x) {
    // d(n) via the hyperbola difference keeps this table-free.
    const std::uint64_t dn = divisor_summatory(n) - divisor_summatory(n - 1);
    value -= 0.5 * static_cast<double>(dn);
  }
  return value;
}

double circle_exact(double x) {
  const std::uint64_t n = floor_arg(x);
  const auto count = static_cast<long double>(lattice_count(n));
  return static_cast<double>(count - std::numbers::pi_v<long double> * x);
}

double MainTermCoefficients::evaluate(double x) const {
  const double log_x = std::log(x);
  double sum = 0.0;
  double x_log_pow = x;
  for (double c : coefficients) {
    sum += c * x_log_pow;
    x_log_pow *= log_x;
  }
  return sum;
}

MainTermCoefficients residue_polynomial(int k) {
  if (k < 1) fail(ErrorKind::argument, "residue polynomial needs k >= 1");
  if (k > 4) fail(ErrorKind::unsupported, "residue polynomial only embedded for k <= 4");

  // With t = s - 1: t*zeta(1+t) = 1 + g0 t - g1 t^2 + (g2/2) t^3 + ...,
  // x^s / s = x e^{t log x} / (1 + t).  The residue of zeta^k x^s/s is the
  // t^{k-1} coefficient of (t zeta)^k / (1+t) * x e^{t log x}.
  const int order = k;  // coefficients t^0..t^{k-1}
  std::vector<double> t_zeta = {1.0, kStieltjes[0], -kStieltjes[1], kStieltjes[2] / 2.0};
  t_zeta.resize(order);

  auto multiply = [order](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(order, 0.0);
    for (int m = 0; m < order; ++m) {
      double acc = 0.0;
      for (int i = 0; i <= m; ++i) acc += a[i] * b[m - i];
      out[m] = acc;
    }
    return out;
  };

  std::vector<double> power(order, 0.0);
  power[0] = 1.0;
  for (int i = 0; i < k; ++i) power = multiply(power, t_zeta);
  std::vector<double> geometric(order);
  for (int m = 0; m < order; ++m) geometric[m] = (m % 2 == 0) ? 1.0 : -1.0;
  // For k = 2 the t^1 term rounds exactly like 2 gamma - 1.
  const std::vector<double> g = multiply(geometric, power);

  MainTermCoefficients out;
  out.k = k;
  out.coefficients.resize(k);
  double factorial = 1.0;
  for (int j = 0; j < k; ++j) {
    if (j > 0) factorial *= j;
    out.coefficients[j] = g[k - 1 - j] / factorial;
  }
  return out;
}

double delta_k_exact(double x, int k, const ArithTables& tables) {
  if (!(x > 0.0)) fail(ErrorKind::argument, "delta_k_exact needs x > 0");
  if (!tables.has_k(k)) fail(ErrorKind::config, "no d_k table for k=" + std::to_string(k));
  const std::uint64_t n = floor_arg(x);
  std::uint64_t sum = 0;
  if (k == 1) {
    sum = n;
  } else {
    if (n > tables.limit) fail(ErrorKind::range, "x beyond table limit");
    for (std::uint64_t m = 1; m <= n; ++m) sum += tables.divisor_k(k, m);
  }
  const double main = residue_polynomial(k).evaluate(x);
  return static_cast<double>(static_cast<long double>(sum) - static_cast<long double>(main));
}

}  // namespace rlab
