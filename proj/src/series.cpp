#include "rlab/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <ostream>
#include <string>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;

DDouble cycles_from_frequency(double lambda) { return DDouble(lambda) / dd::kTwoPi; }

double frequency_from_cycles(DDouble cycles) { return (dd::kTwoPi * cycles).hi; }

void check_invariants(const ExpSumSpec& s) {
  const std::size_t n = s.coefficients.size();
  if (s.frequencies.size() != n || s.cycles.size() != n || s.index_map.size() != n) {
    fail(ErrorKind::argument, "coefficients and frequencies differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s.coefficients[i] >= 0.0) || !std::isfinite(s.coefficients[i])) {
      fail(ErrorKind::argument, "coefficients must be finite and nonnegative");
    }
    if (!(s.frequencies[i] > 0.0) || !std::isfinite(s.frequencies[i])) {
      fail(ErrorKind::argument, "frequencies must be finite and positive");
    }
    if (i > 0 && !(s.frequencies[i] > s.frequencies[i - 1])) {
      fail(ErrorKind::argument, "frequencies must be strictly increasing");
    }
  }
}

void push_term(ExpSumSpec& s, std::uint64_t n, double a, DDouble cycles) {
  s.index_map.push_back(n);
  s.coefficients.push_back(a);
  s.cycles.push_back(cycles);
  s.frequencies.push_back(frequency_from_cycles(cycles));
}

void require_table(std::uint64_t n, const ArithTables& tables) {
  if (n > tables.limit) {
    fail(ErrorKind::range, "series needs tables up to " + std::to_string(n) + ", have " +
                               std::to_string(tables.limit));
  }
}

}  // namespace

std::string ExpSumSpec::label() const {
  switch (kind) {
    case SeriesKind::divisor: return "divisor";
    case SeriesKind::circle: return "circle";
    case SeriesKind::piltz: return "piltz-" + std::to_string(k);
    case SeriesKind::synthetic: return "synthetic";
    case SeriesKind::lau_tsang: return "lau-tsang";
  }
  return "synthetic";
}

double ExpSumSpec::coefficient_sum() const {
  double s = 0.0;
  for (double a : coefficients) s += a;
  return s;
}

std::size_t ExpSumSpec::find_index(std::uint64_t n) const {
  auto it = std::lower_bound(index_map.begin(), index_map.end(), n);
  if (it == index_map.end() || *it != n) return size();
  return static_cast<std::size_t>(it - index_map.begin());
}

double reduce_phase(double beta) {
  double r = std::remainder(beta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

ExpSumSpec make_synthetic_spec(std::span<const double> coefficients,
                               std::span<const double> frequencies, double phase,
                               std::span<const std::uint64_t> index_map) {
  if (coefficients.size() != frequencies.size()) {
    fail(ErrorKind::argument, "coefficients and frequencies differ in length");
  }
  if (!index_map.empty() && index_map.size() != coefficients.size()) {
    fail(ErrorKind::argument, "index map length mismatch");
  }
  ExpSumSpec s;
  s.kind = SeriesKind::synthetic;
  s.phase = reduce_phase(phase);
  s.coefficients.assign(coefficients.begin(), coefficients.end());
  s.frequencies.assign(frequencies.begin(), frequencies.end());
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    s.cycles.push_back(cycles_from_frequency(frequencies[i]));
    s.index_map.push_back(index_map.empty() ? i + 1 : index_map[i]);
  }
  check_invariants(s);
  return s;
}

ExpSumSpec concat(const ExpSumSpec& first, const ExpSumSpec& second) {
  if (first.phase != second.phase) fail(ErrorKind::argument, "concat needs equal phases");
  ExpSumSpec out;
  out.kind = SeriesKind::synthetic;
  out.phase = first.phase;
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t next_index = 1;
  auto take = [&](const ExpSumSpec& s, std::size_t at) {
    out.coefficients.push_back(s.coefficients[at]);
    out.frequencies.push_back(s.frequencies[at]);
    out.cycles.push_back(s.cycles[at]);
    out.index_map.push_back(next_index++);
  };
  while (i < first.size() || j < second.size()) {
    if (j == second.size() || (i < first.size() && first.frequencies[i] < second.frequencies[j])) {
      take(first, i++);
    } else {
      take(second, j++);
    }
  }
  check_invariants(out);
  return out;
}

std::uint64_t truncation_length(double X, double a1) {
  if (!(X > 0.0)) fail(ErrorKind::argument, "X must be positive");
  const long double v = std::pow(static_cast<long double>(X), static_cast<long double>(a1));
  const long double r = std::nearbyint(v);
  if (std::fabs(v - r) <= 1e-12L * std::max(1.0L, v)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::floor(v));
}

ExpSumSpec divisor_series_terms(std::uint64_t terms, const ArithTables& tables) {
  require_table(terms, tables);
  ExpSumSpec s;
  s.kind = SeriesKind::divisor;
  s.phase = -kPi / 4.0;
  s.a1 = 3.0;
  s.truncation_X = std::cbrt(static_cast<double>(terms));
  s.coefficients.reserve(terms);
  for (std::uint64_t n = 1; n <= terms; ++n) {
    const double a = tables.d[n] / std::pow(static_cast<double>(n), 0.75);
    push_term(s, n, a, DDouble(2.0) * dd::sqrt(static_cast<double>(n)));
  }
  return s;
}

ExpSumSpec divisor_series_spec(double X, const ArithTables& tables) {
  if (!(X >= 1.0)) fail(ErrorKind::argument, "divisor series needs X >= 1");
  ExpSumSpec s = divisor_series_terms(truncation_length(X, 3.0), tables);
  s.truncation_X = X;
  return s;
}

ExpSumSpec circle_series_terms(std::uint64_t terms, const ArithTables& tables) {
  require_table(terms, tables);
  ExpSumSpec s;
  s.kind = SeriesKind::circle;
  s.phase = kPi / 4.0;
  s.a1 = 3.0;
  s.truncation_X = std::cbrt(static_cast<double>(terms));
  for (std::uint64_t n = 1; n <= terms; ++n) {
    if (tables.r2[n] == 0) continue;
    const double a = tables.r2[n] / std::pow(static_cast<double>(n), 0.75);
    push_term(s, n, a, dd::sqrt(static_cast<double>(n)));
  }
  return s;
}

ExpSumSpec circle_series_spec(double X, const ArithTables& tables) {
  if (!(X >= 1.0)) fail(ErrorKind::argument, "circle series needs X >= 1");
  ExpSumSpec s = circle_series_terms(truncation_length(X, 3.0), tables);
  s.truncation_X = X;
  return s;
}

ExpSumSpec piltz_series_terms(std::uint64_t terms, int k, double alpha, const ArithTables& tables) {
  if (k < 2) fail(ErrorKind::argument, "piltz series needs k >= 2");
  if (!(alpha > 0.0)) fail(ErrorKind::argument, "piltz smoothing needs alpha > 0");
  if (!tables.has_k(k)) fail(ErrorKind::config, "no d_k table for k=" + std::to_string(k));
  require_table(terms, tables);
  ExpSumSpec s;
  s.kind = SeriesKind::piltz;
  s.k = k;
  s.phase = reduce_phase((k - 3) * kPi / 4.0);
  s.a1 = 8.0 / 5.0;
  s.truncation_X = std::pow(static_cast<double>(terms), 5.0 / 8.0);
  const double power = (k + 1.0) / (2.0 * k);
  for (std::uint64_t n = 1; n <= terms; ++n) {
    const double nd = static_cast<double>(n);
    const double smoothing = std::exp(-kPi * kPi * std::pow(nd / alpha, 2.0 / k));
    const double a = tables.divisor_k(k, n) * std::pow(nd, -power) * smoothing;
    push_term(s, n, a, DDouble(static_cast<double>(k)) * dd::root(nd, k));
  }
  return s;
}

ExpSumSpec piltz_series_spec(double X, int k, double alpha, const ArithTables& tables) {
  if (!(X >= 1.0)) fail(ErrorKind::argument, "piltz series needs X >= 1");
  ExpSumSpec s = piltz_series_terms(truncation_length(X, 8.0 / 5.0), k, alpha, tables);
  s.truncation_X = X;
  return s;
}

double eval_spec(const ExpSumSpec& spec, double x) {
  if (!spec.empty() && !(std::fabs(spec.max_frequency() * x) < 0x1p50)) {
    fail(ErrorKind::range, "|lambda_max * x| must stay below 2^50");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    sum += spec.coefficients[i] * std::cos(dd::phase(spec.cycles[i], x) + spec.phase);
  }
  return sum;
}

double truncation_residual(const ExpSumSpec& spec, double x) {
  if (spec.kind != SeriesKind::divisor) fail(ErrorKind::argument, "residual needs a divisor spec");
  const double X = spec.truncation_X;
  if (!(x >= std::sqrt(X) && x <= std::pow(X, 1.5))) {
    fail(ErrorKind::range, "x outside the uniformity window [sqrt X, X^{3/2}]");
  }
  const double lhs = kPi * std::numbers::sqrt2 * delta_midpoint(x * x) / std::sqrt(x);
  return lhs - eval_spec(spec, x);
}

double truncation_residual(double X, double x, const ArithTables& tables) {
  return truncation_residual(divisor_series_spec(X, tables), x);
}

LauTsangParams LauTsangParams::from_tau(double tau) {
  if (!(tau >= 2.0)) fail(ErrorKind::argument, "Lau-Tsang sums need tau >= 2");
  LauTsangParams p;
  p.tau = tau;
  p.a = std::pow(2.0, 0.25) - std::pow(2.0, -0.25);
  p.b = std::pow(2.0, 0.25) + std::pow(2.0, -0.25);
  p.J = std::max(1, static_cast<int>(std::floor(2.0 * std::log(std::log(tau)))));
  return p;
}

double lau_tsang_weight(std::uint64_t n, double tau) {
  const double w = 1.0 - std::fabs(2.0 * std::sqrt(static_cast<double>(n)) / tau - 1.0);
  return std::max(0.0, w);
}

ExpSumSpec lau_tsang_spec(double tau, const ArithTables& tables) {
  if (!(tau >= 2.0)) fail(ErrorKind::argument, "Lau-Tsang sums need tau >= 2");
  const auto terms = static_cast<std::uint64_t>(std::floor(tau * tau));
  require_table(terms, tables);
  ExpSumSpec s;
  s.kind = SeriesKind::lau_tsang;
  s.phase = 0.0;
  s.truncation_X = tau;
  for (std::uint64_t n = 1; n <= terms; ++n) {
    const double w = lau_tsang_weight(n, tau);
    if (w == 0.0) continue;
    push_term(s, n, w * tables.d[n] / std::pow(static_cast<double>(n), 0.75),
              DDouble(2.0) * dd::sqrt(static_cast<double>(n)));
  }
  return s;
}

namespace {
// P carries the sign (-1)^n, which the nonnegative spec cannot hold.
double eval_lau_tsang(const ExpSumSpec& s, double x, bool alternating) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double sign = (alternating && s.index_map[i] % 2 == 1) ? -1.0 : 1.0;
    sum += sign * s.coefficients[i] * std::cos(dd::phase(s.cycles[i], x));
  }
  return sum;
}
}  // namespace

double lau_tsang_P(double x, double tau, const ArithTables& tables) {
  return eval_lau_tsang(lau_tsang_spec(tau, tables), x, true);
}

double lau_tsang_Q(double x, double tau, const ArithTables& tables) {
  return eval_lau_tsang(lau_tsang_spec(tau, tables), x, false);
}

double lau_tsang_relation_residual(double x, double tau, const ArithTables& tables) {
  const LauTsangParams p = LauTsangParams::from_tau(tau);
  const double largest = std::pow(2.0, p.J) * tau * tau;
  if (largest > static_cast<double>(tables.limit)) {
    fail(ErrorKind::range, "inner P needs tables up to " + std::to_string(largest));
  }
  double rhs = 0.0;
  for (int j = 1; j <= p.J; ++j) {
    for (int i = 1; i <= p.J; ++i) {
      const double coeff = std::pow(p.a, j) * std::pow(p.b, -i);
      rhs += coeff * lau_tsang_P(std::pow(std::numbers::sqrt2, j - i) * x,
                                 std::pow(std::numbers::sqrt2, j + i) * tau, tables);
    }
  }
  return lau_tsang_Q(x, tau, tables) - rhs;
}

void write_spec_csv(const ExpSumSpec& spec, std::ostream& os) {
  char buf[96];
  os << "n,a,lambda\n";
  for (std::size_t i = 0; i < spec.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g\n",
                  static_cast<unsigned long long>(spec.index_map[i]), spec.coefficients[i],
                  spec.frequencies[i]);
    os << buf;
  }
}

nlohmann::json spec_sidecar(const ExpSumSpec& spec) {
  return {{"label", spec.label()},
          {"beta", spec.phase},
          {"X", spec.truncation_X},
          {"A1", spec.a1}};
}

}  // namespace rlab
