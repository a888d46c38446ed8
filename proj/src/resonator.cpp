#include "rlab/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <queue>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;

bool all_factors_one_mod_four(std::uint64_t n, const ArithTables& t) {
  // For squarefree n, r2(n) = 4 * 2^omega(n) exactly when n is odd and every
  // prime factor is 1 mod 4.
  return t.squarefree[n] && (t.r2[n] == (4u << t.omega[n]));
}

// Range of n whose frequency lies in [lo, hi].
std::pair<double, double> index_range_for_frequency(SeriesKind variant, int k, double lo,
                                                    double hi) {
  switch (variant) {
    case SeriesKind::divisor: {
      const double s = 4.0 * kPi;
      return {std::pow(lo / s, 2.0), std::pow(hi / s, 2.0)};
    }
    case SeriesKind::circle: {
      const double s = 2.0 * kPi;
      return {std::pow(lo / s, 2.0), std::pow(hi / s, 2.0)};
    }
    case SeriesKind::piltz: {
      const double s = 2.0 * kPi * k;
      return {std::pow(lo / s, k), std::pow(hi / s, k)};
    }
    default: fail(ErrorKind::argument, "frequency selection needs an arithmetic variant");
  }
}

}  // namespace

double ResonatorConfig::weight(double u) const { return std::exp(-u / (2.0 * alpha)); }

std::string ResonatorConfig::variant_label() const {
  switch (variant) {
    case SeriesKind::divisor: return "divisor";
    case SeriesKind::circle: return "circle";
    case SeriesKind::piltz: return "piltz-" + std::to_string(k);
    default: return "synthetic";
  }
}

bool ResonatorConfig::bound_hypotheses_hold() const {
  return std::all_of(frequency_set.begin(), frequency_set.end(), [&](const Generator& g) {
    return g.frequency >= c1 * alpha && g.frequency <= 2.0 * alpha;
  });
}

double ResonatorConfig::sup_bound() const {
  return std::exp(2.0 * static_cast<double>(size()) / c1);
}

std::vector<std::uint64_t> ResonatorConfig::n_list() const {
  std::vector<std::uint64_t> out;
  for (const auto& g : frequency_set) out.push_back(g.n);
  return out;
}

int prime_factor_target(double alpha, double lambda_param) {
  if (!(alpha > std::numbers::e)) return 0;
  return static_cast<int>(std::floor(lambda_param * std::log(std::log(alpha))));
}

DDouble variant_cycles(SeriesKind variant, int k, std::uint64_t n) {
  const auto nd = static_cast<double>(n);
  switch (variant) {
    case SeriesKind::divisor: return DDouble(2.0) * dd::sqrt(nd);
    case SeriesKind::circle: return dd::sqrt(nd);
    case SeriesKind::piltz: return DDouble(static_cast<double>(k)) * dd::root(nd, k);
    default: fail(ErrorKind::argument, "variant has no arithmetic frequencies");
  }
}

ResonatorConfig build_frequency_set(double alpha, double lambda_param, double c1,
                                    SeriesKind variant, const ArithTables& tables, int k,
                                    SelectionScale scale) {
  if (!(alpha > 0.0)) fail(ErrorKind::argument, "alpha must be positive");
  if (!(c1 > 0.0 && c1 < 2.0)) fail(ErrorKind::argument, "C1 must lie in (0, 2)");
  if (!(lambda_param > 0.0)) fail(ErrorKind::argument, "lambda must be positive");
  if (variant == SeriesKind::piltz && k < 2) fail(ErrorKind::argument, "piltz needs k >= 2");
  if (variant != SeriesKind::divisor && variant != SeriesKind::circle &&
      variant != SeriesKind::piltz) {
    fail(ErrorKind::argument, "resonator variant must be divisor, circle or piltz");
  }
  const int target = prime_factor_target(alpha, lambda_param);
  if (target < 1) {
    fail(ErrorKind::domain, "floor(lambda log log alpha) must be >= 1 (alpha too small)");
  }

  double lo = c1 * alpha;
  double hi = 2.0 * alpha;
  if (scale == SelectionScale::frequency) {
    std::tie(lo, hi) = index_range_for_frequency(variant, k, lo, hi);
  }
  const auto n_lo = static_cast<std::uint64_t>(std::max(1.0, std::ceil(lo * (1 - 1e-15))));
  const auto n_hi = static_cast<std::uint64_t>(std::floor(hi * (1 + 1e-15)));
  if (n_hi > tables.limit) {
    fail(ErrorKind::range, "frequency set needs tables up to " + std::to_string(n_hi));
  }

  ResonatorConfig cfg;
  cfg.alpha = alpha;
  cfg.c1 = c1;
  cfg.lambda_param = lambda_param;
  cfg.variant = variant;
  cfg.k = k;
  cfg.scale = scale;
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    if (!tables.squarefree[n] || tables.omega[n] != target) continue;
    if (variant == SeriesKind::circle && !all_factors_one_mod_four(n, tables)) continue;
    Generator g;
    g.n = n;
    g.cycles = variant_cycles(variant, k, n);
    g.frequency = (dd::kTwoPi * g.cycles).hi;
    if (scale == SelectionScale::frequency &&
        (g.frequency < c1 * alpha || g.frequency > 2.0 * alpha)) {
      continue;
    }
    cfg.frequency_set.push_back(g);
  }
  if (cfg.frequency_set.empty()) {
    fail(ErrorKind::empty_resonator, "no integers qualify for the resonating set");
  }
  return cfg;
}

ResonatorConfig make_resonator(double alpha, double c1, std::span<const double> frequencies,
                               double support_epsilon) {
  if (!(alpha > 0.0)) fail(ErrorKind::argument, "alpha must be positive");
  if (frequencies.empty()) fail(ErrorKind::empty_resonator, "resonator needs a generator");
  ResonatorConfig cfg;
  cfg.alpha = alpha;
  cfg.c1 = c1;
  cfg.variant = SeriesKind::synthetic;
  cfg.support_epsilon = support_epsilon;
  std::vector<double> sorted(frequencies.begin(), frequencies.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i] > 0.0)) fail(ErrorKind::argument, "generator frequencies must be positive");
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      fail(ErrorKind::argument, "generator frequencies must be distinct");
    }
    cfg.frequency_set.push_back({i + 1, sorted[i], DDouble(sorted[i]) / dd::kTwoPi});
  }
  return cfg;
}

double estimate_M(double alpha, double lambda_param, SeriesKind variant) {
  if (!(alpha >= std::exp(std::numbers::e))) fail(ErrorKind::domain, "estimate needs alpha >= e^e");
  double exponent = lambda_param - 1.0 - lambda_param * std::log(lambda_param);
  if (variant == SeriesKind::circle) exponent -= lambda_param * std::log(2.0);
  const double log_alpha = std::log(alpha);
  return alpha / std::sqrt(std::log(log_alpha)) * std::pow(log_alpha, exponent);
}

double ResonatorSupport::retained_mass() const {
  double s = 0.0;
  for (const auto& e : elements) s += e.weight;
  return s;
}

double ResonatorSupport::tail_bound() const { return std::max(0.0, full_mass - retained_mass()); }

std::vector<std::uint32_t> ResonatorSupport::exponents(std::size_t index,
                                                       std::size_t generators) const {
  std::vector<std::uint32_t> e(generators, 0);
  for (auto i = static_cast<std::int64_t>(index); i > 0; i = elements[i].parent) {
    ++e.at(elements[i].generator);
  }
  return e;
}

ResonatorSupport expand_support(const ResonatorConfig& config, std::size_t cap) {
  if (config.frequency_set.empty()) fail(ErrorKind::empty_resonator, "resonator needs a generator");
  const double eps = config.support_epsilon;
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::argument, "support epsilon must lie in (0, 1)");

  ResonatorSupport sup;
  sup.alpha = config.alpha;
  sup.epsilon = eps;
  for (const auto& g : config.frequency_set) sup.full_mass /= (1.0 - config.weight(g.frequency));

  // r(u) >= eps  <=>  u <= 2 alpha log(1/eps), with a few ulp of slack so
  // that eps = r(u) exactly keeps u.
  const double u_max = 2.0 * config.alpha * std::log(1.0 / eps) * (1.0 + 1e-13);
  const std::size_t m = config.frequency_set.size();
  std::vector<double> gen_weight(m);
  for (std::size_t j = 0; j < m; ++j) gen_weight[j] = config.weight(config.frequency_set[j].frequency);

  // Pending entries are "element parent + generator j", popped in ascending
  // frequency (ties by creation order).  Accepting one queues its first
  // child (same j) and its next sibling (j + 1); generators ascend, so both
  // are no smaller, and each exponent vector is reached exactly once with
  // at most two pushes per accepted element.
  struct Pending {
    double frequency;
    std::uint64_t seq;
    std::int64_t parent;
    std::uint32_t generator;
  };
  auto later = [](const Pending& a, const Pending& b) {
    return a.frequency != b.frequency ? a.frequency > b.frequency : a.seq > b.seq;
  };
  std::priority_queue<Pending, std::vector<Pending>, decltype(later)> queue(later);
  std::uint64_t seq = 0;
  auto offer = [&](std::int64_t parent, std::size_t j) {
    if (j >= m) return;
    const double u = sup.elements[static_cast<std::size_t>(parent)].frequency +
                     config.frequency_set[j].frequency;
    if (u <= u_max) queue.push({u, seq++, parent, static_cast<std::uint32_t>(j)});
  };

  sup.elements.push_back(SupportElement{});
  offer(0, 0);
  while (!queue.empty()) {
    const Pending top = queue.top();
    queue.pop();
    if (sup.elements.size() >= cap) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "support exceeds cap of %zu elements; epsilon must be >= %.6g",
                    cap, config.weight(top.frequency));
      fail(ErrorKind::capacity, buf);
    }
    const SupportElement& parent = sup.elements[static_cast<std::size_t>(top.parent)];
    SupportElement e;
    e.frequency = top.frequency;
    e.cycles = parent.cycles + config.frequency_set[top.generator].cycles;
    e.weight = parent.weight * gen_weight[top.generator];
    e.degree = parent.degree + 1;
    e.parent = top.parent;
    e.generator = top.generator;
    const auto index = static_cast<std::int64_t>(sup.elements.size());
    sup.elements.push_back(e);
    sup.generation_degree = std::max(sup.generation_degree, e.degree);
    offer(index, top.generator);
    offer(top.parent, top.generator + 1);
  }
  return sup;
}

std::complex<double> eval_resonator_product(const ResonatorConfig& config, double x) {
  std::complex<double> prod(1.0, 0.0);
  for (const auto& g : config.frequency_set) {
    const double r = config.weight(g.frequency);
    const std::complex<double> factor =
        1.0 - r * std::polar(1.0, dd::phase(g.cycles, x));
    prod /= factor;
  }
  return prod;
}

std::complex<double> eval_resonator_sum(const ResonatorSupport& support, double x) {
  std::complex<double> sum(0.0, 0.0);
  for (const auto& e : support.elements) sum += e.weight * std::polar(1.0, dd::phase(e.cycles, x));
  return sum;
}

nlohmann::json resonator_json(const ResonatorConfig& config) {
  return {{"alpha", config.alpha},
          {"c1", config.c1},
          {"lambda_param", config.lambda_param},
          {"variant", config.variant_label()},
          {"n_list", config.n_list()}};
}

void write_support_csv(const ResonatorSupport& support, std::ostream& os) {
  char buf[80];
  os << "u,weight\n";
  for (const auto& e : support.elements) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", e.frequency, e.weight);
    os << buf;
  }
}

}  // namespace rlab
