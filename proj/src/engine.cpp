#include "rlab/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "rlab/error.hpp"
#include "rlab/kernel.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

// Term of the spec carrying a member of M, or size() when absent.
std::size_t locate_member(const ExpSumSpec& spec, const ResonatorConfig& config,
                          const Generator& g) {
  if (config.variant != SeriesKind::synthetic) return spec.find_index(g.n);
  auto it = std::lower_bound(spec.frequencies.begin(), spec.frequencies.end(),
                             g.frequency * (1.0 - 1e-12));
  if (it != spec.frequencies.end() && std::abs(*it - g.frequency) <= 1e-12 * g.frequency) {
    return static_cast<std::size_t>(it - spec.frequencies.begin());
  }
  return spec.size();
}

std::size_t require_member(const ExpSumSpec& spec, const ResonatorConfig& config,
                           const Generator& g) {
  const std::size_t i = locate_member(spec, config, g);
  if (i == spec.size()) {
    fail(ErrorKind::consistency,
         "resonator member n=" + std::to_string(g.n) + " is missing from the spec");
  }
  return i;
}

struct Candidate {
  double value;
  std::uint64_t j;
};

bool better(const Candidate& a, const Candidate& b) {
  return a.value != b.value ? a.value > b.value : a.j < b.j;
}

void keep_top(std::vector<Candidate>& c, std::size_t k) {
  if (c.size() > k) {
    std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k), c.end(), better);
    c.resize(k);
  }
  std::sort(c.begin(), c.end(), better);
}

// Golden-section search for the maximum of |F| on [a, b], tracking the best
// point seen (starting from x0).
std::pair<double, double> golden_max(const ExpSumSpec& spec, double a, double b, double x0,
                                     double f0, double tol, int& depth) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double best_x = x0;
  double best_f = f0;
  auto f = [&](double x) {
    const double v = std::abs(eval_spec(spec, x));
    if (v > best_f || (v == best_f && x < best_x)) {
      best_f = v;
      best_x = x;
    }
    return v;
  };
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  depth = 0;
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
    ++depth;
  }
  return {best_x, best_f};
}

}  // namespace

EngineParams EngineParams::for_variant(double X, SeriesKind variant) {
  EngineParams p;
  p.X = X;
  if (variant == SeriesKind::piltz) {
    p.a1 = 8.0 / 5.0;
    p.a4 = 9.0 / 10.0;
  }
  return p;
}

void EngineParams::validate() const {
  if (!(X > 1.0) || !std::isfinite(X)) fail(ErrorKind::argument, "X must exceed 1");
  if (!(a1 > a2 && a2 > a3 && a3 > a4 && a4 > 0.0)) {
    fail(ErrorKind::argument, "exponents must satisfy A1 > A2 > A3 > A4 > 0");
  }
  if (!(c_param > 0.0)) fail(ErrorKind::argument, "C must be positive");
}

double EngineParams::y1() const { return std::pow(X, a3); }
double EngineParams::y2() const { return std::pow(X, a2); }

std::pair<double, double> EngineParams::scan_window() const {
  const double L = std::log(X);
  return {y1() / 2.0, 2.0 * a2 * a2 * std::pow(X, a2) * L * L};
}

double alpha_recipe(double X, double lambda_param, double c_param, SeriesKind variant) {
  if (!(X > std::exp(kE))) fail(ErrorKind::domain, "alpha recipe needs X > e^e");
  if (!(lambda_param > 0.0)) fail(ErrorKind::argument, "lambda must be positive");
  if (!(c_param > 0.0)) fail(ErrorKind::argument, "C must be positive");
  double exponent = 1.0 - lambda_param + lambda_param * std::log(lambda_param);
  if (variant == SeriesKind::circle) exponent += lambda_param * std::log(2.0);
  const double l1 = std::log(X);
  const double l2 = std::log(l1);
  const double l3 = std::log(l2);
  return l1 * std::pow(l2, exponent) * std::sqrt(l3) / c_param;
}

double compute_I2(const ResonatorSupport& support, double Y2) {
  if (!(Y2 > 0.0)) fail(ErrorKind::argument, "Y2 must be positive");
  const auto& e = support.elements;
  const double reach = 40.0 / Y2;
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    sum += e[i].weight * e[i].weight;
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const double gap = e[j].frequency - e[i].frequency;
      if (gap > reach) break;
      const double t = gap * Y2;
      sum += 2.0 * e[i].weight * e[j].weight * std::exp(-0.5 * t * t);
    }
  }
  return std::sqrt(2.0 * kPi) * Y2 * sum;
}

double i1_main_coefficient(const ExpSumSpec& spec, const ResonatorConfig& config) {
  double sum = 0.0;
  for (const auto& g : config.frequency_set) {
    const std::size_t i = require_member(spec, config, g);
    sum += spec.coefficients[i] * weight(g.frequency, config.alpha) * config.weight(g.frequency);
  }
  return 0.5 * sum;
}

double compute_I1_main(const ExpSumSpec& spec, const ResonatorConfig& config,
                       const ResonatorSupport& support, double Y2) {
  const double coefficient = i1_main_coefficient(spec, config);
  return coefficient * compute_I2(support, Y2);
}

LowerBoundPrediction predicted_lower_bound(const ExpSumSpec& spec, const ResonatorConfig& config,
                                           const EngineParams& params) {
  params.validate();
  LowerBoundPrediction p;
  for (const auto& g : config.frequency_set) {
    p.sum_M += spec.coefficients[require_member(spec, config, g)];
    if (config.weight(g.frequency) < std::exp(-1.0)) p.premise_holds = false;
  }
  p.main = kPi / (4.0 * kE) * p.sum_M;

  double window_sum = 0.0;
  for (std::size_t i = 0; i < spec.size() && spec.frequencies[i] <= 4.0 * config.alpha; ++i) {
    window_sum += spec.coefficients[i];
  }
  p.resonator_error = std::pow(params.X, params.a3 - params.a2) * config.sup_bound() * window_sum;
  p.tail_error = std::pow(params.X, -params.a4) / config.alpha * spec.coefficient_sum();
  return p;
}

RecipeChoice choose_resonator(const EngineParams& params, double lambda_param, double c1,
                              SeriesKind variant, const ArithTables& tables, int k,
                              SelectionScale scale) {
  params.validate();
  const double alpha0 = alpha_recipe(params.X, lambda_param, 1.0, variant);
  const double budget = std::pow(params.X, 1.0 / 32.0);
  double alpha = alpha_recipe(params.X, lambda_param, params.c_param, variant);

  RecipeChoice choice;
  bool have = false;
  for (int step = 0; step < 400; ++step, alpha *= 0.9) {
    ResonatorConfig cfg;
    try {
      cfg = build_frequency_set(alpha, lambda_param, c1, variant, tables, k, scale);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::empty_resonator && e.kind() != ErrorKind::domain) throw;
      if (!have) throw;
      break;
    }
    have = true;
    choice.alpha = alpha;
    choice.c_param = alpha0 / alpha;
    choice.config = std::move(cfg);
    choice.shrink_steps = step;
    if (choice.config.sup_bound() <= budget) {
      choice.budget_met = true;
      break;
    }
  }
  return choice;
}

double baseline_rms(const ExpSumSpec& spec) {
  double s = 0.0;
  for (double a : spec.coefficients) s += a * a;
  return std::sqrt(0.5 * s);
}

ScanResult scan_max(const ExpSumSpec& spec, double lo, double hi, unsigned workers) {
  ScanOptions options;
  options.workers = workers;
  return scan_max(spec, lo, hi, options);
}

ScanResult scan_max(const ExpSumSpec& spec, double lo, double hi, const ScanOptions& options) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorKind::argument, "scan range must satisfy lo < hi");
  }
  if (spec.empty()) fail(ErrorKind::argument, "scan needs a nonempty spec");
  if (options.candidates == 0) fail(ErrorKind::argument, "scan needs at least one candidate");
  if (options.block_size < 16) fail(ErrorKind::argument, "scan block size too small");

  ScanResult r;
  r.lo = lo;
  r.hi = hi;
  r.step = kPi / (4.0 * spec.max_frequency());
  r.baseline_rms = baseline_rms(spec);
  const double span_points = std::floor((hi - lo) / r.step);
  if (span_points > 1e15) fail(ErrorKind::capacity, "scan grid too large");
  const auto count = static_cast<std::uint64_t>(span_points) + 1;
  r.samples = count;

  GridMethod method = options.method;
  if (method == GridMethod::automatic) {
    method = static_cast<double>(spec.size()) * static_cast<double>(count) <= 2e8
                 ? GridMethod::direct
                 : GridMethod::nufft;
  }
  r.method = method;
  const std::size_t chunk = options.block_size - 2;
  GridEvaluator grid(spec, lo, r.step, method, options.block_size);
  const std::uint64_t blocks = (count + chunk - 1) / chunk;

  // Each block looks one point past both ends, so local maxima at block
  // seams are judged against their true neighbours.
  std::vector<std::vector<Candidate>> found(blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    std::vector<double> buf(options.block_size);
    for (std::uint64_t b; (b = next.fetch_add(1)) < blocks;) {
      try {
        const std::uint64_t first = b * chunk;
        const std::uint64_t last = std::min<std::uint64_t>(count, first + chunk);
        const std::uint64_t from = first == 0 ? 0 : first - 1;
        const std::uint64_t to = std::min<std::uint64_t>(count, last + 1);
        std::span<double> out(buf.data(), to - from);
        grid.evaluate(from, out);
        for (double& v : out) v = std::abs(v);
        std::vector<Candidate> local;
        for (std::uint64_t j = first; j < last; ++j) {
          const double v = out[j - from];
          const bool left_ok = j == 0 || v >= out[j - 1 - from];
          const bool right_ok = j + 1 == count || v >= out[j + 1 - from];
          if (left_ok && right_ok) local.push_back({v, j});
        }
        keep_top(local, options.candidates);
        found[b] = std::move(local);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = blocks;
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(
      options.workers, static_cast<unsigned>(std::min<std::uint64_t>(blocks, 1024))));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<Candidate> all;
  for (auto& f : found) all.insert(all.end(), f.begin(), f.end());
  keep_top(all, options.candidates);

  // Grid values from the fast path are approximate; re-evaluate exactly.
  for (auto& c : all) c.value = std::abs(eval_spec(spec, grid.x_at(c.j)));
  std::sort(all.begin(), all.end(), better);
  r.best_grid_value = all.front().value;

  const double tol = 1e-9 * (hi - lo);
  r.x_star = grid.x_at(all.front().j);
  r.value = all.front().value;
  for (const auto& c : all) {
    const double x0 = grid.x_at(c.j);
    const double a = std::max(lo, x0 - r.step);
    const double b = std::min(hi, x0 + r.step);
    int depth = 0;
    const auto [x, v] = golden_max(spec, a, b, x0, c.value, tol, depth);
    r.refinement_depth = std::max(r.refinement_depth, depth);
    if (v > r.value || (v == r.value && x < r.x_star)) {
      r.value = v;
      r.x_star = x;
    }
  }
  // The right end of the range need not be a grid point.
  const double v_hi = std::abs(eval_spec(spec, hi));
  if (v_hi > r.value) {
    r.value = v_hi;
    r.x_star = hi;
  }
  const double f = eval_spec(spec, r.x_star);
  r.sign = f > 0.0 ? 1 : (f < 0.0 ? -1 : 0);
  return r;
}

GrowthTarget GrowthTarget::divisor() {
  return {0.25, 0.75 * (std::cbrt(16.0) - 1.0), -0.375, "divisor"};
}

GrowthTarget GrowthTarget::circle_stated() {
  return {0.25, 0.75 * (std::cbrt(16.0) - 1.0), -0.375, "circle-stated"};
}

GrowthTarget GrowthTarget::circle_derived() {
  return {0.25, 0.75 * (std::cbrt(2.0) - 1.0), -0.375, "circle-derived"};
}

GrowthTarget GrowthTarget::piltz(int k) {
  if (k < 2) fail(ErrorKind::argument, "piltz target needs k >= 2");
  const double kd = k;
  return {(kd - 1.0) / (2.0 * kd),
          (kd + 1.0) / (2.0 * kd) * (std::pow(kd, 2.0 * kd / (kd + 1.0)) - 1.0),
          -0.5 + (kd - 1.0) / (4.0 * kd), "piltz-" + std::to_string(k)};
}

GrowthTarget GrowthTarget::null_target() { return {0.0, 0.0, 0.0, "null"}; }

double GrowthTarget::value(double X) const {
  auto factor = [](double base, double e) {
    if (e == 0.0) return 1.0;
    if (!(base > 0.0)) fail(ErrorKind::domain, "growth target needs larger X");
    return std::pow(base, e);
  };
  if (!(X > 1.0)) fail(ErrorKind::domain, "growth target needs X > 1");
  const double l1 = std::log(X);
  const double l2 = l1 > 0.0 ? std::log(l1) : 0.0;
  const double l3 = l2 > 0.0 ? std::log(l2) : 0.0;
  return factor(l1, e_log) * factor(l2, e_loglog) * factor(l3, e_logloglog);
}

GrowthReport growth_report(std::span<const std::pair<double, ScanResult>> results,
                           const GrowthTarget& target) {
  std::vector<double> xs;
  for (const auto& [X, _] : results) xs.push_back(X);
  std::sort(xs.begin(), xs.end());
  if (std::unique(xs.begin(), xs.end()) - xs.begin() < 3) {
    fail(ErrorKind::argument, "growth report needs at least 3 distinct X");
  }
  GrowthReport rep;
  rep.target = target;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [X, scan] : results) {
    if (!(X > kE)) fail(ErrorKind::domain, "growth report needs X > e");
    GrowthRow row;
    row.X = X;
    row.value = scan.value;
    row.target = target.value(X);
    row.ratio = row.value / row.target;
    rep.rows.push_back(row);
    const double lx = std::log(std::log(X));
    const double ly = std::log(scan.value);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(rep.rows.size());
  const double denom = n * sxx - sx * sx;
  rep.slope = denom > 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  return rep;
}

nlohmann::json GrowthReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"X", r.X}, {"value", r.value}, {"target", r.target}, {"ratio", r.ratio}});
  }
  return {{"target",
           {{"label", target.label},
            {"e_log", target.e_log},
            {"e_loglog", target.e_loglog},
            {"e_logloglog", target.e_logloglog}}},
          {"rows", rows_json},
          {"slope_log_value_vs_loglog_X", slope}};
}

void write_scan_csv(std::span<const std::pair<double, ScanResult>> results,
                    const GrowthTarget& target, std::ostream& os) {
  char buf[200];
  os << "X,x_star,value,baseline_rms,ratio_to_target\n";
  for (const auto& [X, r] : results) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", X, r.x_star, r.value,
                  r.baseline_rms, r.value / target.value(X));
    os << buf;
  }
}

}  // namespace rlab
