#include "rlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "rlab/engine.hpp"
#include "rlab/error.hpp"
#include "rlab/resonator.hpp"
#include "rlab/series.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMaxExamples = 5;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool close(double a, double b, double rel, double abs_tol = 0.0) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_tol;
}

// Stream for a suite: seeded from the run seed and the suite name so suites
// draw the same values whether run alone or under "all".
std::mt19937_64 suite_rng(std::uint64_t seed, const std::string& name) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(std::hash<std::string>{}(name))};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::uint64_t trial_omega(std::uint64_t n, bool& squarefree) {
  std::uint64_t count = 0;
  squarefree = true;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    ++count;
    n /= p;
    if (n % p == 0) squarefree = false;
    while (n % p == 0) n /= p;
  }
  if (n > 1) ++count;
  return count;
}

// ---------------------------------------------------------------------------

SuiteResult arith_suite(const VerifyOptions& opt, const ArithTables& t) {
  SuiteResult s{"arith"};
  auto rng = suite_rng(opt.seed, s.suite);

  CheckGroup hyper{"hyperbola_vs_table"};
  CheckGroup lattice{"lattice_vs_r2"};
  std::uint64_t dsum = 0, rsum = 1;
  for (std::uint64_t x = 1; x <= 20000; ++x) {
    dsum += t.d[x];
    rsum += t.r2[x];
    hyper.expect(divisor_summatory(x) == dsum, fmt("D(%g)", double(x)));
    lattice.expect(lattice_count(x) == rsum, fmt("N(%g)", double(x)));
  }
  s.groups.push_back(hyper);
  s.groups.push_back(lattice);

  CheckGroup mult{"multiplicativity"};
  std::uniform_int_distribution<std::uint64_t> small(1, 1000);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t m = small(rng), n = small(rng);
    if (std::gcd(m, n) != 1) continue;
    mult.expect(t.d[m * n] == t.d[m] * t.d[n], fmt("d(%g*%g)", double(m), double(n)));
    mult.expect(std::uint64_t(t.r2[m * n]) * 4 == std::uint64_t(t.r2[m]) * t.r2[n],
                fmt("r2(%g*%g)", double(m), double(n)));
  }
  s.groups.push_back(mult);

  CheckGroup omega{"omega_squarefree"};
  for (std::uint64_t n = 1; n <= 5000; ++n) {
    bool sf = false;
    const std::uint64_t w = trial_omega(n, sf);
    omega.expect(t.omega[n] == w && bool(t.squarefree[n]) == sf, fmt("n=%g", double(n)));
  }
  s.groups.push_back(omega);

  if (t.has_k(3)) {
    CheckGroup d3{"d3_dirichlet"};
    for (std::uint64_t n = 1; n <= 5000; ++n) {
      std::uint64_t acc = 0;
      for (std::uint64_t m = 1; m <= n; ++m) {
        if (n % m == 0) acc += t.d[m];
      }
      d3.expect(t.divisor_k(3, n) == acc, fmt("d3(%g)", double(n)));
    }
    s.groups.push_back(d3);
  }

  CheckGroup residue{"residue_k2_matches_delta"};
  const auto poly = residue_polynomial(2);
  for (int i = 0; i < 200; ++i) {
    const double x = uniform(rng, 2.0, 1e6);
    const double d = static_cast<double>(divisor_summatory(static_cast<std::uint64_t>(x)));
    residue.expect(close(d - poly.evaluate(x), delta_exact(x), 1e-12, 1e-9), fmt("x=%g", x));
  }
  s.groups.push_back(residue);
  return s;
}

SuiteResult series_suite(const VerifyOptions& opt, const ArithTables& t) {
  SuiteResult s{"series"};
  auto rng = suite_rng(opt.seed, s.suite);

  CheckGroup ex{"truncation_examples"};
  ex.expect(std::abs(truncation_residual(25.0, 5.0, t)) < 0.5, "X=25 x=5");
  ex.expect(std::abs(truncation_residual(100.0, 30.0, t)) < 0.2, "X=100 x=30");
  s.groups.push_back(ex);

  CheckGroup inv{"spec_invariants"};
  const std::vector<ExpSumSpec> specs = {divisor_series_spec(20.0, t), circle_series_spec(20.0, t),
                                         piltz_series_spec(100.0, 3, 10.0, t),
                                         lau_tsang_spec(8.0, t)};
  for (const auto& spec : specs) {
    bool ok = spec.size() == spec.frequencies.size() && spec.size() == spec.cycles.size();
    for (std::size_t i = 0; ok && i < spec.size(); ++i) {
      ok = spec.coefficients[i] >= 0.0 && (i == 0 || spec.frequencies[i] > spec.frequencies[i - 1]);
    }
    ok = ok && spec.phase > -kPi && spec.phase <= kPi;
    inv.expect(ok, spec.label());
  }
  s.groups.push_back(inv);

  CheckGroup ev{"eval_vs_long_double"};
  const auto& spec = specs[0];
  for (int i = 0; i < 50; ++i) {
    const double x = uniform(rng, 1.0, 1000.0);
    long double acc = 0.0L;
    for (std::size_t j = 0; j < spec.size(); ++j) {
      const long double lam = 4.0L * std::numbers::pi_v<long double> *
                              std::sqrt(static_cast<long double>(spec.index_map[j]));
      acc += spec.coefficients[j] * std::cos(lam * x + spec.phase);
    }
    ev.expect(close(eval_spec(spec, x), static_cast<double>(acc), 0.0,
                    1e-9 * spec.coefficient_sum()),
              fmt("x=%g", x));
  }
  s.groups.push_back(ev);

  CheckGroup lt{"lau_tsang_weight"};
  for (double tau : {4.0, 6.0, 8.0}) {
    for (std::uint64_t n = 1; n <= 100; ++n) {
      const double w = lau_tsang_weight(n, tau);
      const bool inside = static_cast<double>(n) < tau * tau;
      lt.expect(w >= 0.0 && w <= 1.0 && (inside || w == 0.0), fmt("n=%g tau=%g", double(n), tau));
    }
  }
  s.groups.push_back(lt);

  CheckGroup ph{"phase_reduction"};
  for (int i = 0; i < 200; ++i) {
    const double b = uniform(rng, -100.0, 100.0);
    const double r = reduce_phase(b);
    ph.expect(r > -kPi && r <= kPi && close(std::cos(r), std::cos(b), 0.0, 1e-12),
              fmt("beta=%g", b));
  }
  s.groups.push_back(ph);
  return s;
}

std::vector<ResonatorConfig> arithmetic_configs(const ArithTables& t) {
  std::vector<ResonatorConfig> out;
  for (double alpha : {50.0, 120.0, 400.0}) {
    for (double lambda : {1.0, 1.5}) {
      for (double c1 : {1.0, 1.5}) {
        for (SeriesKind v : {SeriesKind::divisor, SeriesKind::circle}) {
          for (SelectionScale sc : {SelectionScale::index, SelectionScale::frequency}) {
            try {
              out.push_back(build_frequency_set(alpha, lambda, c1, v, t, 0, sc));
            } catch (const Error& e) {
              if (e.kind() != ErrorKind::empty_resonator && e.kind() != ErrorKind::domain) throw;
            }
          }
        }
      }
    }
  }
  return out;
}

// Small synthetic configs whose frequencies lie in [C1 alpha, 2 alpha].
std::vector<ResonatorConfig> synthetic_configs(std::mt19937_64& rng, int count, int max_m,
                                               double epsilon) {
  std::vector<ResonatorConfig> out;
  for (int i = 0; i < count; ++i) {
    const double alpha = uniform(rng, 5.0, 50.0);
    const double c1 = std::array<double, 3>{0.5, 1.0, 1.5}[i % 3];
    const int m = 1 + i % max_m;
    std::vector<double> f;
    while (static_cast<int>(f.size()) < m) {
      const double v = uniform(rng, std::max(c1, 1.5) * alpha, 2.0 * alpha);
      if (std::find(f.begin(), f.end(), v) == f.end()) f.push_back(v);
    }
    out.push_back(make_resonator(alpha, c1, f, epsilon));
  }
  return out;
}

SuiteResult resonator_suite(const VerifyOptions& opt, const ArithTables& t) {
  SuiteResult s{"resonator"};
  auto rng = suite_rng(opt.seed, s.suite);
  const auto configs = arithmetic_configs(t);

  CheckGroup set{"frequency_set_invariants"};
  for (const auto& c : configs) {
    const int target = prime_factor_target(c.alpha, c.lambda_param);
    std::uint64_t prev = 0;
    for (const auto& g : c.frequency_set) {
      const double scaled = c.scale == SelectionScale::index ? static_cast<double>(g.n) : g.frequency;
      bool ok = t.squarefree[g.n] && t.omega[g.n] == target && g.n > prev &&
                scaled >= c.c1 * c.alpha && scaled <= 2 * c.alpha;
      if (c.variant == SeriesKind::circle) {
        std::uint64_t m = g.n;
        for (std::uint64_t p = 2; p * p <= m; ++p) {
          if (m % p == 0) {
            ok = ok && p % 4 == 1;
            m /= p;
          }
        }
        ok = ok && (m == 1 || m % 4 == 1);
      }
      prev = g.n;
      set.expect(ok, fmt("alpha=%g n=%g", c.alpha, double(g.n)));
    }
  }
  s.groups.push_back(set);

  // The sup bound assumes every frequency lies in [C1 alpha, 2 alpha].
  CheckGroup sup{"sup_bound"};
  for (const auto& c : configs) {
    if (!c.bound_hypotheses_hold()) continue;
    const double bound = c.sup_bound();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      worst = std::max(worst, std::norm(eval_resonator_product(c, uniform(rng, -1e4, 1e4))));
    }
    sup.expect(worst <= bound * (1 + 1e-12), fmt("alpha=%g |R|^2=%g bound=%g", c.alpha, worst, bound));
  }
  s.groups.push_back(sup);

  auto small = synthetic_configs(rng, 6, 4, 1e-6);
  CheckGroup mult{"weight_multiplicative"};
  CheckGroup degree{"degree_weight_bound"};
  CheckGroup tail{"product_vs_sum"};
  for (const auto& c : small) {
    const auto support = expand_support(c);
    for (std::size_t i = 1; i < support.size() && i <= 100; ++i) {
      const auto& e = support.elements[i];
      const auto& p = support.elements[static_cast<std::size_t>(e.parent)];
      const double rg = c.weight(c.frequency_set[e.generator].frequency);
      mult.expect(close(e.weight, p.weight * rg, 1e-12) && close(e.weight, c.weight(e.frequency), 1e-12),
                  fmt("u=%g", e.frequency));
    }
    for (const auto& e : support.elements) {
      degree.expect(e.weight <= std::exp(-c.c1 * e.degree / 2.0) * (1 + 1e-12), fmt("u=%g", e.frequency));
    }
    for (int i = 0; i < 50; ++i) {
      const double x = uniform(rng, -100.0, 100.0);
      const double gap = std::abs(eval_resonator_product(c, x) - eval_resonator_sum(support, x));
      tail.expect(gap <= support.tail_bound() * (1 + 1e-12) + 1e-13, fmt("x=%g gap=%g", x, gap));
    }
  }
  s.groups.push_back(mult);
  s.groups.push_back(degree);
  s.groups.push_back(tail);

  CheckGroup mono{"epsilon_refinement"};
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(uniform(rng, -100.0, 100.0));
  for (auto c : synthetic_configs(rng, 3, 3, 1e-2)) {
    double prev = INFINITY;
    for (double eps = 1e-2; eps >= 1e-7; eps /= 2) {
      c.support_epsilon = eps;
      const auto support = expand_support(c);
      double worst = 0.0;
      for (double x : xs) {
        worst = std::max(worst, std::abs(eval_resonator_product(c, x) - eval_resonator_sum(support, x)));
      }
      mono.expect(worst <= prev * (1 + 1e-9) + 1e-14, fmt("eps=%g worst=%g prev=%g", eps, worst, prev));
      prev = worst;
    }
  }
  s.groups.push_back(mono);
  return s;
}

SuiteResult kernel_suite(const VerifyOptions& opt, const ArithTables&) {
  SuiteResult s{"kernel"};
  auto rng = suite_rng(opt.seed, s.suite);

  CheckGroup sym{"weight_symmetry"};
  CheckGroup scale{"weight_scaling"};
  std::uniform_int_distribution<int> ticks(-51200, 51200);
  for (int i = 0; i < 500; ++i) {
    // Dyadic alpha and t keep 2 alpha +- t exact, so symmetry is exact too.
    const double alpha = std::ldexp(ticks(rng) % 20480 + 20481, -10);
    const double tt = std::ldexp(ticks(rng), -10);
    sym.expect(weight(2 * alpha + tt, alpha) == weight(2 * alpha - tt, alpha), fmt("alpha=%g t=%g", alpha, tt));
    const double c = uniform(rng, 0.1, 10.0);
    const double lam = uniform(rng, -10.0, 100.0);
    scale.expect(close(weight(c * lam, c * alpha), c * weight(lam, alpha), 1e-12, 1e-12),
                 fmt("alpha=%g c=%g", alpha, c));
  }
  s.groups.push_back(sym);
  s.groups.push_back(scale);

  CheckGroup identity{"convolution_identity"};
  CheckGroup cov{"phase_covariance"};
  for (int i = 0; i < 10; ++i) {
    const double alpha = uniform(rng, 0.5, 10.0);
    const int terms = 1 + i % 5;
    std::vector<double> lam;
    while (static_cast<int>(lam.size()) < terms) {
      const double v = uniform(rng, 0.01, 3.99) * alpha;
      if (std::find(lam.begin(), lam.end(), v) == lam.end()) lam.push_back(v);
    }
    std::sort(lam.begin(), lam.end());
    std::vector<double> a;
    for (int j = 0; j < terms; ++j) a.push_back(uniform(rng, 0.1, 1.0));
    const double beta = uniform(rng, -kPi, kPi);
    const auto spec = make_synthetic_spec(a, lam, beta);
    const auto spec0 = make_synthetic_spec(a, lam, 0.0);
    const auto params = KernelParams::defaults(spec, alpha);
    for (int j = 0; j < 2; ++j) {
      const double x = uniform(rng, 0.0, 100.0);
      const auto est = convolve_numeric(spec, x, params);
      const auto exact = convolve_exact(spec, x, alpha, opt.kernel_weight);
      const double gap = std::abs(est.value - exact);
      identity.expect(gap <= est.budget(), fmt("x=%g gap=%g budget=%g", x, gap, est.budget()));
      const auto rotated = std::polar(1.0, spec.phase) * convolve_exact(spec0, x, alpha);
      cov.expect(std::abs(convolve_exact(spec, x, alpha) - rotated) <= 1e-12 * (1 + std::abs(rotated)),
                 fmt("x=%g", x));
    }
  }
  s.extra["convolution_comparisons"] = identity.checks;
  s.groups.push_back(identity);
  s.groups.push_back(cov);
  return s;
}

SuiteResult engine_suite(const VerifyOptions& opt, const ArithTables&) {
  SuiteResult s{"engine"};
  auto rng = suite_rng(opt.seed, s.suite);

  CheckGroup naive{"I2_all_pairs"};
  CheckGroup mono{"I2_monotone"};
  CheckGroup lemma{"I2_lower_bound"};
  for (auto c : synthetic_configs(rng, 6, 3, 1e-3)) {
    const double Y2 = std::max(1e3, 40.0 / (c.c1 * c.alpha));
    const auto support = expand_support(c);
    double direct = 0.0;
    for (const auto& u : support.elements) {
      for (const auto& v : support.elements) {
        const double tt = (u.frequency - v.frequency) * Y2;
        if (std::abs(tt) <= 40.0) direct += u.weight * v.weight * std::exp(-0.5 * tt * tt);
      }
    }
    direct *= std::sqrt(2.0 * kPi) * Y2;
    const double fast = compute_I2(support, Y2);
    naive.expect(close(fast, direct, 1e-12), fmt("I2=%g direct=%g", fast, direct));

    double prev = 0.0;
    for (double eps = 1e-1; eps >= 1e-9; eps /= 10) {
      c.support_epsilon = eps;
      const double v = compute_I2(expand_support(c), Y2);
      mono.expect(v >= prev * (1 - 1e-15), fmt("eps=%g I2=%g prev=%g", eps, v, prev));
      prev = v;
    }
    const double bound = std::sqrt(2.0 * kPi) * Y2 * std::exp(static_cast<double>(c.size()) / 7.0);
    lemma.expect(prev >= bound, fmt("I2=%g bound=%g", prev, bound));
  }
  s.groups.push_back(naive);
  s.groups.push_back(mono);
  s.groups.push_back(lemma);

  CheckGroup main{"main_term_constant"};
  for (const auto& c : synthetic_configs(rng, 6, 5, 1e-3)) {
    std::vector<double> lam, a;
    for (const auto& g : c.frequency_set) {
      lam.push_back(g.frequency);
      a.push_back(uniform(rng, 0.1, 2.0));
    }
    const auto spec = make_synthetic_spec(a, lam, 0.0);
    EngineParams p;
    p.X = 1e3;
    const auto pred = predicted_lower_bound(spec, c, p);
    double reversed = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) reversed += *it;
    main.expect(close(pred.main, kPi / (4 * std::numbers::e) * reversed, 1e-12), fmt("main=%g", pred.main));
  }
  s.groups.push_back(main);

  CheckGroup scan{"scan_refinement"};
  CheckGroup det{"scan_worker_independent"};
  for (int i = 0; i < 4; ++i) {
    std::vector<double> lam, a;
    for (int j = 0; j < 6; ++j) {
      lam.push_back(uniform(rng, 0.5, 20.0));
      a.push_back(uniform(rng, 0.1, 1.0));
    }
    std::sort(lam.begin(), lam.end());
    const auto spec = make_synthetic_spec(a, lam, uniform(rng, -kPi, kPi));
    const auto r1 = scan_max(spec, 0.0, 500.0, 1);
    ScanOptions o;
    o.workers = 3;
    o.block_size = 1000;
    const auto r3 = scan_max(spec, 0.0, 500.0, o);
    scan.expect(r1.value >= r1.best_grid_value, fmt("value=%g grid=%g", r1.value, r1.best_grid_value));
    det.expect(r1.value == r3.value && r1.x_star == r3.x_star, fmt("x1=%g x3=%g", r1.x_star, r3.x_star));
  }
  s.groups.push_back(scan);
  s.groups.push_back(det);

  CheckGroup growth{"growth_null_target"};
  std::vector<std::pair<double, ScanResult>> rows;
  for (double X : {1e3, 1e4, 1e5}) {
    ScanResult r;
    r.value = 1.0;
    rows.push_back({X, r});
  }
  const auto rep = growth_report(rows, GrowthTarget::null_target());
  bool ok = rep.slope == 0.0;
  for (const auto& r : rep.rows) ok = ok && r.ratio == 1.0;
  growth.expect(ok, "null target");
  s.groups.push_back(growth);
  return s;
}

}  // namespace

void CheckGroup::expect(bool ok, const std::string& what) {
  ++checks;
  if (!ok) {
    ++failures;
    if (examples.size() < kMaxExamples) examples.push_back(what);
  }
}

std::uint64_t SuiteResult::checks() const {
  std::uint64_t n = 0;
  for (const auto& g : groups) n += g.checks;
  return n;
}

std::uint64_t SuiteResult::failures() const {
  std::uint64_t n = 0;
  for (const auto& g : groups) n += g.failures;
  return n;
}

nlohmann::json SuiteResult::to_json() const {
  nlohmann::json gs = nlohmann::json::array();
  for (const auto& g : groups) {
    gs.push_back({{"name", g.name}, {"checks", g.checks}, {"failures", g.failures},
                  {"examples", g.examples}});
  }
  nlohmann::json j = {{"suite", suite}, {"passed", passed()}, {"checks", checks()},
                      {"failures", failures()}, {"groups", gs}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"arith", "series", "resonator", "kernel", "engine"};
  return names;
}

std::vector<SuiteResult> run_verify(const std::string& suite, const VerifyOptions& options,
                                    const ArithTables& tables) {
  const auto& names = suite_names();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    fail(ErrorKind::argument, "unknown suite '" + suite + "'");
  }
  std::vector<SuiteResult> out;
  for (const auto& name : names) {
    if (suite != "all" && suite != name) continue;
    if (name == "arith") out.push_back(arith_suite(options, tables));
    if (name == "series") out.push_back(series_suite(options, tables));
    if (name == "resonator") out.push_back(resonator_suite(options, tables));
    if (name == "kernel") out.push_back(kernel_suite(options, tables));
    if (name == "engine") out.push_back(engine_suite(options, tables));
  }
  return out;
}

ArithTables verify_tables() {
  const int ks[] = {3};
  return build_tables(1000000, ks);
}

nlohmann::json verify_summary(const std::string& suite, const std::vector<SuiteResult>& results) {
  std::uint64_t checks = 0, failures = 0;
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& r : results) {
    checks += r.checks();
    failures += r.failures();
    parts.push_back(r.to_json());
  }
  return {{"suite", suite}, {"passed", failures == 0}, {"checks", checks},
          {"failures", failures}, {"suites", parts}};
}

}  // namespace rlab
