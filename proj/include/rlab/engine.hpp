#pragma once

// The resonance machinery on a finite exponential sum: the Gaussian-weighted
// mean square I2 of the resonator, the main part of I1, the predicted lower
// bound with its error budget, maximum scans over x and growth reports.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rlab/resonator.hpp"
#include "rlab/series.hpp"

namespace rlab {

struct EngineParams {
  double X = 0.0;
  double a1 = 3.0;
  double a2 = 1.5;
  double a3 = 1.0;
  double a4 = 7.0 / 8.0;
  double c_param = 1.0;

  // Exponents used for the divisor and circle series (a4 = 7/8) or the
  // Piltz series (a1 = 8/5, a4 = 9/10).
  static EngineParams for_variant(double X, SeriesKind variant);
  void validate() const;
  double y1() const;
  double y2() const;
  // (Y1 / 2, 2 a2^2 X^a2 (log X)^2).
  std::pair<double, double> scan_window() const;
};

// (1/C) (log X) (log log X)^{1 - l + l log l [+ l log 2 for circle]} (log log log X)^{1/2}.
double alpha_recipe(double X, double lambda_param, double c_param,
                    SeriesKind variant = SeriesKind::divisor);

// sqrt(2 pi) Y2 sum_{u,v} r(u) r(v) exp(-(u-v)^2 Y2^2 / 2), pairs with
// |u - v| Y2 > 40 dropped.
double compute_I2(const ResonatorSupport& support, double Y2);

// (1/2) sum_{lambda_n in M} a_n w(lambda_n) r(lambda_n).
double i1_main_coefficient(const ExpSumSpec& spec, const ResonatorConfig& config);
// The main term of I1: i1_main_coefficient * I2.
double compute_I1_main(const ExpSumSpec& spec, const ResonatorConfig& config,
                       const ResonatorSupport& support, double Y2);

struct LowerBoundPrediction {
  double main = 0.0;            // (pi / 4e) sum_{M} a_n
  double resonator_error = 0.0; // X^{a3-a2} e^{2|M|/C1} sum_{lambda_n <= 4 alpha} a_n
  double tail_error = 0.0;      // X^{-a4} / alpha * sum_n a_n
  double sum_M = 0.0;
  bool premise_holds = true;    // r(lambda_n) >= 1/e on M, i.e. lambda_n <= 2 alpha

  double total_error() const { return resonator_error + tail_error; }
};

LowerBoundPrediction predicted_lower_bound(const ExpSumSpec& spec, const ResonatorConfig& config,
                                           const EngineParams& params);

// Alpha and frequency set from the recipe, with alpha shrunk by 10% at a time
// until e^{2|M|/C1} <= X^{1/32}.  When the set empties first, the last
// nonempty set is kept and budget_met is false.
struct RecipeChoice {
  double alpha = 0.0;
  double c_param = 1.0;   // alpha_recipe(X, lambda, 1) / alpha
  ResonatorConfig config;
  bool budget_met = false;
  int shrink_steps = 0;
};

RecipeChoice choose_resonator(const EngineParams& params, double lambda_param, double c1,
                              SeriesKind variant, const ArithTables& tables, int k = 0,
                              SelectionScale scale = SelectionScale::index);

struct ScanOptions {
  unsigned workers = 1;
  std::size_t candidates = 100;
  GridMethod method = GridMethod::automatic;  // automatic: direct up to 2e8 term-points
  std::size_t block_size = std::size_t{1} << 20;
};

struct ScanResult {
  double x_star = 0.0;
  double value = 0.0;           // |F(x_star)|
  int sign = 0;                 // sign of F(x_star)
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  int refinement_depth = 0;
  double baseline_rms = 0.0;    // sqrt(sum a_n^2 / 2)
  std::uint64_t samples = 0;    // grid points
  double best_grid_value = 0.0;
  GridMethod method = GridMethod::direct;
};

double baseline_rms(const ExpSumSpec& spec);

ScanResult scan_max(const ExpSumSpec& spec, double lo, double hi, unsigned workers = 1);
ScanResult scan_max(const ExpSumSpec& spec, double lo, double hi, const ScanOptions& options);

struct GrowthTarget {
  double e_log = 0.0;
  double e_loglog = 0.0;
  double e_logloglog = 0.0;
  std::string label;

  static GrowthTarget divisor();
  // Circle problem: the stated log log exponent (3/4)(2^{4/3} - 1), and the
  // one the lambda = 2^{1/3} construction actually gives, (3/4)(2^{1/3} - 1).
  static GrowthTarget circle_stated();
  static GrowthTarget circle_derived();
  static GrowthTarget piltz(int k);
  static GrowthTarget null_target();

  // (log X)^e1 (log log X)^e2 (log log log X)^e3.
  double value(double X) const;
};

struct GrowthRow {
  double X = 0.0;
  double value = 0.0;
  double target = 0.0;
  double ratio = 0.0;
};

struct GrowthReport {
  GrowthTarget target;
  std::vector<GrowthRow> rows;
  double slope = 0.0;  // least-squares slope of log(value) on log log X

  nlohmann::json to_json() const;
};

GrowthReport growth_report(std::span<const std::pair<double, ScanResult>> results,
                           const GrowthTarget& target);

// CSV "X,x_star,value,baseline_rms,ratio_to_target".
void write_scan_csv(std::span<const std::pair<double, ScanResult>> results,
                    const GrowthTarget& target, std::ostream& os);

}  // namespace rlab
