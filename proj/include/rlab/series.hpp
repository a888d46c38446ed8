#pragma once

// Finite exponential sums F(x) = sum_n a_n cos(lambda_n x + beta) and the
// concrete instances built from the lattice point problems: the truncated
// Voronoi series for the divisor and circle problems, the Gaussian-smoothed
// Piltz series, and the Lau-Tsang sums P(x, tau), Q(x, tau).

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlab/arith.hpp"
#include "rlab/ddouble.hpp"

namespace rlab {

enum class SeriesKind { divisor, circle, piltz, synthetic, lau_tsang };

struct ExpSumSpec {
  std::vector<double> coefficients;       // a_n >= 0
  std::vector<double> frequencies;        // lambda_n, strictly increasing
  std::vector<DDouble> cycles;            // lambda_n / (2 pi) in double-double
  std::vector<std::uint64_t> index_map;   // the integer n behind each term
  double phase = 0.0;                     // beta, reduced to (-pi, pi]
  SeriesKind kind = SeriesKind::synthetic;
  int k = 0;                              // order for piltz specs
  double truncation_X = 0.0;
  double a1 = 0.0;                        // n <= X^a1

  std::size_t size() const { return coefficients.size(); }
  bool empty() const { return coefficients.empty(); }
  std::string label() const;
  double coefficient_sum() const;
  double max_frequency() const { return frequencies.empty() ? 0.0 : frequencies.back(); }
  // Position of the term backed by integer n, or size() when absent.
  std::size_t find_index(std::uint64_t n) const;
};

// Reduces an angle to (-pi, pi].
double reduce_phase(double beta);

// Builds a spec from explicit coefficients and frequencies, validating the
// ExpSumSpec invariants.  index_map defaults to 1..size.
ExpSumSpec make_synthetic_spec(std::span<const double> coefficients,
                               std::span<const double> frequencies, double phase,
                               std::span<const std::uint64_t> index_map = {});

// Merge of two specs with the same phase and disjoint frequencies.
ExpSumSpec concat(const ExpSumSpec& first, const ExpSumSpec& second);

// floor(X^a1), robust to X^a1 landing a rounding error below an integer.
std::uint64_t truncation_length(double X, double a1);

ExpSumSpec divisor_series_spec(double X, const ArithTables& tables);
// Divisor series with an explicit number of terms (desk-scale truncation).
ExpSumSpec divisor_series_terms(std::uint64_t terms, const ArithTables& tables);
ExpSumSpec circle_series_spec(double X, const ArithTables& tables);
ExpSumSpec circle_series_terms(std::uint64_t terms, const ArithTables& tables);
ExpSumSpec piltz_series_spec(double X, int k, double alpha, const ArithTables& tables);
ExpSumSpec piltz_series_terms(std::uint64_t terms, int k, double alpha, const ArithTables& tables);

// sum a_n cos(lambda_n x + beta) with phases reduced in double-double.
double eval_spec(const ExpSumSpec& spec, double x);

// pi sqrt(2) Delta(x^2) / sqrt(x) minus the truncated series at x.  Delta is
// taken at the midpoint of its jump when x^2 is an integer.
double truncation_residual(double X, double x, const ArithTables& tables);
double truncation_residual(const ExpSumSpec& divisor_spec, double x);

struct LauTsangParams {
  double tau = 0.0;
  double a = 0.0;  // 2^{1/4} - 2^{-1/4}
  double b = 0.0;  // 2^{1/4} + 2^{-1/4}
  int J = 1;       // floor(2 log log tau), at least 1

  static LauTsangParams from_tau(double tau);
};

// Triangular weight max{0, 1 - |2 sqrt(n)/tau - 1|}.
double lau_tsang_weight(std::uint64_t n, double tau);
// Weighted terms d(n) n^{-3/4} w(n) of Q(x, tau); P flips the sign of odd n.
ExpSumSpec lau_tsang_spec(double tau, const ArithTables& tables);
double lau_tsang_P(double x, double tau, const ArithTables& tables);
double lau_tsang_Q(double x, double tau, const ArithTables& tables);
// Q(x, tau) - sum_{i,j<=J} a^j b^{-i} P(sqrt2^{j-i} x, sqrt2^{j+i} tau).
double lau_tsang_relation_residual(double x, double tau, const ArithTables& tables);

// CSV "n,a,lambda" plus a JSON sidecar {label, beta, X, A1}.
void write_spec_csv(const ExpSumSpec& spec, std::ostream& os);
nlohmann::json spec_sidecar(const ExpSumSpec& spec);

// ---------------------------------------------------------------------------
// Evaluation on uniform grids x_j = lo + j * step.

enum class GridMethod { automatic, direct, nufft };

// Evaluates a spec on a uniform grid, either term by term or through a
// type-1 non-uniform FFT over blocks of the grid.  Each block's values depend
// only on the spec, the grid and the block index, never on the caller's
// thread layout.
class GridEvaluator {
 public:
  GridEvaluator(const ExpSumSpec& spec, double lo, double step, GridMethod method,
                std::size_t block_size = std::size_t{1} << 20);
  ~GridEvaluator();
  GridEvaluator(const GridEvaluator&) = delete;
  GridEvaluator& operator=(const GridEvaluator&) = delete;

  double x_at(std::size_t j) const { return lo_ + static_cast<double>(j) * step_; }
  std::size_t block_size() const { return block_size_; }
  GridMethod method() const { return method_; }

  // Values at j in [first, first + out.size()); out.size() <= block_size().
  void evaluate(std::size_t first, std::span<double> out) const;

 private:
  struct Nufft;
  const ExpSumSpec& spec_;
  double lo_;
  double step_;
  GridMethod method_;
  std::size_t block_size_;
  std::unique_ptr<Nufft> nufft_;
};

}  // namespace rlab
