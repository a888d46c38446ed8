#pragma once

// The resonator R(x) = sum_{u in N[M]} r(u) e^{iux}, r(u) = e^{-u/(2 alpha)},
// over a rationally independent frequency set M, in both of its forms: the
// Euler product over M and the weight-truncated support expansion.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlab/arith.hpp"
#include "rlab/ddouble.hpp"
#include "rlab/series.hpp"

namespace rlab {

// Which interval [C1 alpha, 2 alpha] the members of M are drawn from: the
// integers n themselves, or their frequencies lambda_n.
enum class SelectionScale { index, frequency };

struct Generator {
  std::uint64_t n = 0;
  double frequency = 0.0;
  DDouble cycles;  // frequency / (2 pi)
};

struct ResonatorConfig {
  double alpha = 0.0;
  double c1 = 1.0;
  double lambda_param = 1.0;
  SeriesKind variant = SeriesKind::divisor;
  int k = 0;  // piltz order
  SelectionScale scale = SelectionScale::index;
  std::vector<Generator> frequency_set;  // ascending frequency
  double support_epsilon = 1e-6;

  std::size_t size() const { return frequency_set.size(); }
  double weight(double u) const;  // r(u)
  std::string variant_label() const;
  // All frequencies in [C1 alpha, 2 alpha], as the sup and mean-square bounds
  // on R assume.
  bool bound_hypotheses_hold() const;
  // exp(2 |M| / C1).
  double sup_bound() const;
  std::vector<std::uint64_t> n_list() const;
};

// floor(lambda log log alpha), natural logarithms.
int prime_factor_target(double alpha, double lambda_param);

// lambda_n for a variant: 4 pi sqrt n, 2 pi sqrt n, or 2 pi k n^{1/k}; in cycles.
DDouble variant_cycles(SeriesKind variant, int k, std::uint64_t n);

ResonatorConfig build_frequency_set(double alpha, double lambda_param, double c1,
                                    SeriesKind variant, const ArithTables& tables, int k = 0,
                                    SelectionScale scale = SelectionScale::index);

// Config over explicitly given frequencies (labelled 1..|M|).
ResonatorConfig make_resonator(double alpha, double c1, std::span<const double> frequencies,
                               double support_epsilon = 1e-6);

// alpha / sqrt(log log alpha) * (log alpha)^{lambda - 1 - lambda log lambda}, with
// an extra -lambda log 2 in the exponent for the circle variant.
double estimate_M(double alpha, double lambda_param, SeriesKind variant = SeriesKind::divisor);

struct SupportElement {
  double frequency = 0.0;
  DDouble cycles;
  double weight = 1.0;
  std::uint32_t degree = 0;
  std::int64_t parent = -1;      // element this one extends, -1 for u = 0
  std::uint32_t generator = 0;   // generator added to the parent
};

struct ResonatorSupport {
  double alpha = 0.0;
  double epsilon = 0.0;
  std::vector<SupportElement> elements;  // ascending frequency, elements[0] is u = 0
  std::uint32_t generation_degree = 0;
  double full_mass = 1.0;                // prod (1 - r(lambda))^{-1} = R(0)

  std::size_t size() const { return elements.size(); }
  double retained_mass() const;
  // Sum of the weights left out, an upper bound for |product - sum| at any x.
  double tail_bound() const;
  // Exponent vector of an element over the generators.
  std::vector<std::uint32_t> exponents(std::size_t index, std::size_t generators) const;
};

ResonatorSupport expand_support(const ResonatorConfig& config,
                                std::size_t cap = std::size_t{4} << 20);

std::complex<double> eval_resonator_product(const ResonatorConfig& config, double x);
std::complex<double> eval_resonator_sum(const ResonatorSupport& support, double x);

nlohmann::json resonator_json(const ResonatorConfig& config);
void write_support_csv(const ResonatorSupport& support, std::ostream& os);

}  // namespace rlab
