#pragma once

// Fejer-type convolution: integrating F_beta(x+u) against
// (sin(alpha u)/u)^2 e^{-2 i alpha u} isolates a triangular window of
// frequencies around 2 alpha.

#include <complex>
#include <cstddef>

#include "rlab/series.hpp"

namespace rlab {

struct KernelParams {
  double alpha = 1.0;
  double window = 10.0;     // U, quadrature half-width
  double quad_step = 0.1;   // h

  // U = max(10/alpha, 4 sum(a) / tolerance) so the truncation tail is at most
  // tolerance / 2; h = pi / (4 (lambda_max + 2 alpha)).
  static KernelParams defaults(const ExpSumSpec& spec, double alpha, double tolerance = 1e-2);
  // Throws argument errors when an invariant fails for this lambda_max.
  void validate(double lambda_max) const;
};

// (pi/2) max(0, 2 alpha - |lambda - 2 alpha|).
double weight(double lambda, double alpha);

using WeightFn = double (*)(double, double);

// (1/2) e^{i beta} sum a_n w(lambda_n) e^{i lambda_n x}.
std::complex<double> convolve_exact(const ExpSumSpec& spec, double x, double alpha,
                                    WeightFn w = &weight);

struct ConvolutionEstimate {
  std::complex<double> value;
  double tail_bound = 0.0;         // 2 sum(a) / U
  double quadrature_error = 0.0;   // |S_{h/2} - S_h|
  std::size_t nodes = 0;

  double budget() const { return tail_bound + quadrature_error; }
};

// Composite Simpson over [-U, U] at step h/2, with the step-h rule on the
// even nodes as the Richardson comparison.
ConvolutionEstimate convolve_numeric(const ExpSumSpec& spec, double x, const KernelParams& params);

}  // namespace rlab
