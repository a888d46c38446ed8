#include "rlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> fejer_factor(double u, double alpha) {
  const double s = u == 0.0 ? alpha : std::sin(alpha * u) / u;
  return s * s * std::polar(1.0, -2.0 * alpha * u);
}

}  // namespace

KernelParams KernelParams::defaults(const ExpSumSpec& spec, double alpha, double tolerance) {
  if (!(alpha > 0.0)) fail(ErrorKind::argument, "alpha must be positive");
  if (!(tolerance > 0.0)) fail(ErrorKind::argument, "tolerance must be positive");
  KernelParams p;
  p.alpha = alpha;
  p.window = std::max(10.0 / alpha, 4.0 * spec.coefficient_sum() / tolerance);
  p.quad_step = kPi / (4.0 * (spec.max_frequency() + 2.0 * alpha));
  return p;
}

void KernelParams::validate(double lambda_max) const {
  if (!(alpha > 0.0)) fail(ErrorKind::argument, "alpha must be positive");
  if (!(window >= 10.0 / alpha)) fail(ErrorKind::argument, "window must be at least 10/alpha");
  const double h_max = kPi / (4.0 * (lambda_max + 2.0 * alpha));
  if (!(quad_step > 0.0 && quad_step <= h_max * (1.0 + 1e-12))) {
    fail(ErrorKind::argument, "quadrature step too coarse for the spec's largest frequency");
  }
}

double weight(double lambda, double alpha) {
  return 0.5 * kPi * std::max(0.0, 2.0 * alpha - std::abs(lambda - 2.0 * alpha));
}

std::complex<double> convolve_exact(const ExpSumSpec& spec, double x, double alpha, WeightFn w) {
  std::complex<double> sum(0.0, 0.0);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double wi = w(spec.frequencies[i], alpha);
    if (wi == 0.0) continue;
    sum += spec.coefficients[i] * wi * std::polar(1.0, dd::phase(spec.cycles[i], x));
  }
  return 0.5 * std::polar(1.0, spec.phase) * sum;
}

ConvolutionEstimate convolve_numeric(const ExpSumSpec& spec, double x, const KernelParams& params) {
  params.validate(spec.max_frequency());
  const double alpha = params.alpha;
  const double U = params.window;

  // Even number of coarse panels of width <= h; fine grid halves it.
  auto coarse = static_cast<std::size_t>(std::ceil(2.0 * U / params.quad_step));
  coarse += coarse % 2;
  const std::size_t fine = 2 * coarse;
  const double hf = 2.0 * U / static_cast<double>(fine);

  std::complex<double> fine_sum(0.0, 0.0);
  std::complex<double> coarse_sum(0.0, 0.0);
  for (std::size_t j = 0; j <= fine; ++j) {
    // Symmetric node placement keeps u = 0 exactly on the grid.
    const double u = (static_cast<double>(j) - static_cast<double>(coarse)) * hf;
    const std::complex<double> f = eval_spec(spec, x + u) * fejer_factor(u, alpha);
    const double wf = (j == 0 || j == fine) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    fine_sum += wf * f;
    if (j % 2 == 0) {
      const std::size_t jc = j / 2;
      const double wc = (jc == 0 || jc == coarse) ? 1.0 : (jc % 2 ? 4.0 : 2.0);
      coarse_sum += wc * f;
    }
  }
  ConvolutionEstimate est;
  est.value = fine_sum * (hf / 3.0);
  const std::complex<double> coarse_value = coarse_sum * (2.0 * hf / 3.0);
  est.quadrature_error = std::abs(est.value - coarse_value);
  est.tail_bound = 2.0 * spec.coefficient_sum() / U;
  est.nodes = fine + 1;
  return est;
}

}  // namespace rlab
