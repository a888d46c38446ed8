// Uniform-grid evaluation of exponential sums.
//
// On a grid x_j = x_b + j h, F(x_j) = Re sum_n c_n e^{i theta_n j} with
// c_n = a_n e^{i(lambda_n x_b + beta)} and theta_n = lambda_n h mod 2 pi, a
// type-1 non-uniform FFT.  The points theta_n are spread onto an oversampled
// periodic grid with the "exponential of semicircle" kernel, transformed, and
// the kernel's Fourier transform is divided out.  Kernel weights depend only
// on the spec and the step, so they are computed once per evaluator.

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "rlab/error.hpp"
#include "rlab/series.hpp"

namespace rlab {

namespace {

constexpr int kKernelWidth = 12;
constexpr double kKernelBeta = 2.30 * kKernelWidth;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double es_kernel(double z) {
  if (std::fabs(z) >= 1.0) return 0.0;
  return std::exp(kKernelBeta * (std::sqrt(1.0 - z * z) - 1.0));
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) fail(ErrorKind::capacity, "fftw_malloc failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

struct GridEvaluator::Nufft {
  std::size_t modes = 0;   // J, outputs per block
  std::size_t fine = 0;    // L = 2J
  std::vector<DDouble> step_cycles;        // lambda_n h / 2pi
  std::vector<std::int64_t> first_cell;    // leftmost fine cell touched by term n
  std::vector<double> weights;             // kKernelWidth kernel values per term
  std::vector<double> deconvolve;          // 2pi / (L phi_hat(k)), k = j - J/2
  fftw_plan plan = nullptr;

  ~Nufft() {
    if (plan != nullptr) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

GridEvaluator::GridEvaluator(const ExpSumSpec& spec, double lo, double step, GridMethod method,
                             std::size_t block_size)
    : spec_(spec), lo_(lo), step_(step), method_(method), block_size_(block_size) {
  if (!(step > 0.0)) fail(ErrorKind::argument, "grid step must be positive");
  if (block_size_ < 64) block_size_ = 64;
  if (method_ == GridMethod::automatic) {
    method_ = spec.size() >= 512 ? GridMethod::nufft : GridMethod::direct;
  }
  if (method_ != GridMethod::nufft) return;

  // Round the block up to a power of two for the transform.
  std::size_t modes = 64;
  while (modes < block_size_) modes <<= 1;
  block_size_ = modes;

  nufft_ = std::make_unique<Nufft>();
  Nufft& nu = *nufft_;
  nu.modes = modes;
  nu.fine = 2 * modes;
  const auto fine = static_cast<double>(nu.fine);
  const std::size_t n_terms = spec.size();
  nu.step_cycles.resize(n_terms);
  nu.first_cell.resize(n_terms);
  nu.weights.resize(n_terms * kKernelWidth);
  for (std::size_t n = 0; n < n_terms; ++n) {
    DDouble t = spec.cycles[n] * DDouble(step);
    DDouble f = dd::frac_centered(t);
    if (f.hi < 0.0) f = f + DDouble(1.0);
    nu.step_cycles[n] = t;
    // Position of theta_n on the fine grid, in cells.
    const double pos = f.hi * fine + f.lo * fine;
    const auto left = static_cast<std::int64_t>(std::ceil(pos - kKernelWidth / 2.0));
    nu.first_cell[n] = left;
    for (int w = 0; w < kKernelWidth; ++w) {
      const double z = (static_cast<double>(left + w) - pos) / (kKernelWidth / 2.0);
      nu.weights[n * kKernelWidth + w] = es_kernel(z);
    }
  }

  // phi(t) = es(t / a) with a = pi w / L; phi_hat(k) = a int_{-1}^{1} es(z) cos(k a z) dz.
  const double half_angle = std::numbers::pi * kKernelWidth / fine;
  nu.deconvolve.resize(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    const double k = static_cast<double>(j) - static_cast<double>(modes / 2);
    auto integrand = [&](double z) { return es_kernel(z) * std::cos(k * half_angle * z); };
    const double hat = half_angle *
                       boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                           integrand, -1.0, 1.0, 8, 1e-14);
    nu.deconvolve[j] = 2.0 * std::numbers::pi / (fine * hat);
  }

  FftwBuffer in(nu.fine);
  FftwBuffer out(nu.fine);
  std::lock_guard<std::mutex> lock(planner_mutex());
  nu.plan = fftw_plan_dft_1d(static_cast<int>(nu.fine), in.data, out.data, FFTW_BACKWARD,
                             FFTW_ESTIMATE);
  if (nu.plan == nullptr) fail(ErrorKind::capacity, "fftw planning failed");
}

GridEvaluator::~GridEvaluator() = default;

void GridEvaluator::evaluate(std::size_t first, std::span<double> out) const {
  if (out.size() > block_size_) fail(ErrorKind::argument, "grid block larger than block size");
  if (method_ == GridMethod::direct) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = eval_spec(spec_, x_at(first + j));
    return;
  }

  const Nufft& nu = *nufft_;
  const double anchor = x_at(first);
  if (!spec_.empty() &&
      !(std::fabs(spec_.max_frequency() * (anchor + step_ * static_cast<double>(out.size()))) <
        0x1p50)) {
    fail(ErrorKind::range, "|lambda_max * x| must stay below 2^50");
  }
  FftwBuffer in(nu.fine);
  FftwBuffer spectrum(nu.fine);
  std::fill_n(reinterpret_cast<double*>(in.data), 2 * nu.fine, 0.0);
  const auto fine = static_cast<std::int64_t>(nu.fine);
  const DDouble half_modes(static_cast<double>(nu.modes / 2));

  for (std::size_t n = 0; n < spec_.size(); ++n) {
    // c'_n = a_n e^{i(lambda_n x_b + beta + theta_n J/2)}: the shift centres
    // the output modes on k = -J/2 .. J/2-1.
    const DDouble cycles =
        spec_.cycles[n] * DDouble(anchor) + nu.step_cycles[n] * half_modes;
    const double angle = (dd::kTwoPi * dd::frac_centered(cycles)).hi + spec_.phase;
    const double re = spec_.coefficients[n] * std::cos(angle);
    const double im = spec_.coefficients[n] * std::sin(angle);
    std::int64_t cell = nu.first_cell[n] % fine;
    if (cell < 0) cell += fine;
    const double* w = &nu.weights[n * kKernelWidth];
    for (int i = 0; i < kKernelWidth; ++i) {
      in.data[cell][0] += re * w[i];
      in.data[cell][1] += im * w[i];
      if (++cell == fine) cell = 0;
    }
  }

  fftw_execute_dft(nu.plan, in.data, spectrum.data);

  const auto half = static_cast<std::int64_t>(nu.modes / 2);
  for (std::size_t j = 0; j < out.size(); ++j) {
    std::int64_t k = static_cast<std::int64_t>(j) - half;
    if (k < 0) k += fine;
    out[j] = spectrum.data[k][0] * nu.deconvolve[j];
  }
}

}  // namespace rlab
