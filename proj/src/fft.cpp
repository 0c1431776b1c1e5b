#include "fft.hpp"

#include <cmath>
#include <mutex>
#include <new>

namespace spectral_causal::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n), scale_(1.0 / std::sqrt(static_cast<double>(n))) {
  real_buf_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  spec_buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  if (!real_buf_ || !spec_buf_) throw std::bad_alloc();
  std::lock_guard<std::mutex> lock(planner_mutex());
  int len = static_cast<int>(n);
  fwd_ = fftw_plan_dft_r2c_1d(len, real_buf_, spec_buf_, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(len, spec_buf_, real_buf_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(inv_);
  fftw_free(real_buf_);
  fftw_free(spec_buf_);
}

void RealFft::forward(const double* in, std::complex<double>* out) {
  for (std::size_t t = 0; t < n_; ++t) real_buf_[t] = in[t];
  fftw_execute(fwd_);
  const std::size_t half = n_ / 2;
  for (std::size_t k = 0; k <= half; ++k) out[k] = {spec_buf_[k][0] * scale_, spec_buf_[k][1] * scale_};
  for (std::size_t k = half + 1; k < n_; ++k) out[k] = std::conj(out[n_ - k]);
}

void RealFft::inverse(const std::complex<double>* half, double* out) {
  // c2r overwrites its input, so copy every call.
  for (std::size_t k = 0; k <= n_ / 2; ++k) {
    spec_buf_[k][0] = half[k].real();
    spec_buf_[k][1] = half[k].imag();
  }
  fftw_execute(inv_);
  for (std::size_t t = 0; t < n_; ++t) out[t] = real_buf_[t] * scale_;
}

}  // namespace spectral_causal::detail
