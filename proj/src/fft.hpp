#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>

namespace spectral_causal::detail {

// Unitary real-input DFT of fixed length (1/sqrt(N) both directions).
// Not shareable across threads; create one per worker.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  // Writes all N bins, filling k > N/2 by conjugate symmetry.
  void forward(const double* in, std::complex<double>* out);
  // Reads bins 0..N/2 (bins 0 and N/2 must be real) and writes N samples.
  void inverse(const std::complex<double>* half, double* out);

 private:
  std::size_t n_;
  double scale_;
  double* real_buf_;
  fftw_complex* spec_buf_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace spectral_causal::detail
