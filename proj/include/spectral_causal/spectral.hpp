#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spectral_causal/model.hpp"
#include "spectral_causal/simulate.hpp"

namespace spectral_causal {

inline constexpr double kRelativeFloor = 1e-8;

// DFT coefficients of every segment. by_bin[k] is R x n: row r holds the
// coefficients of segment r at bin k.
class SpectralEnsemble {
 public:
  SpectralEnsemble(FrequencyGrid grid, std::vector<Eigen::MatrixXcd> by_bin);

  std::size_t num_segments() const { return static_cast<std::size_t>(by_bin_.front().rows()); }
  std::size_t n() const { return static_cast<std::size_t>(by_bin_.front().cols()); }
  const FrequencyGrid& grid() const { return grid_; }
  const Eigen::MatrixXcd& bin(std::size_t k) const { return by_bin_.at(k); }
  Eigen::MatrixXcd& bin(std::size_t k) { return by_bin_.at(k); }
  Complex coeff(std::size_t r, Node i, std::size_t k) const {
    return by_bin_[k](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
  }

 private:
  FrequencyGrid grid_;
  std::vector<Eigen::MatrixXcd> by_bin_;
};

SpectralEnsemble segment_fft(const TimeSeriesPanel& panel);
TimeSeriesPanel inverse_segment_fft(const SpectralEnsemble& ens);

SpectralMatrixField estimate_psd_correlogram(const TimeSeriesPanel& panel, std::size_t max_lag,
                                             const FrequencyGrid& grid);
SpectralMatrixField estimate_psd_ensemble(const SpectralEnsemble& ens);

// 1e-8 times the largest diagonal entry.
double default_floor(const Eigen::MatrixXcd& phi);
// Ridge threshold used at one bin: explicit floor, or the relative default.
double effective_floor(const Eigen::MatrixXcd& phi, std::optional<double> floor);
SpectralMatrixField invert_psd(const SpectralMatrixField& field, std::optional<double> floor = std::nullopt);

// Riemann-sum Fourier coefficient (2 pi / N) sum_k f(w_k) e^{j w_k n}, zero
// outside |n| <= sqrt(N).
Complex fourier_coeff_bv(std::span<const Complex> samples, long long n);

// max |a - b| over all entries and bins divided by max |b|.
double field_relative_error(const SpectralMatrixField& estimate, const SpectralMatrixField& reference);

}  // namespace spectral_causal
