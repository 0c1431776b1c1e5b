#include "spectral_causal/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "spectral_causal/errors.hpp"
#include "spectral_causal/parallel.hpp"

namespace spectral_causal {

SpectralEnsemble::SpectralEnsemble(FrequencyGrid grid, std::vector<Eigen::MatrixXcd> by_bin)
    : grid_(std::move(grid)), by_bin_(std::move(by_bin)) {
  if (by_bin_.size() != grid_.size()) throw StructuralError("ensemble bin count does not match grid");
  for (const auto& m : by_bin_)
    if (m.rows() != by_bin_.front().rows() || m.cols() != by_bin_.front().cols())
      throw StructuralError("ensemble bins must share shape");
}

SpectralEnsemble segment_fft(const TimeSeriesPanel& panel) {
  if (panel.is_streaming()) throw ArgumentError("segment_fft needs a segmented panel; resegment the stream first");
  const std::size_t N = panel.segment_length();
  if (!is_power_of_two(N)) throw ArgumentError("segment length " + std::to_string(N) + " is not a power of two");
  const std::size_t R = panel.num_segments();
  const std::size_t n = panel.n();
  FrequencyGrid grid = FrequencyGrid::fft(N);
  std::vector<Eigen::MatrixXcd> by_bin(N, Eigen::MatrixXcd(R, n));
  parallel_for(R, [&](std::size_t r) {
    detail::RealFft fft(N);
    std::vector<double> in(N);
    std::vector<Complex> out(N);
    const auto& seg = panel.segment(r);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < N; ++t) in[t] = seg(i, t);
      fft.forward(in.data(), out.data());
      for (std::size_t k = 0; k < N; ++k) by_bin[k](r, i) = out[k];
    }
  });
  return SpectralEnsemble(grid, std::move(by_bin));
}

TimeSeriesPanel inverse_segment_fft(const SpectralEnsemble& ens) {
  const std::size_t N = ens.grid().size();
  const std::size_t R = ens.num_segments();
  const std::size_t n = ens.n();
  std::vector<Eigen::MatrixXd> segs(R, Eigen::MatrixXd(n, N));
  detail::RealFft fft(N);
  std::vector<Complex> half(N / 2 + 1);
  std::vector<double> out(N);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k <= N / 2; ++k) half[k] = ens.coeff(r, i, k);
      half[0].imag(0.0);
      half[N / 2].imag(0.0);
      fft.inverse(half.data(), out.data());
      for (std::size_t t = 0; t < N; ++t) segs[r](i, t) = out[t];
    }
  }
  return TimeSeriesPanel::segmented(std::move(segs));
}

SpectralMatrixField estimate_psd_correlogram(const TimeSeriesPanel& panel, std::size_t max_lag,
                                             const FrequencyGrid& grid) {
  if (!panel.is_streaming()) throw ArgumentError("correlogram needs a streaming panel");
  const std::size_t T = panel.segment_length();
  if (T <= max_lag) throw ArgumentError("correlogram needs T > L");
  const Eigen::MatrixXd& x = panel.segment(0);
  // lagged[k](a, b) = mean of x_a(l + k) x_b(l)
  std::vector<Eigen::MatrixXd> lagged(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    const auto len = static_cast<Eigen::Index>(T - k);
    lagged[k] = x.middleCols(static_cast<Eigen::Index>(k), len) * x.leftCols(len).transpose() / static_cast<double>(len);
  }
  SpectralMatrixField out;
  out.n = panel.n();
  out.phi.resize(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    Eigen::MatrixXcd phi = lagged[0].cast<Complex>();
    for (std::size_t k = 1; k <= max_lag; ++k) {
      Complex e = std::polar(1.0, -grid.omega(b) * static_cast<double>(k));
      phi += lagged[k].cast<Complex>() * e + lagged[k].transpose().cast<Complex>() * std::conj(e);
    }
    out.phi[b] = 0.5 * (phi + phi.adjoint());
  }
  return out;
}

SpectralMatrixField estimate_psd_ensemble(const SpectralEnsemble& ens) {
  SpectralMatrixField out;
  out.n = ens.n();
  out.phi.resize(ens.grid().size());
  const double inv_r = 1.0 / static_cast<double>(ens.num_segments());
  for (std::size_t k = 0; k < ens.grid().size(); ++k) {
    const auto& m = ens.bin(k);
    // sum_r x_r x_r^* with x_r the r-th row as a column vector
    Eigen::MatrixXcd phi = (m.transpose() * m.conjugate()) * inv_r;
    out.phi[k] = 0.5 * (phi + phi.adjoint());
  }
  return out;
}

double default_floor(const Eigen::MatrixXcd& phi) {
  return kRelativeFloor * phi.diagonal().real().maxCoeff();
}

double effective_floor(const Eigen::MatrixXcd& phi, std::optional<double> floor) {
  return floor ? *floor : default_floor(phi);
}

SpectralMatrixField invert_psd(const SpectralMatrixField& field, std::optional<double> floor) {
  SpectralMatrixField out;
  out.n = field.n;
  out.phi.resize(field.phi.size());
  const auto n = static_cast<Eigen::Index>(field.n);
  for (std::size_t k = 0; k < field.phi.size(); ++k) {
    const auto& phi = field.phi[k];
    double f = effective_floor(phi, floor);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi, Eigen::EigenvaluesOnly);
    Eigen::MatrixXcd a = phi;
    if (!(es.eigenvalues().minCoeff() >= f)) {
      a += Eigen::MatrixXcd::Identity(n, n) * std::max(f, std::numeric_limits<double>::min());
      out.flags.push_back(k);
    }
    Eigen::MatrixXcd inv = a.ldlt().solve(Eigen::MatrixXcd::Identity(n, n));
    out.phi[k] = 0.5 * (inv + inv.adjoint());
  }
  return out;
}

Complex fourier_coeff_bv(std::span<const Complex> samples, long long n) {
  const auto N = static_cast<long long>(samples.size());
  if (N == 0) throw ArgumentError("no samples");
  if (n * n > N) return {0.0, 0.0};
  Complex sum(0.0, 0.0);
  for (long long k = 0; k < N; ++k) {
    // reduce n*k mod N first to keep the phase argument small
    long long m = (n * k) % N;
    sum += samples[static_cast<std::size_t>(k)] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(N));
  }
  return sum * (2.0 * std::numbers::pi / static_cast<double>(N));
}

double field_relative_error(const SpectralMatrixField& estimate, const SpectralMatrixField& reference) {
  if (estimate.phi.size() != reference.phi.size() || estimate.n != reference.n)
    throw StructuralError("fields differ in shape");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < reference.phi.size(); ++k) {
    num = std::max(num, (estimate.phi[k] - reference.phi[k]).cwiseAbs().maxCoeff());
    den = std::max(den, reference.phi[k].cwiseAbs().maxCoeff());
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace spectral_causal
