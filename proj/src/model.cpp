#include "spectral_causal/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "spectral_causal/errors.hpp"

namespace spectral_causal {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

FrequencyGrid::FrequencyGrid(std::size_t num_bins, bool fft_backed) : num_bins_(num_bins), fft_backed_(fft_backed) {
  if (num_bins < 2) throw ArgumentError("frequency grid needs at least 2 bins");
  if (fft_backed && !is_power_of_two(num_bins))
    throw ArgumentError("FFT-backed grid size must be a power of two, got " + std::to_string(num_bins));
}

double FrequencyGrid::omega(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_bins_);
}

std::vector<double> FrequencyGrid::bins() const {
  std::vector<double> out(num_bins_);
  for (std::size_t k = 0; k < num_bins_; ++k) out[k] = omega(k);
  return out;
}

TransferMatrixField TransferMatrixField::zeros(std::size_t n, std::size_t num_bins) {
  TransferMatrixField h;
  h.n = n;
  h.values.assign(num_bins, Eigen::MatrixXcd::Zero(n, n));
  return h;
}

NoisePsd NoisePsd::constant(std::size_t n, std::size_t num_bins, double value) {
  return NoisePsd{Eigen::MatrixXd::Constant(n, num_bins, value)};
}

namespace {

void check_dimensions(const FrequencyGrid& grid, const TransferMatrixField& h, const NoisePsd& noise) {
  if (h.values.size() != grid.size())
    throw StructuralError("transfer field has " + std::to_string(h.values.size()) + " bins, grid has " +
                          std::to_string(grid.size()));
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    if (static_cast<std::size_t>(h.values[k].rows()) != h.n || static_cast<std::size_t>(h.values[k].cols()) != h.n)
      throw StructuralError("transfer matrix at bin " + std::to_string(k) + " is not " + std::to_string(h.n) + "x" +
                            std::to_string(h.n));
  }
  if (static_cast<std::size_t>(noise.diag.rows()) != h.n || static_cast<std::size_t>(noise.diag.cols()) != grid.size())
    throw StructuralError("noise PSD must be nodes x bins");
}

}  // namespace

LdimSpec::LdimSpec(FrequencyGrid grid, TransferMatrixField h, NoisePsd noise, double edge_tolerance)
    : grid_(std::move(grid)), h_(std::move(h)), noise_(std::move(noise)) {
  check_dimensions(grid_, h_, noise_);
  graph_ = graph_from_transfer(h_, edge_tolerance);
}

double condition_number(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

ValidationReport validate_ldim(const LdimSpec& spec) {
  check_dimensions(spec.grid(), spec.h(), spec.noise());
  ValidationReport report;
  const std::size_t n = spec.n();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t k = 0; k < spec.grid().size(); ++k) {
    const auto& hk = spec.h().values[k];
    for (Node i = 0; i < n; ++i)
      if (hk(i, i) != Complex(0.0, 0.0)) report.diagonal_violations.push_back({k, i});
    double cond = condition_number(eye - hk);
    report.condition_numbers.push_back(cond);
    if (!(cond <= kConditionThreshold)) report.ill_conditioned_bins.push_back(k);
  }
  for (Node i = 0; i < n; ++i)
    for (std::size_t k = 0; k < spec.grid().size(); ++k)
      if (!(spec.noise().diag(i, k) > 0.0)) report.noise_violations.push_back({i, k});
  return report;
}

SpectralMatrixField closed_form_psd(const LdimSpec& spec) {
  const std::size_t n = spec.n();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  SpectralMatrixField out;
  out.n = n;
  out.phi.resize(spec.grid().size());
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < spec.grid().size(); ++k) {
    Eigen::MatrixXcd a = eye - spec.h().values[k];
    if (!(condition_number(a) <= kConditionThreshold)) {
      bad.push_back(k);
      continue;
    }
    Eigen::MatrixXcd g = a.partialPivLu().solve(eye);
    Eigen::MatrixXcd phi = g * spec.noise().diag.col(k).cast<Complex>().asDiagonal() * g.adjoint();
    out.phi[k] = 0.5 * (phi + phi.adjoint());
  }
  if (!bad.empty()) throw ConditioningError("(I - H) is ill-conditioned at bins " + join_bins(bad), bad);
  return out;
}

SpectralMatrixField closed_form_inverse_psd(const LdimSpec& spec) {
  const std::size_t n = spec.n();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  SpectralMatrixField out;
  out.n = n;
  out.phi.resize(spec.grid().size());
  for (std::size_t k = 0; k < spec.grid().size(); ++k) {
    Eigen::MatrixXcd a = eye - spec.h().values[k];
    Eigen::VectorXcd inv_noise = spec.noise().diag.col(k).cwiseInverse().cast<Complex>();
    out.phi[k] = a.adjoint() * inv_noise.asDiagonal() * a;
  }
  return out;
}

CausalGraph graph_from_transfer(const TransferMatrixField& h, double tol) {
  if (tol < 0.0) throw ArgumentError("edge tolerance must be nonnegative");
  CausalGraph g(h.n);
  for (Node v = 0; v < h.n; ++v) {
    for (Node u = 0; u < h.n; ++u) {
      if (u == v) continue;
      double peak = 0.0;
      for (const auto& m : h.values) peak = std::max(peak, std::abs(m(v, u)));
      if (peak > tol) g.add_edge(u, v);
    }
  }
  return g;
}

}  // namespace spectral_causal
