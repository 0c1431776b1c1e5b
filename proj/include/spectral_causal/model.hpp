#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "spectral_causal/graph.hpp"

namespace spectral_causal {

using Complex = std::complex<double>;

inline constexpr double kConditionThreshold = 1e10;
inline constexpr double kEdgeTolerance = 1e-9;

bool is_power_of_two(std::size_t v);

// Uniform grid w_k = 2*pi*k/N on [0, 2*pi).
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::size_t num_bins, bool fft_backed = false);
  static FrequencyGrid fft(std::size_t num_bins) { return FrequencyGrid(num_bins, true); }

  std::size_t size() const { return num_bins_; }
  double omega(std::size_t k) const;
  std::vector<double> bins() const;
  bool fft_backed() const { return fft_backed_; }
  bool operator==(const FrequencyGrid& o) const { return num_bins_ == o.num_bins_; }

 private:
  std::size_t num_bins_ = 0;
  bool fft_backed_ = false;
};

// values[k](v, u) is the gain from u into v at bin k.
struct TransferMatrixField {
  std::size_t n = 0;
  std::vector<Eigen::MatrixXcd> values;

  std::size_t num_bins() const { return values.size(); }
  static TransferMatrixField zeros(std::size_t n, std::size_t num_bins);
};

// Per-node, per-bin noise spectral density; rows are nodes, columns bins.
struct NoisePsd {
  Eigen::MatrixXd diag;

  static NoisePsd constant(std::size_t n, std::size_t num_bins, double value);
};

class LdimSpec {
 public:
  LdimSpec(FrequencyGrid grid, TransferMatrixField h, NoisePsd noise, double edge_tolerance = kEdgeTolerance);

  std::size_t n() const { return h_.n; }
  const FrequencyGrid& grid() const { return grid_; }
  const TransferMatrixField& h() const { return h_; }
  const NoisePsd& noise() const { return noise_; }
  const CausalGraph& graph() const { return graph_; }

 private:
  FrequencyGrid grid_;
  TransferMatrixField h_;
  NoisePsd noise_;
  CausalGraph graph_;
};

// Cross-spectral matrices phi[k](a, b) = E[X_a(w_k) conj(X_b(w_k))].
struct SpectralMatrixField {
  std::size_t n = 0;
  std::vector<Eigen::MatrixXcd> phi;
  std::vector<std::size_t> flags;  // bins regularized during inversion

  std::size_t num_bins() const { return phi.size(); }
};

struct ValidationReport {
  std::vector<double> condition_numbers;                 // per bin, of (I - H)
  std::vector<std::pair<std::size_t, Node>> diagonal_violations;  // (bin, node)
  std::vector<std::pair<Node, std::size_t>> noise_violations;     // (node, bin)
  std::vector<std::size_t> ill_conditioned_bins;

  bool passed() const {
    return diagonal_violations.empty() && noise_violations.empty() && ill_conditioned_bins.empty();
  }
};

double condition_number(const Eigen::MatrixXcd& m);

ValidationReport validate_ldim(const LdimSpec& spec);
SpectralMatrixField closed_form_psd(const LdimSpec& spec);
// (I - H)^* diag(noise)^-1 (I - H) per bin.
SpectralMatrixField closed_form_inverse_psd(const LdimSpec& spec);
CausalGraph graph_from_transfer(const TransferMatrixField& h, double tol);

}  // namespace spectral_causal
