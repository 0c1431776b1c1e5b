#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "spectral_causal/model.hpp"
#include "spectral_causal/simulate.hpp"
#include "spectral_causal/spectral.hpp"

namespace spectral_causal {

// Coefficients W_{i.C}[c](w_k): the predictor sum_c W[c] X_c minimizes the
// mean-square error for X_i, which gives Phi_CC^T w = (Phi_{i,c})_c per bin.
struct WienerField {
  Node target = 0;
  std::vector<Node> conditioning;
  Eigen::MatrixXcd coeffs;         // |C| x num_bins
  std::vector<std::size_t> flags;  // bins solved with a ridge

  std::size_t num_bins() const { return static_cast<std::size_t>(coeffs.cols()); }
  // Row of `member` in coeffs; throws if member is not in the conditioning set.
  std::size_t index_of(Node member) const;
  Complex at(Node member, std::size_t bin) const {
    return coeffs(static_cast<Eigen::Index>(index_of(member)), static_cast<Eigen::Index>(bin));
  }
  bool flagged(std::size_t bin) const;
};

struct WienerOptions {
  std::optional<double> floor;  // absolute ridge threshold; default 1e-8 * max diag of Phi_CC
  bool strict = false;          // throw instead of regularizing
};

struct BinSolution {
  Eigen::VectorXcd w;
  bool regularized = false;
};

std::vector<Node> complement(std::size_t n, Node i);

// Solves Phi_CC^T w = rhs at one bin; rhs(c) = Phi(i, C[c]).
BinSolution solve_wiener_bin(const Eigen::MatrixXcd& phi_cc, const Eigen::VectorXcd& rhs, std::size_t bin,
                             const WienerOptions& opts = {});

WienerField wiener_from_psd(const SpectralMatrixField& phi, Node i, const std::vector<Node>& conditioning,
                            const WienerOptions& opts = {});
BinSolution wiener_freq(const SpectralEnsemble& ens, Node i, const std::vector<Node>& conditioning, std::size_t bin,
                        const WienerOptions& opts = {});

struct TimeDomainWiener {
  Node target = 0;
  std::vector<Node> conditioning;
  std::size_t lag_depth = 0;
  Eigen::MatrixXd coeffs;  // |C| x lag_depth, column l = lag l

  // Row c, bin k: sum_l coeffs(c, l) e^{-j w_k l}.
  Eigen::MatrixXcd frequency_response(std::size_t num_bins) const;
};

TimeDomainWiener wiener_time(const TimeSeriesPanel& panel, Node i, const std::vector<Node>& conditioning,
                             std::size_t lag_depth);

// -C_ki / C_ii from cofactors of the full Phi at every bin.
std::vector<Complex> wiener_cofactor(const SpectralMatrixField& phi, Node i, Node k);

struct LinearComponent {
  Node node = 0;
  std::vector<Complex> alpha;  // per bin
};

// max over bins and members of |W_{y.C} - sum_m alpha_m W_{y_m.C}|.
double wiener_linearity_check(const SpectralEnsemble& ens, Node target, const std::vector<LinearComponent>& parts,
                              const std::vector<Node>& conditioning);

}  // namespace spectral_causal
