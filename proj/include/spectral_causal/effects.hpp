#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spectral_causal/graph.hpp"
#include "spectral_causal/model.hpp"
#include "spectral_causal/simulate.hpp"
#include "spectral_causal/spectral.hpp"

namespace spectral_causal {

struct DirectEffectEstimate {
  Node u = 0, y = 0;
  std::vector<Node> adjustment;
  std::vector<Complex> alpha;  // per bin
  std::vector<std::size_t> flags;
  AdmissibilityReport report;
};

// alpha = coefficient of u when projecting y onto {u} u Z; throws
// InadmissibleError when the single-door conditions fail on g.
DirectEffectEstimate estimate_direct_effect(const CausalGraph& g, const SpectralMatrixField& phi, Node u, Node y,
                                            const NodeSet& z);
DirectEffectEstimate estimate_direct_effect(const CausalGraph& g, const SpectralEnsemble& ens, Node u, Node y,
                                            const NodeSet& z);

// (Re, Im) Gaussian summary of one node at one bin.
struct BinGaussian {
  Complex mean;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  std::size_t count = 0;
};

struct FreqGaussianSummary {
  std::size_t n = 0;
  std::vector<std::vector<BinGaussian>> by_node;  // [node][bin]

  const BinGaussian& at(Node i, std::size_t bin) const { return by_node.at(i).at(bin); }
};

FreqGaussianSummary summarize(const SpectralEnsemble& ens);

struct MixtureComponent {
  double weight = 0.0;
  Complex mean;
  double variance = 0.0;  // E|Y - mean|^2
};

struct AdjustedDensity {
  Complex mean;
  double variance = 0.0;
  std::vector<MixtureComponent> components;
};

inline constexpr std::size_t kDefaultStrata = 8;

// Sampled: equal-count strata on Re of the first adjustment node, regression
// y ~ [1, w, z] inside each stratum evaluated at (w*, stratum mean of z).
AdjustedDensity backdoor_adjust(const CausalGraph& g, const SpectralEnsemble& ens, Node w, Node y, const NodeSet& z,
                                Complex w_star, std::size_t bin, std::size_t strata = kDefaultStrata);
// Analytic linear-Gaussian form from Phi at one bin.
AdjustedDensity backdoor_adjust(const CausalGraph& g, const SpectralMatrixField& phi, Node w, Node y,
                                const NodeSet& z, Complex w_star, std::size_t bin);

// Sampled: z | w* from a regression on w, then strata over Re w' with
// y ~ [1, w', z] inside each stratum, integrated over z | w*.
AdjustedDensity frontdoor_adjust(const CausalGraph& g, const SpectralEnsemble& ens, Node w, Node y,
                                 const NodeSet& z, Complex w_star, std::size_t bin,
                                 std::size_t strata = kDefaultStrata);
AdjustedDensity frontdoor_adjust(const CausalGraph& g, const SpectralMatrixField& phi, Node w, Node y,
                                 const NodeSet& z, Complex w_star, std::size_t bin);

struct NodeContrast {
  Node node = 0;
  bool affected = false;
  double max_z = 0.0;
  std::size_t argmax_bin = 0;
  bool argmax_imag = false;
  std::vector<double> z_re, z_im;  // per bin, (arm 2 - arm 1) / se
  std::vector<double> re_means_1, im_means_1, re_means_2, im_means_2;
};

struct InterventionContrast {
  Node intervened = 0;
  std::string label_1 = "arm1", label_2 = "arm2";
  std::size_t segments = 0, segment_length = 0;
  double z_crit = 6.0;
  std::vector<NodeContrast> nodes;
};

inline constexpr double kDefaultZCrit = 6.0;

InterventionContrast contrast_summaries(const FreqGaussianSummary& arm1, const FreqGaussianSummary& arm2,
                                        Node intervened, double z_crit = kDefaultZCrit);

// Restart-and-record under each intervention (independent sub-seeds 1 and 2).
InterventionContrast intervention_contrast(const ArSpec& spec, const InterventionSpec& iv1,
                                           const InterventionSpec& iv2, std::size_t R, std::size_t N,
                                           std::uint64_t seed, double z_crit = kDefaultZCrit);

struct InterventionDensity {
  Node intervened = 0;
  std::size_t bin = 0;
  Eigen::VectorXcd mean;
  Eigen::MatrixXcd cov;  // E[(X - mean)(X - mean)^*]
  std::vector<Eigen::Matrix2d> re_im_cov;
};

// Exact post-intervention law at one bin: row i of H removed, X_i fixed.
InterventionDensity atomic_intervention_density(const LdimSpec& spec, Node i, Complex value, std::size_t bin);

}  // namespace spectral_causal
