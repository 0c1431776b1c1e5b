#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "spectral_causal/graph.hpp"
#include "spectral_causal/spectral.hpp"
#include "spectral_causal/wiener.hpp"

namespace spectral_causal {

struct FrequencyPolicy {
  enum class Kind { all_bins, single_bin, bins };
  Kind kind = Kind::all_bins;
  std::vector<std::size_t> bins;  // Kind::bins
  std::uint64_t seed = 0;         // Kind::single_bin
};

struct DiscoveryConfig {
  double tau = 0.1;
  double tau_im = 0.1;
  double sigma_split = 1.0;
  FrequencyPolicy policy;
  std::optional<std::size_t> q_max;  // W-PC conditioning-set cap; unset = n - 2
  std::optional<double> floor;

  void check() const;
};

// Defaults for noise-free input from closed_form_psd.
DiscoveryConfig analytic_config();

// Bins examined by the max-bin statistics. single_bin picks one bin uniformly
// from those that are neither DC nor Nyquist.
std::vector<std::size_t> frequency_sampling_policy(const FrequencyPolicy& policy, std::size_t num_bins);

// W_{i . V\{i}} for every node i.
std::vector<WienerField> full_wiener_fields(const SpectralMatrixField& phi, const DiscoveryConfig& cfg);

UEdgeSet kin_edges(const std::vector<WienerField>& fields, const DiscoveryConfig& cfg);

struct ImaginarySkeleton {
  UEdgeSet edges;
  // The fields carry magnitude above tau yet no imaginary part above tau_im,
  // so the skeleton test has nothing to work with (e.g. static gains).
  bool low_confidence = false;
};
ImaginarySkeleton skeleton_imaginary(const std::vector<WienerField>& fields, const DiscoveryConfig& cfg);

UEdgeSet strict_spouses(const UEdgeSet& kin, const UEdgeSet& skeleton);

struct PhaseResult {
  UEdgeSet kin;
  UEdgeSet skeleton;
  UEdgeSet spouses;
  bool low_confidence = false;
  std::set<Collider> colliders;
  Cpdag cpdag;
  std::set<UEdge> orientation_conflicts;  // edges two colliders oriented both ways; left undirected
  std::size_t wiener_fields = 0;      // full-conditioning fields computed
  std::size_t candidate_checks = 0;   // collider candidates examined
  std::size_t collider_wiener_solves = 0;

  std::size_t cost_units() const { return wiener_fields + candidate_checks; }
};

PhaseResult wiener_phase_cpdag(const SpectralEnsemble& ens, const DiscoveryConfig& cfg);
PhaseResult wiener_phase_cpdag(const SpectralMatrixField& phi, const DiscoveryConfig& cfg);

struct PcResult {
  Cpdag cpdag;
  std::map<UEdge, NodeSet> sepsets;
  std::size_t ci_tests = 0;
  bool partial = false;  // stopped at q_max with untested conditioning sets left
};

PcResult wiener_pc(const SpectralEnsemble& ens, const DiscoveryConfig& cfg);
PcResult wiener_pc(const SpectralMatrixField& phi, const DiscoveryConfig& cfg);

struct PhaseStat {
  Node i = 0, j = 0;  // statistic of angle W_i[j]
  bool available = false;
  double mean = 0.0;
  double std = 0.0;
  std::size_t bins_used = 0;
  bool spurious = false;
};

// Circular mean and std sqrt(-2 ln Rbar) of the phase over non-degenerate bins.
std::vector<PhaseStat> phase_diagnostics(const std::vector<WienerField>& fields,
                                         const std::vector<std::pair<Node, Node>>& pairs, const DiscoveryConfig& cfg);

}  // namespace spectral_causal
