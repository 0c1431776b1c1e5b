#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spectral_causal/graph.hpp"

namespace spectral_causal {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% interval on the slope
};

// Ordinary least squares of log(y) on log(x).
SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingReport {
  std::string method;  // "time-domain", "frequency-domain", "w-pc", "wiener-phase"
  std::string axis;    // "N", "n", "q"
  std::vector<double> values;
  std::vector<double> median_seconds;  // empty for counter-based reports
  std::vector<double> tests;           // operation counts; empty for timing reports
  SlopeFit fit;
  double claimed_exponent = 0.0;
  std::string verdict;  // "pass", "fail", "inconclusive"
};

struct WienerBenchConfig {
  std::string axis = "N";  // "N" or "n"
  std::vector<std::size_t> values;
  std::size_t n = 4;
  std::size_t N = 8;
  std::size_t T = 4096;
  std::size_t reps = 3;
  std::uint64_t seed = 0;
};

struct WienerBench {
  ScalingReport time_domain;
  ScalingReport frequency_domain;
  std::vector<double> ratio;  // TD / FD median time per sweep point
  bool ratio_increasing = false;
};

// Times wiener_time and segment_fft + per-bin wiener_freq for every target on
// a workload with a known answer; a run whose output misses the answer aborts
// the benchmark with a DegeneracyError.
WienerBench bench_wiener(const WienerBenchConfig& cfg);

// Bipartite collider K_{q,1}: parents 0..q-1 into node q.
CausalGraph collider_family(std::size_t q);
// q disjoint edges 2k -> 2k+1.
CausalGraph matching_family(std::size_t q);

struct DiscoveryBench {
  ScalingReport pc;
  ScalingReport phase;
  bool pc_geometric = false;   // consecutive ratios >= 2
  bool phase_quadratic = false;  // counts within 3x of a fitted c q^2
  double phase_max_ratio = 0.0;
};

// Exact operation counters for both algorithms on analytic spectra of a
// random LDIM over each family member.
DiscoveryBench bench_discovery(const std::string& family, const std::vector<std::size_t>& qs, std::uint64_t seed);

}  // namespace spectral_causal
