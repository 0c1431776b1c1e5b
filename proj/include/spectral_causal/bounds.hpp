#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>

#include "spectral_causal/simulate.hpp"

namespace spectral_causal {

// ||R(k)||_2 <= C * decay_base^|k| and 1/M <= lambda(Phi) <= M.
struct BoundParams {
  double n = 1;
  double T = 1;
  double L = 0;
  double C = 1;
  double decay_base = 0.5;
  double M = 1;
  double c1 = 1;
  double epsilon = 0.1;

  void check() const;
};

// c1 for the block of |C u {i}| series out of n.
double default_c1(std::size_t n, std::size_t block);

struct MinLag {
  std::size_t L = 0;
  bool vacuous = false;  // (1 - delta) eps / (2C) >= 1; any L satisfies the premise
};
MinLag min_lag(const BoundParams& p);

struct BoundResult {
  double bound = 1.0;      // clamped to [0, 1]
  double log_bound = 0.0;  // unclamped
  bool quadratic_active = true;
  double quadratic_rate = 0.0;
  double linear_rate = 0.0;
};

BoundResult psd_bound(const BoundParams& p);
BoundResult ipsd_bound(const BoundParams& p);
BoundResult wiener_bound(const BoundParams& p);

// Smallest T with wiener_bound <= confidence; T in p is ignored.
std::uint64_t sample_complexity(const BoundParams& p, double confidence);

struct PerturbationCheck {
  bool premise = false;  // spectrum of A in [1/M, M] and M ||B - A||_2 < 1
  double lhs = 0.0;      // ||A^-1 - B^-1||_2
  double rhs = 0.0;      // M^4 ||B - A||_2 / (1 - M ||B - A||_2)
  bool holds() const { return !premise || lhs <= rhs * (1.0 + 1e-12); }
};
PerturbationCheck perturbation_check(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double M);

// Plug-in guesses for C, decay_base and M from sample autocovariances and a
// correlogram PSD. Crude; for orientation only.
struct HeuristicConstants {
  double C = 0.0;
  double decay_base = 0.0;
  double M = 0.0;
  std::string label = "heuristic";
};
HeuristicConstants heuristic_constants(const TimeSeriesPanel& panel, std::size_t max_lag, std::size_t num_bins);

}  // namespace spectral_causal
