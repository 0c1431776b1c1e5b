#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spectral_causal/graph.hpp"
#include "spectral_causal/model.hpp"

namespace spectral_causal {

inline constexpr std::size_t kArLags = 3;
inline constexpr double kStabilityMargin = 1e-6;
inline constexpr std::size_t kMaxBurnIn = 10000;

// x_i(t) + sum_k self_lags(i,k-1) x_i(t-k) = sum_j cross_gains(i,j) x_j(t-1) + noise_std(i) e_i(t)
struct ArSpec {
  Eigen::MatrixXd self_lags;    // n x 3
  Eigen::MatrixXd cross_gains;  // n x n, row = receiving node
  Eigen::VectorXd noise_std;    // n

  std::size_t n() const { return static_cast<std::size_t>(noise_std.size()); }
  CausalGraph graph() const;
  // Throws StructuralError / ArgumentError on malformed fields.
  void check() const;
};

struct InterventionSpec {
  Node node = 0;
  std::vector<double> sequence;
};

struct PanelMeta {
  std::uint64_t seed = 0;
  std::string spec_hash;
  std::optional<InterventionSpec> intervention;
};

// Streaming panels hold one segment of length T; segmented panels hold R
// equal-length segments. Each segment is an n x length matrix.
class TimeSeriesPanel {
 public:
  enum class Layout { streaming, segmented };

  static TimeSeriesPanel streaming(Eigen::MatrixXd values, PanelMeta meta = {});
  static TimeSeriesPanel segmented(std::vector<Eigen::MatrixXd> segments, PanelMeta meta = {});

  Layout layout() const { return layout_; }
  bool is_streaming() const { return layout_ == Layout::streaming; }
  std::size_t n() const { return n_; }
  std::size_t num_segments() const { return segments_.size(); }
  std::size_t segment_length() const { return length_; }
  const Eigen::MatrixXd& segment(std::size_t r) const { return segments_.at(r); }
  const std::vector<Eigen::MatrixXd>& segments() const { return segments_; }
  const PanelMeta& meta() const { return meta_; }
  PanelMeta& meta() { return meta_; }

  // Non-overlapping blocks of length N from a streaming panel; the tail that
  // does not fill a block is dropped.
  TimeSeriesPanel resegment(std::size_t block) const;

 private:
  Layout layout_ = Layout::streaming;
  std::size_t n_ = 0;
  std::size_t length_ = 0;
  std::vector<Eigen::MatrixXd> segments_;
  PanelMeta meta_;
};

// Largest eigenvalue modulus of the VAR(3) companion matrix. A severed node
// has its equation removed (as under an atomic intervention).
double companion_spectral_radius(const ArSpec& spec, std::optional<Node> severed = std::nullopt);
std::size_t default_burn_in(const ArSpec& spec);
// H(w) = b e^{-jw} / A_i(w), noise PSD = sigma^2 / |A_i(w)|^2.
LdimSpec ar_to_ldim(const ArSpec& spec, std::size_t num_bins);

TimeSeriesPanel simulate_ar(const ArSpec& spec, std::size_t T, std::uint64_t seed,
                            std::optional<std::size_t> burn_in = std::nullopt);
TimeSeriesPanel simulate_circular(const LdimSpec& spec, std::size_t R, std::uint64_t seed);
TimeSeriesPanel restart_and_record(const ArSpec& spec, std::size_t R, std::size_t N, std::uint64_t seed);

struct ArRun {
  enum class Mode { streaming, restart };
  Mode mode = Mode::restart;
  std::size_t length = 0;    // T for streaming, N for restart
  std::size_t segments = 1;  // R for restart
  std::uint64_t seed = 0;
  std::optional<std::size_t> burn_in;  // streaming only
};

TimeSeriesPanel apply_intervention(const ArSpec& spec, const ArRun& run, const InterventionSpec& iv);

}  // namespace spectral_causal
