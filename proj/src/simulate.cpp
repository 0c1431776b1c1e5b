#include "spectral_causal/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "fft.hpp"
#include "spectral_causal/errors.hpp"
#include "spectral_causal/parallel.hpp"

namespace spectral_causal {

CausalGraph ArSpec::graph() const {
  CausalGraph g(n());
  for (Node i = 0; i < n(); ++i)
    for (Node j = 0; j < n(); ++j)
      if (i != j && cross_gains(i, j) != 0.0) g.add_edge(j, i);
  return g;
}

void ArSpec::check() const {
  const auto n_ = static_cast<Eigen::Index>(n());
  if (n_ == 0) throw StructuralError("AR spec has no nodes");
  if (self_lags.rows() != n_ || self_lags.cols() != static_cast<Eigen::Index>(kArLags))
    throw StructuralError("self_lags must be n x 3");
  if (cross_gains.rows() != n_ || cross_gains.cols() != n_) throw StructuralError("cross_gains must be n x n");
  for (Eigen::Index i = 0; i < n_; ++i) {
    if (cross_gains(i, i) != 0.0) throw ArgumentError("cross_gains diagonal must be zero (node " + std::to_string(i) + ")");
    if (!(noise_std(i) >= 0.0)) throw ArgumentError("noise_std must be nonnegative");
  }
  if (!self_lags.allFinite() || !cross_gains.allFinite() || !noise_std.allFinite())
    throw ArgumentError("AR spec contains non-finite values");
}

TimeSeriesPanel TimeSeriesPanel::streaming(Eigen::MatrixXd values, PanelMeta meta) {
  if (!values.allFinite()) throw ArgumentError("panel contains non-finite values");
  TimeSeriesPanel p;
  p.layout_ = Layout::streaming;
  p.n_ = static_cast<std::size_t>(values.rows());
  p.length_ = static_cast<std::size_t>(values.cols());
  p.segments_.push_back(std::move(values));
  p.meta_ = std::move(meta);
  return p;
}

TimeSeriesPanel TimeSeriesPanel::segmented(std::vector<Eigen::MatrixXd> segments, PanelMeta meta) {
  if (segments.empty()) throw ArgumentError("segmented panel needs at least one segment");
  TimeSeriesPanel p;
  p.layout_ = Layout::segmented;
  p.n_ = static_cast<std::size_t>(segments[0].rows());
  p.length_ = static_cast<std::size_t>(segments[0].cols());
  for (const auto& s : segments) {
    if (static_cast<std::size_t>(s.rows()) != p.n_ || static_cast<std::size_t>(s.cols()) != p.length_)
      throw ArgumentError("all segments must share node count and length");
    if (!s.allFinite()) throw ArgumentError("panel contains non-finite values");
  }
  p.segments_ = std::move(segments);
  p.meta_ = std::move(meta);
  return p;
}

TimeSeriesPanel TimeSeriesPanel::resegment(std::size_t block) const {
  if (!is_streaming()) throw ArgumentError("resegment requires a streaming panel");
  if (block == 0 || block > length_) throw ArgumentError("block length must be in [1, T]");
  std::size_t count = length_ / block;
  std::vector<Eigen::MatrixXd> segs;
  segs.reserve(count);
  for (std::size_t r = 0; r < count; ++r)
    segs.push_back(segments_[0].middleCols(static_cast<Eigen::Index>(r * block), static_cast<Eigen::Index>(block)));
  return segmented(std::move(segs), meta_);
}

double companion_spectral_radius(const ArSpec& spec, std::optional<Node> severed) {
  spec.check();
  const auto n = static_cast<Eigen::Index>(spec.n());
  const Eigen::Index p = static_cast<Eigen::Index>(kArLags);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n * p, n * p);
  comp.topLeftCorner(n, n) = spec.cross_gains;
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index i = 0; i < n; ++i) comp(i, k * n + i) -= spec.self_lags(i, k);
  if (severed) comp.row(static_cast<Eigen::Index>(*severed)).setZero();
  comp.bottomLeftCorner(n * (p - 1), n * (p - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

void require_stable(const ArSpec& spec, std::optional<Node> severed = std::nullopt) {
  double rho = companion_spectral_radius(spec, severed);
  if (!(rho < 1.0 - kStabilityMargin))
    throw StabilityError("AR spec fails the stability check: companion spectral radius " + std::to_string(rho) +
                             " >= 1 - 1e-6",
                         rho);
}

std::size_t max_lag(const ArSpec& spec) {
  std::size_t lag = 0;
  if ((spec.cross_gains.array() != 0.0).any()) lag = 1;
  for (std::size_t k = 0; k < kArLags; ++k)
    if ((spec.self_lags.col(static_cast<Eigen::Index>(k)).array() != 0.0).any()) lag = std::max(lag, k + 1);
  return lag;
}

std::size_t positive_mod(long long a, std::size_t m) {
  long long r = a % static_cast<long long>(m);
  return static_cast<std::size_t>(r < 0 ? r + static_cast<long long>(m) : r);
}

// Runs the recursion for skip + length steps from zero state and keeps the
// last `length`. Noise is drawn for every node at every step, including a
// forced node, so intervened and natural runs share the same noise path.
Eigen::MatrixXd ar_path(const ArSpec& spec, std::size_t length, std::size_t skip, std::uint64_t stream_seed,
                        const InterventionSpec* iv) {
  const std::size_t n = spec.n();
  std::mt19937_64 rng(stream_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(n, length);
  // history.col(k) holds x(t - 1 - k)
  Eigen::MatrixXd history = Eigen::MatrixXd::Zero(n, kArLags);
  Eigen::VectorXd x(n);
  const std::size_t total = skip + length;
  for (std::size_t s = 0; s < total; ++s) {
    for (std::size_t i = 0; i < n; ++i) x(i) = spec.noise_std(i) * normal(rng);
    x.noalias() += spec.cross_gains * history.col(0);
    for (std::size_t k = 0; k < kArLags; ++k)
      x -= spec.self_lags.col(static_cast<Eigen::Index>(k)).cwiseProduct(history.col(static_cast<Eigen::Index>(k)));
    if (iv) {
      long long t = static_cast<long long>(s) - static_cast<long long>(skip);
      x(iv->node) = iv->sequence[positive_mod(t, iv->sequence.size())];
    }
    for (std::size_t k = kArLags - 1; k > 0; --k) history.col(k) = history.col(k - 1);
    history.col(0) = x;
    if (s >= skip) out.col(static_cast<Eigen::Index>(s - skip)) = x;
  }
  return out;
}

void check_intervention(const ArSpec& spec, const InterventionSpec& iv, std::size_t layout_length) {
  if (iv.node >= spec.n()) throw ArgumentError("intervention node " + std::to_string(iv.node) + " out of range");
  if (iv.sequence.empty() || layout_length % iv.sequence.size() != 0)
    throw ArgumentError("intervention sequence length " + std::to_string(iv.sequence.size()) +
                        " does not divide the panel length " + std::to_string(layout_length));
  for (double v : iv.sequence)
    if (!std::isfinite(v)) throw ArgumentError("intervention sequence contains non-finite values");
}

TimeSeriesPanel streaming_run(const ArSpec& spec, std::size_t T, std::uint64_t seed, std::optional<std::size_t> burn_in,
                              const InterventionSpec* iv) {
  require_stable(spec);
  if (iv) require_stable(spec, iv->node);
  if (T == 0) throw ArgumentError("T must be positive");
  std::size_t skip = burn_in ? *burn_in : default_burn_in(spec);
  PanelMeta meta;
  meta.seed = seed;
  if (iv) meta.intervention = *iv;
  return TimeSeriesPanel::streaming(ar_path(spec, T, skip, mix_seed(seed, 0), iv), std::move(meta));
}

TimeSeriesPanel restart_run(const ArSpec& spec, std::size_t R, std::size_t N, std::uint64_t seed,
                            const InterventionSpec* iv) {
  require_stable(spec);
  if (iv) require_stable(spec, iv->node);
  if (R == 0 || N == 0) throw ArgumentError("R and N must be positive");
  std::vector<Eigen::MatrixXd> segs(R);
  parallel_for(R, [&](std::size_t r) { segs[r] = ar_path(spec, N, 0, mix_seed(seed, r), iv); });
  PanelMeta meta;
  meta.seed = seed;
  if (iv) meta.intervention = *iv;
  return TimeSeriesPanel::segmented(std::move(segs), std::move(meta));
}

}  // namespace

std::size_t default_burn_in(const ArSpec& spec) {
  std::size_t lag = max_lag(spec);
  if (lag == 0) return 0;
  double rho = companion_spectral_radius(spec);
  double b = std::ceil(10.0 * static_cast<double>(lag) / (1.0 - rho));
  if (!(b < static_cast<double>(kMaxBurnIn))) return kMaxBurnIn;
  return static_cast<std::size_t>(b);
}

LdimSpec ar_to_ldim(const ArSpec& spec, std::size_t num_bins) {
  spec.check();
  FrequencyGrid grid(num_bins, is_power_of_two(num_bins));
  const std::size_t n = spec.n();
  TransferMatrixField h = TransferMatrixField::zeros(n, num_bins);
  NoisePsd noise{Eigen::MatrixXd::Zero(n, num_bins)};
  for (std::size_t k = 0; k < num_bins; ++k) {
    const double w = grid.omega(k);
    const Complex z = std::polar(1.0, -w);
    for (std::size_t i = 0; i < n; ++i) {
      Complex a(1.0, 0.0);
      for (std::size_t l = 0; l < kArLags; ++l)
        a += spec.self_lags(i, l) * std::polar(1.0, -w * static_cast<double>(l + 1));
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) h.values[k](i, j) = spec.cross_gains(i, j) * z / a;
      noise.diag(i, k) = spec.noise_std(i) * spec.noise_std(i) / std::norm(a);
    }
  }
  return LdimSpec(grid, std::move(h), std::move(noise));
}

TimeSeriesPanel simulate_ar(const ArSpec& spec, std::size_t T, std::uint64_t seed, std::optional<std::size_t> burn_in) {
  return streaming_run(spec, T, seed, burn_in, nullptr);
}

TimeSeriesPanel restart_and_record(const ArSpec& spec, std::size_t R, std::size_t N, std::uint64_t seed) {
  return restart_run(spec, R, N, seed, nullptr);
}

TimeSeriesPanel apply_intervention(const ArSpec& spec, const ArRun& run, const InterventionSpec& iv) {
  spec.check();
  check_intervention(spec, iv, run.length);
  if (run.mode == ArRun::Mode::streaming) return streaming_run(spec, run.length, run.seed, run.burn_in, &iv);
  return restart_run(spec, run.segments, run.length, run.seed, &iv);
}

TimeSeriesPanel simulate_circular(const LdimSpec& spec, std::size_t R, std::uint64_t seed) {
  const std::size_t N = spec.grid().size();
  const std::size_t n = spec.n();
  if (!is_power_of_two(N)) throw ArgumentError("circular simulation needs a power-of-two grid");
  if (R == 0) throw ArgumentError("R must be positive");
  const auto& h = spec.h().values;
  const auto& noise = spec.noise().diag;
  for (std::size_t k = 0; k <= N / 2; ++k) {
    const std::size_t m = (N - k) % N;
    double scale = 1.0 + h[k].cwiseAbs().maxCoeff();
    if ((h[k] - h[m].conjugate()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ArgumentError("transfer field is not conjugate-symmetric at bin " + std::to_string(k) +
                          "; real-valued simulation impossible");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(noise(i, k) >= 0.0)) throw ArgumentError("noise PSD must be nonnegative");
      if (std::abs(noise(i, k) - noise(i, m)) > 1e-12 * (1.0 + noise(i, k)))
        throw ArgumentError("noise PSD is not symmetric at bin " + std::to_string(k));
    }
  }
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  std::vector<Eigen::MatrixXcd> gain(N / 2 + 1);
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k <= N / 2; ++k) {
    Eigen::MatrixXcd a = eye - h[k];
    if (!(condition_number(a) <= kConditionThreshold)) bad.push_back(k);
    gain[k] = a.partialPivLu().solve(eye);
  }
  if (!bad.empty()) throw ConditioningError("(I - H) is ill-conditioned at bins " + join_bins(bad), bad);

  std::vector<Eigen::MatrixXd> segs(R);
  parallel_for(R, [&](std::size_t r) {
    std::mt19937_64 rng(mix_seed(seed, r));
    std::normal_distribution<double> normal(0.0, 1.0);
    detail::RealFft fft(N);
    Eigen::MatrixXcd xhat(n, N / 2 + 1);
    Eigen::VectorXcd e(n);
    for (std::size_t k = 0; k <= N / 2; ++k) {
      const bool real_bin = (k == 0 || k == N / 2);
      for (std::size_t i = 0; i < n; ++i) {
        if (real_bin) {
          e(i) = Complex(std::sqrt(noise(i, k)) * normal(rng), 0.0);
        } else {
          double s = std::sqrt(noise(i, k) / 2.0);
          double re = normal(rng);
          double im = normal(rng);
          e(i) = Complex(s * re, s * im);
        }
      }
      xhat.col(k) = gain[k] * e;
      if (real_bin) xhat.col(k) = xhat.col(k).real().cast<Complex>();
    }
    Eigen::MatrixXd seg(n, N);
    std::vector<Complex> half(N / 2 + 1);
    std::vector<double> time(N);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k <= N / 2; ++k) half[k] = xhat(i, k);
      fft.inverse(half.data(), time.data());
      for (std::size_t t = 0; t < N; ++t) seg(i, t) = time[t];
    }
    segs[r] = std::move(seg);
  });
  PanelMeta meta;
  meta.seed = seed;
  return TimeSeriesPanel::segmented(std::move(segs), std::move(meta));
}

}  // namespace spectral_causal
