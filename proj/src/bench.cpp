#include "spectral_causal/bench.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <random>

#include "spectral_causal/discovery.hpp"
#include "spectral_causal/errors.hpp"
#include "spectral_causal/parallel.hpp"
#include "spectral_causal/simulate.hpp"
#include "spectral_causal/spectral.hpp"
#include "spectral_causal/wiener.hpp"

namespace spectral_causal {

SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("slope fit needs at least two paired points");
  const std::size_t m = x.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ArgumentError("log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ArgumentError("slope fit needs distinct x values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.ci_low = fit.ci_high = fit.slope;
  if (m > 2) {
    double sse = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = ly[i] - fit.intercept - fit.slope * lx[i];
      sse += r * r;
    }
    const double se = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
    boost::math::students_t dist(static_cast<double>(m - 2));
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_low = fit.slope - t * se;
    fit.ci_high = fit.slope + t * se;
  }
  return fit;
}

namespace {

constexpr double kTimerFloor = 2e-5;  // seconds; medians below this are treated as unresolved

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

struct Workload {
  TimeSeriesPanel panel;
  Eigen::MatrixXd truth;  // row j: population lag-0 coefficients of x_j on the others (complement order)
};

// x_1..x_{n-1} white; x_0 = sum_c g_c x_c + 0.1 e.
Workload make_workload(std::size_t n, std::size_t T, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0xbe7c));
  std::normal_distribution<double> normal;
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  g(0) = 0.0;
  for (std::size_t c = 1; c < n; ++c) g(static_cast<Eigen::Index>(c)) = 0.3 + 0.4 * static_cast<double>(c) / static_cast<double>(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t) {
    double acc = 0.0;
    for (std::size_t c = 1; c < n; ++c) {
      const double v = normal(rng);
      x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = v;
      acc += g(static_cast<Eigen::Index>(c)) * v;
    }
    x(0, static_cast<Eigen::Index>(t)) = acc + 0.1 * normal(rng);
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(nn, nn);
  cov(0, 0) = g.squaredNorm() + 0.01;
  for (Eigen::Index c = 1; c < nn; ++c) cov(0, c) = cov(c, 0) = g(c);
  Workload w{TimeSeriesPanel::streaming(std::move(x)), Eigen::MatrixXd(nn, nn - 1)};
  for (Node j = 0; j < n; ++j) {
    const auto others = complement(n, j);
    Eigen::MatrixXd block(nn - 1, nn - 1);
    Eigen::VectorXd rhs(nn - 1);
    for (Eigen::Index a = 0; a < nn - 1; ++a) {
      rhs(a) = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(others[a]));
      for (Eigen::Index b = 0; b < nn - 1; ++b)
        block(a, b) = cov(static_cast<Eigen::Index>(others[a]), static_cast<Eigen::Index>(others[b]));
    }
    w.truth.row(static_cast<Eigen::Index>(j)) = block.ldlt().solve(rhs).transpose();
  }
  return w;
}

double time_domain_run(const Workload& w, std::size_t N) {
  const std::size_t n = w.panel.n();
  double worst = 0.0;
  for (Node j = 0; j < n; ++j) {
    TimeDomainWiener f = wiener_time(w.panel, j, complement(n, j), N);
    for (Eigen::Index c = 0; c < f.coeffs.rows(); ++c)
      for (Eigen::Index l = 0; l < f.coeffs.cols(); ++l) {
        const double expected = l == 0 ? w.truth(static_cast<Eigen::Index>(j), c) : 0.0;
        worst = std::max(worst, std::abs(f.coeffs(c, l) - expected));
      }
  }
  return worst;
}

double frequency_domain_run(const Workload& w, std::size_t N) {
  const std::size_t n = w.panel.n();
  SpectralEnsemble ens = segment_fft(w.panel.resegment(N));
  double worst = 0.0;
  for (Node j = 0; j < n; ++j) {
    const auto others = complement(n, j);
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(others.size()));
    for (std::size_t k = 0; k < N; ++k) mean += wiener_freq(ens, j, others, k).w;
    mean /= static_cast<double>(N);
    for (Eigen::Index c = 0; c < mean.size(); ++c)
      worst = std::max(worst, std::abs(mean(c) - w.truth(static_cast<Eigen::Index>(j), c)));
  }
  return worst;
}

template <typename Fn>
double timed_median(std::size_t reps, Fn fn, const char* what) {
  constexpr double kTolerance = 0.1;
  std::vector<double> seconds;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const double err = fn();
    const auto stop = std::chrono::steady_clock::now();
    if (!(err < kTolerance))
      throw DegeneracyError(std::string(what) + " benchmark output misses the known coefficients (error " +
                            std::to_string(err) + ")");
    seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  return median(seconds);
}

std::string slope_verdict(const ScalingReport& r, double lo, double hi) {
  for (double s : r.median_seconds)
    if (s < kTimerFloor) return "inconclusive";
  return (r.fit.slope >= lo && r.fit.slope <= hi) ? "pass" : "fail";
}

}  // namespace

WienerBench bench_wiener(const WienerBenchConfig& cfg) {
  if (cfg.axis != "N" && cfg.axis != "n") throw ArgumentError("bench axis must be N or n");
  if (cfg.values.size() < 2) throw ArgumentError("sweep needs at least two values");
  if (cfg.reps < 1) throw ArgumentError("need at least one repetition");
  if (!std::is_sorted(cfg.values.begin(), cfg.values.end())) throw ArgumentError("sweep values must increase");
  WienerBench out;
  out.time_domain.method = "time-domain";
  out.frequency_domain.method = "frequency-domain";
  for (auto* r : {&out.time_domain, &out.frequency_domain}) r->axis = cfg.axis;
  for (std::size_t v : cfg.values) {
    const std::size_t n = cfg.axis == "n" ? v : cfg.n;
    const std::size_t N = cfg.axis == "N" ? v : cfg.N;
    if (n < 2 || N < 2) throw ArgumentError("bench needs n >= 2 and N >= 2");
    Workload w = make_workload(n, cfg.T, cfg.seed);
    const double td = timed_median(cfg.reps, [&] { return time_domain_run(w, N); }, "time-domain");
    const double fd = timed_median(cfg.reps, [&] { return frequency_domain_run(w, N); }, "frequency-domain");
    for (auto* r : {&out.time_domain, &out.frequency_domain}) r->values.push_back(static_cast<double>(v));
    out.time_domain.median_seconds.push_back(td);
    out.frequency_domain.median_seconds.push_back(fd);
    out.ratio.push_back(td / fd);
  }
  out.time_domain.fit = fit_log_log(out.time_domain.values, out.time_domain.median_seconds);
  out.frequency_domain.fit = fit_log_log(out.frequency_domain.values, out.frequency_domain.median_seconds);
  if (cfg.axis == "N") {
    out.time_domain.claimed_exponent = 2.0;
    out.frequency_domain.claimed_exponent = 0.0;
    out.time_domain.verdict = slope_verdict(out.time_domain, 1.6, 2.4);
    out.frequency_domain.verdict = slope_verdict(out.frequency_domain, -0.2, 0.5);
  } else {
    out.time_domain.claimed_exponent = out.frequency_domain.claimed_exponent = 3.0;
    out.time_domain.verdict = slope_verdict(out.time_domain, 2.5, 3.5);
    out.frequency_domain.verdict = slope_verdict(out.frequency_domain, 2.5, 3.5);
  }
  out.ratio_increasing = true;
  for (std::size_t i = 1; i < out.ratio.size(); ++i)
    if (!(out.ratio[i] > out.ratio[i - 1])) out.ratio_increasing = false;
  return out;
}

CausalGraph collider_family(std::size_t q) {
  CausalGraph g(q + 1);
  for (Node p = 0; p < q; ++p) g.add_edge(p, q);
  return g;
}

CausalGraph matching_family(std::size_t q) {
  CausalGraph g(2 * q);
  for (Node k = 0; k < q; ++k) g.add_edge(2 * k, 2 * k + 1);
  return g;
}

namespace {

ArSpec random_spec_on(const CausalGraph& g, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> self(-0.5, 0.5), gain(0.3, 0.9), coin(0.0, 1.0);
  ArSpec spec;
  spec.self_lags = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(kArLags));
  spec.cross_gains = Eigen::MatrixXd::Zero(n, n);
  spec.noise_std = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) spec.self_lags(i, 0) = self(rng);
  for (const auto& [u, v] : g.edges())
    spec.cross_gains(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = gain(rng) * (coin(rng) < 0.5 ? -1 : 1);
  return spec;
}

}  // namespace

DiscoveryBench bench_discovery(const std::string& family, const std::vector<std::size_t>& qs, std::uint64_t seed) {
  if (qs.size() < 2) throw ArgumentError("q sweep needs at least two values");
  DiscoveryBench out;
  out.pc.method = "w-pc";
  out.phase.method = "wiener-phase";
  for (auto* r : {&out.pc, &out.phase}) r->axis = "q";
  for (std::size_t q : qs) {
    CausalGraph g;
    if (family == "collider") {
      g = collider_family(q);
    } else if (family == "matching") {
      g = matching_family(q);
    } else {
      throw ArgumentError("unknown graph family '" + family + "'");
    }
    const ArSpec spec = random_spec_on(g, mix_seed(seed, q));
    const SpectralMatrixField phi = closed_form_psd(ar_to_ldim(spec, 16));
    const DiscoveryConfig cfg = analytic_config();
    PcResult pc = wiener_pc(phi, cfg);
    PhaseResult ph = wiener_phase_cpdag(phi, cfg);
    const UEdgeSet truth = topology(g);
    if (pc.cpdag.skeleton() != truth || ph.skeleton != truth)
      throw DegeneracyError("discovery on the analytic spectrum missed the true skeleton at q = " + std::to_string(q));
    for (auto* r : {&out.pc, &out.phase}) r->values.push_back(static_cast<double>(q));
    out.pc.tests.push_back(static_cast<double>(pc.ci_tests));
    out.phase.tests.push_back(static_cast<double>(ph.cost_units()));
  }
  out.pc.fit = fit_log_log(out.pc.values, out.pc.tests);
  out.phase.fit = fit_log_log(out.phase.values, out.phase.tests);
  out.phase.claimed_exponent = 2.0;

  out.pc_geometric = true;
  for (std::size_t i = 1; i < out.pc.tests.size(); ++i)
    if (out.pc.tests[i] < 2.0 * out.pc.tests[i - 1]) out.pc_geometric = false;

  double log_scale = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i)
    log_scale += std::log(out.phase.tests[i] / (out.phase.values[i] * out.phase.values[i]));
  const double scale = std::exp(log_scale / static_cast<double>(qs.size()));
  out.phase_quadratic = true;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const double ratio = out.phase.tests[i] / (scale * out.phase.values[i] * out.phase.values[i]);
    if (ratio < 1.0 / 3.0 || ratio > 3.0) out.phase_quadratic = false;
    if (i > 0) out.phase_max_ratio = std::max(out.phase_max_ratio, out.phase.tests[i] / out.phase.tests[i - 1]);
  }
  out.pc.verdict = out.pc_geometric ? "pass" : "fail";
  out.phase.verdict = out.phase_quadratic ? "pass" : "fail";
  return out;
}

}  // namespace spectral_causal
