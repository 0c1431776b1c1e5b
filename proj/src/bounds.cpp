#include "spectral_causal/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "spectral_causal/errors.hpp"
#include "spectral_causal/spectral.hpp"

namespace spectral_causal {

void BoundParams::check() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(n) || !positive(T) || !positive(C) || !positive(M) || !positive(c1) || !positive(epsilon))
    throw ArgumentError("bound parameters n, T, C, M, c1, epsilon must be positive");
  if (!(L >= 0.0) || !std::isfinite(L)) throw ArgumentError("L must be nonnegative");
  if (!(decay_base > 0.0 && decay_base < 1.0)) throw ArgumentError("decay_base must lie in (0, 1)");
  if (T < L) throw ArgumentError("need T >= L");
  if (M < 1.0) throw ArgumentError("M must be at least 1");
}

double default_c1(std::size_t n, std::size_t block) {
  return std::sqrt(static_cast<double>(n) * static_cast<double>(block));
}

MinLag min_lag(const BoundParams& p) {
  p.check();
  const double ratio = (1.0 - p.decay_base) * p.epsilon / (2.0 * p.C);
  MinLag out;
  if (ratio >= 1.0) {
    out.vacuous = true;
    return out;
  }
  // premise L >= log_delta(ratio)  <=>  delta^L <= ratio
  auto ok = [&](double l) { return std::pow(p.decay_base, l) <= ratio; };
  double l = std::max(0.0, std::ceil(std::log(ratio) / std::log(p.decay_base)));
  while (l > 0.0 && ok(l - 1.0)) l -= 1.0;
  while (!ok(l)) l += 1.0;
  out.L = static_cast<std::size_t>(l);
  return out;
}

namespace {

BoundResult assemble(const BoundParams& p, double quadratic, double linear) {
  BoundResult r;
  r.quadratic_rate = quadratic;
  r.linear_rate = linear;
  r.quadratic_active = quadratic <= linear;
  const double rate = std::min(quadratic, linear);
  r.log_bound = 2.0 * std::log(p.n) - (p.T - p.L) * rate;
  r.bound = std::exp(std::min(0.0, r.log_bound));
  return r;
}

double window(const BoundParams& p) { return 2.0 * p.L + 1.0; }

}  // namespace

BoundResult psd_bound(const BoundParams& p) {
  p.check();
  const double e1 = 0.9 * p.epsilon;
  const double w = window(p);
  return assemble(p, e1 * e1 / (32.0 * w * w * p.n * p.n * p.C * p.C), e1 / (8.0 * w * p.n * p.C));
}

BoundResult ipsd_bound(const BoundParams& p) {
  p.check();
  const double w = window(p);
  const double m4 = std::pow(p.M, 4.0);
  const double m16 = std::pow(p.M, 16.0);
  return assemble(p, 81.0 * p.epsilon * p.epsilon / (3200.0 * m16 * w * w * p.n * p.n * p.C * p.C),
                  9.0 * p.epsilon / (80.0 * m4 * w * p.n * p.C));
}

BoundResult wiener_bound(const BoundParams& p) {
  p.check();
  const double w = window(p);
  const double m4 = std::pow(p.M, 4.0);
  const double m16 = std::pow(p.M, 16.0);
  return assemble(p, 81.0 * p.epsilon * p.epsilon / (3200.0 * p.c1 * p.c1 * m16 * w * w * p.n * p.n * p.C * p.C),
                  9.0 * p.epsilon / (80.0 * p.c1 * m4 * w * p.n * p.C));
}

std::uint64_t sample_complexity(const BoundParams& params, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw ArgumentError("confidence must lie in (0, 1)");
  BoundParams p = params;
  p.T = std::max(p.L, 1.0);
  p.check();
  constexpr double kCap = 4611686018427387904.0;  // 2^62
  const BoundResult at_l = wiener_bound(p);
  const double rate = std::min(at_l.quadratic_rate, at_l.linear_rate);
  if (!(rate > 0.0)) throw InfeasibleError("bound rate is zero; no finite sample size reaches the confidence");
  const double need = (2.0 * std::log(p.n) - std::log(confidence)) / rate;
  double guess = p.L + std::max(1.0, std::ceil(need));
  if (!(guess < kCap)) throw InfeasibleError("required sample size exceeds 2^62");
  auto bound_at = [&](double t) {
    BoundParams q = p;
    q.T = t;
    return wiener_bound(q).bound;
  };
  while (guess - 1.0 > p.L && bound_at(guess - 1.0) <= confidence) guess -= 1.0;
  while (bound_at(guess) > confidence) {
    guess += 1.0;
    if (!(guess < kCap)) throw InfeasibleError("required sample size exceeds 2^62");
  }
  return static_cast<std::uint64_t>(guess);
}

PerturbationCheck perturbation_check(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double M) {
  if (a.rows() != a.cols() || a.rows() != b.rows() || b.rows() != b.cols())
    throw ArgumentError("perturbation check needs square matrices of equal size");
  auto spectral_norm = [](const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
  };
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  const double delta = spectral_norm(b - a);
  PerturbationCheck out;
  out.premise = es.eigenvalues().minCoeff() >= 1.0 / M && es.eigenvalues().maxCoeff() <= M && M * delta < 1.0;
  out.lhs = spectral_norm(a.inverse() - b.inverse());
  out.rhs = out.premise ? std::pow(M, 4.0) * delta / (1.0 - M * delta) : std::numeric_limits<double>::infinity();
  return out;
}

HeuristicConstants heuristic_constants(const TimeSeriesPanel& panel, std::size_t max_lag, std::size_t num_bins) {
  if (!panel.is_streaming()) throw ArgumentError("heuristic constants need a streaming panel");
  const std::size_t T = panel.segment_length();
  if (T <= max_lag + 1) throw ArgumentError("series too short for the requested lag");
  const Eigen::MatrixXd& x = panel.segment(0);
  std::vector<double> norms(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    const auto len = static_cast<Eigen::Index>(T - k);
    Eigen::MatrixXd r = x.middleCols(static_cast<Eigen::Index>(k), len) * x.leftCols(len).transpose() /
                        static_cast<double>(len);
    norms[k] = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()(0);
  }
  // least-squares slope of log ||R(k)|| against k
  double sk = 0, sy = 0, skk = 0, sky = 0, count = 0;
  for (std::size_t k = 0; k <= max_lag; ++k) {
    if (!(norms[k] > 0.0)) continue;
    const double kk = static_cast<double>(k), y = std::log(norms[k]);
    sk += kk;
    sy += y;
    skk += kk * kk;
    sky += kk * y;
    count += 1;
  }
  HeuristicConstants out;
  const double denom = count * skk - sk * sk;
  const double slope = denom > 0.0 ? (count * sky - sk * sy) / denom : std::log(0.5);
  out.decay_base = std::clamp(std::exp(slope), 1e-6, 1.0 - 1e-6);
  for (std::size_t k = 0; k <= max_lag; ++k)
    out.C = std::max(out.C, norms[k] / std::pow(out.decay_base, static_cast<double>(k)));
  SpectralMatrixField phi = estimate_psd_correlogram(panel, max_lag, FrequencyGrid(num_bins));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& m : phi.phi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  out.M = std::max({1.0, hi, lo > 0.0 ? 1.0 / lo : std::numeric_limits<double>::infinity()});
  return out;
}

}  // namespace spectral_causal
