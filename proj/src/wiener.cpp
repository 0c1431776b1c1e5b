#include "spectral_causal/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "spectral_causal/errors.hpp"

namespace spectral_causal {

std::size_t WienerField::index_of(Node member) const {
  auto it = std::find(conditioning.begin(), conditioning.end(), member);
  if (it == conditioning.end()) throw ArgumentError("node " + std::to_string(member) + " not in conditioning set");
  return static_cast<std::size_t>(it - conditioning.begin());
}

bool WienerField::flagged(std::size_t bin) const { return std::binary_search(flags.begin(), flags.end(), bin); }

std::vector<Node> complement(std::size_t n, Node i) {
  std::vector<Node> out;
  for (Node v = 0; v < n; ++v)
    if (v != i) out.push_back(v);
  return out;
}

namespace {

void check_conditioning(std::size_t n, Node i, const std::vector<Node>& c) {
  if (i >= n) throw ArgumentError("target node out of range");
  if (c.empty()) throw ArgumentError("conditioning set must be nonempty");
  std::set<Node> seen;
  for (Node v : c) {
    if (v >= n) throw ArgumentError("conditioning node out of range");
    if (v == i) throw ArgumentError("conditioning set must exclude the target");
    if (!seen.insert(v).second) throw ArgumentError("conditioning set has duplicates");
  }
}

}  // namespace

BinSolution solve_wiener_bin(const Eigen::MatrixXcd& phi_cc, const Eigen::VectorXcd& rhs, std::size_t bin,
                             const WienerOptions& opts) {
  const Eigen::Index m = phi_cc.rows();
  const double max_diag = phi_cc.diagonal().real().maxCoeff();
  if (!(max_diag > 0.0) || !std::isfinite(max_diag) || !rhs.allFinite())
    throw ConditioningError("conditioning block is zero or non-finite at bin " + std::to_string(bin), {bin});
  const double floor = opts.floor ? *opts.floor : kRelativeFloor * max_diag;
  Eigen::MatrixXcd g = phi_cc.transpose();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
  BinSolution out;
  // lambda_min(G) >= floor  <=>  G - floor*I admits a Cholesky factorization
  Eigen::LLT<Eigen::MatrixXcd> shifted(g - floor * eye);
  if (shifted.info() != Eigen::Success) {
    if (opts.strict)
      throw ConditioningError("conditioning block is rank deficient at bin " + std::to_string(bin), {bin});
    g += std::max(floor, std::numeric_limits<double>::min()) * eye;
    out.regularized = true;
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(g);
  if (llt.info() == Eigen::Success) {
    out.w = llt.solve(rhs);
  } else {
    out.w = g.ldlt().solve(rhs);
  }
  if (!out.w.allFinite()) throw ConditioningError("non-finite Wiener solution at bin " + std::to_string(bin), {bin});
  return out;
}

WienerField wiener_from_psd(const SpectralMatrixField& phi, Node i, const std::vector<Node>& conditioning,
                            const WienerOptions& opts) {
  check_conditioning(phi.n, i, conditioning);
  const auto m = static_cast<Eigen::Index>(conditioning.size());
  WienerField out;
  out.target = i;
  out.conditioning = conditioning;
  out.coeffs.resize(m, static_cast<Eigen::Index>(phi.num_bins()));
  Eigen::MatrixXcd block(m, m);
  Eigen::VectorXcd rhs(m);
  for (std::size_t k = 0; k < phi.num_bins(); ++k) {
    const auto& p = phi.phi[k];
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto ca = static_cast<Eigen::Index>(conditioning[a]);
      rhs(a) = p(static_cast<Eigen::Index>(i), ca);
      for (Eigen::Index b = 0; b < m; ++b) block(a, b) = p(ca, static_cast<Eigen::Index>(conditioning[b]));
    }
    BinSolution s = solve_wiener_bin(block, rhs, k, opts);
    out.coeffs.col(static_cast<Eigen::Index>(k)) = s.w;
    if (s.regularized) out.flags.push_back(k);
  }
  return out;
}

BinSolution wiener_freq(const SpectralEnsemble& ens, Node i, const std::vector<Node>& conditioning, std::size_t bin,
                        const WienerOptions& opts) {
  check_conditioning(ens.n(), i, conditioning);
  if (bin >= ens.grid().size()) throw ArgumentError("bin out of range");
  const std::size_t R = ens.num_segments();
  if (R < conditioning.size() + 1) throw ArgumentError("need R >= |C| + 1 segments");
  const auto& x = ens.bin(bin);
  const auto m = static_cast<Eigen::Index>(conditioning.size());
  Eigen::MatrixXcd xc(x.rows(), m);
  for (Eigen::Index a = 0; a < m; ++a) xc.col(a) = x.col(static_cast<Eigen::Index>(conditioning[a]));
  const double inv_r = 1.0 / static_cast<double>(R);
  // Phi_CC = X_C^T conj(X_C) / R, and rhs(c) = Phi(i, c) = conj(X_C)^T x_i / R
  Eigen::MatrixXcd phi_cc = (xc.transpose() * xc.conjugate()) * inv_r;
  phi_cc = 0.5 * (phi_cc + phi_cc.adjoint()).eval();
  Eigen::VectorXcd rhs = (xc.adjoint() * x.col(static_cast<Eigen::Index>(i))) * inv_r;
  return solve_wiener_bin(phi_cc, rhs, bin, opts);
}

Eigen::MatrixXcd TimeDomainWiener::frequency_response(std::size_t num_bins) const {
  FrequencyGrid grid(num_bins);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(coeffs.rows(), static_cast<Eigen::Index>(num_bins));
  for (std::size_t k = 0; k < num_bins; ++k)
    for (Eigen::Index l = 0; l < coeffs.cols(); ++l)
      out.col(static_cast<Eigen::Index>(k)) +=
          coeffs.col(l).cast<Complex>() * std::polar(1.0, -grid.omega(k) * static_cast<double>(l));
  return out;
}

TimeDomainWiener wiener_time(const TimeSeriesPanel& panel, Node i, const std::vector<Node>& conditioning,
                             std::size_t lag_depth) {
  if (!panel.is_streaming()) throw ArgumentError("time-domain Wiener filter needs a streaming panel");
  check_conditioning(panel.n(), i, conditioning);
  const std::size_t T = panel.segment_length();
  if (lag_depth == 0) throw ArgumentError("lag depth must be positive");
  if (T < 4 * lag_depth * conditioning.size())
    throw ArgumentError("underdetermined lagged design: need T >= 4 * N * |C|");
  const Eigen::MatrixXd& x = panel.segment(0);
  const auto N = static_cast<Eigen::Index>(lag_depth);
  const auto m = static_cast<Eigen::Index>(conditioning.size()) * N;
  const std::size_t rows = T - lag_depth + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(m);
  constexpr std::size_t kBlock = 256;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(kBlock), m);
  Eigen::VectorXd target(static_cast<Eigen::Index>(kBlock));
  for (std::size_t start = 0; start < rows; start += kBlock) {
    const std::size_t count = std::min(kBlock, rows - start);
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t t = start + r + lag_depth - 1;
      target(static_cast<Eigen::Index>(r)) = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
      for (std::size_t c = 0; c < conditioning.size(); ++c)
        for (Eigen::Index l = 0; l < N; ++l)
          design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c) * N + l) =
              x(static_cast<Eigen::Index>(conditioning[c]), static_cast<Eigen::Index>(t) - l);
    }
    auto block = design.topRows(static_cast<Eigen::Index>(count));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    cross.noalias() += block.transpose() * target.head(static_cast<Eigen::Index>(count));
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    throw ArgumentError("lagged design is rank deficient");
  Eigen::VectorXd beta = ldlt.solve(cross);
  if (!beta.allFinite()) throw ArgumentError("lagged design is rank deficient");
  TimeDomainWiener out;
  out.target = i;
  out.conditioning = conditioning;
  out.lag_depth = lag_depth;
  out.coeffs.resize(static_cast<Eigen::Index>(conditioning.size()), N);
  for (std::size_t c = 0; c < conditioning.size(); ++c)
    out.coeffs.row(static_cast<Eigen::Index>(c)) = beta.segment(static_cast<Eigen::Index>(c) * N, N).transpose();
  return out;
}

namespace {

Complex cofactor(const Eigen::MatrixXcd& a, Eigen::Index row, Eigen::Index col) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd minor(n - 1, n - 1);
  for (Eigen::Index r = 0, mr = 0; r < n; ++r) {
    if (r == row) continue;
    for (Eigen::Index c = 0, mc = 0; c < n; ++c) {
      if (c == col) continue;
      minor(mr, mc++) = a(r, c);
    }
    ++mr;
  }
  Complex det = n == 1 ? Complex(1.0, 0.0) : minor.partialPivLu().determinant();
  return ((row + col) % 2 == 0) ? det : -det;
}

}  // namespace

std::vector<Complex> wiener_cofactor(const SpectralMatrixField& phi, Node i, Node k) {
  if (phi.n < 2) throw ArgumentError("cofactor route needs n >= 2");
  if (i >= phi.n || k >= phi.n || i == k) throw ArgumentError("need distinct in-range nodes i, k");
  std::vector<Complex> out(phi.num_bins());
  const auto ii = static_cast<Eigen::Index>(i);
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t b = 0; b < phi.num_bins(); ++b) {
    const auto& p = phi.phi[b];
    const double scale = std::pow(p.cwiseAbs().maxCoeff(), static_cast<double>(phi.n - 1));
    Complex cii = cofactor(p, ii, ii);
    if (!(std::abs(cii) > 1e-13 * scale))
      throw DegeneracyError("cofactor C_ii vanishes at bin " + std::to_string(b));
    out[b] = -cofactor(p, kk, ii) / cii;
  }
  return out;
}

double wiener_linearity_check(const SpectralEnsemble& ens, Node target, const std::vector<LinearComponent>& parts,
                              const std::vector<Node>& conditioning) {
  SpectralMatrixField phi = estimate_psd_ensemble(ens);
  WienerField whole = wiener_from_psd(phi, target, conditioning);
  Eigen::MatrixXcd combined = Eigen::MatrixXcd::Zero(whole.coeffs.rows(), whole.coeffs.cols());
  for (const auto& part : parts) {
    if (part.alpha.size() != ens.grid().size()) throw ArgumentError("alpha must have one value per bin");
    WienerField w = wiener_from_psd(phi, part.node, conditioning);
    for (std::size_t k = 0; k < ens.grid().size(); ++k)
      combined.col(static_cast<Eigen::Index>(k)) += part.alpha[k] * w.coeffs.col(static_cast<Eigen::Index>(k));
  }
  return (whole.coeffs - combined).cwiseAbs().maxCoeff();
}

}  // namespace spectral_causal
