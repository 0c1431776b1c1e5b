#include "spectral_causal/effects.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectral_causal/errors.hpp"
#include "spectral_causal/parallel.hpp"
#include "spectral_causal/spectral.hpp"
#include "spectral_causal/wiener.hpp"

namespace spectral_causal {

namespace {

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) out += (out.empty() ? "" : ",") + l;
  return out;
}

void require_admissible(const AdmissibilityReport& r, const std::string& criterion) {
  if (!r.admissible)
    throw InadmissibleError(criterion + " criterion fails: " + join_labels(r.violated), r.violated);
}

void check_distinct(std::size_t n, Node w, Node y, const NodeSet& z) {
  if (w >= n || y >= n) throw ArgumentError("node out of range");
  if (w == y) throw ArgumentError("cause and effect must differ");
  for (Node v : z) {
    if (v >= n) throw ArgumentError("adjustment node out of range");
    if (v == w || v == y) throw ArgumentError("adjustment set must exclude cause and effect");
  }
}

void check_bin(std::size_t bin, std::size_t num_bins) {
  if (bin >= num_bins) throw ArgumentError("bin " + std::to_string(bin) + " outside the grid");
}

struct Fit {
  Eigen::VectorXcd coef;  // zero for dropped columns
  double resid_var = 0.0;
};

// Complex least squares with an intercept in column 0. Columns with no
// spread are dropped (their coefficient stays zero).
Fit regress(const Eigen::MatrixXcd& x, const Eigen::VectorXcd& y, std::size_t stratum) {
  const Eigen::Index rows = x.rows();
  std::vector<Eigen::Index> kept{0};
  for (Eigen::Index c = 1; c < x.cols(); ++c) {
    const Complex mean = x.col(c).mean();
    const double spread = (x.col(c).array() - mean).abs2().mean();
    const double scale = x.col(c).array().abs2().mean();
    if (spread > 1e-12 * scale && spread > 0.0) kept.push_back(c);
  }
  const auto p = static_cast<Eigen::Index>(kept.size());
  if (rows < p + 1)
    throw CoverageError("stratum " + std::to_string(stratum) + " has too few samples for the regression", stratum);
  Eigen::MatrixXcd design(rows, p);
  for (Eigen::Index c = 0; c < p; ++c) design.col(c) = x.col(kept[static_cast<std::size_t>(c)]);
  Eigen::VectorXcd beta = design.colPivHouseholderQr().solve(y);
  Fit fit;
  fit.coef = Eigen::VectorXcd::Zero(x.cols());
  for (Eigen::Index c = 0; c < p; ++c) fit.coef(kept[static_cast<std::size_t>(c)]) = beta(c);
  fit.resid_var = (y - design * beta).squaredNorm() / static_cast<double>(rows - p);
  return fit;
}

// Row indices split into equal-count groups by the real part of `key`.
std::vector<std::vector<Eigen::Index>> strata_by(const Eigen::VectorXcd& key, std::size_t strata) {
  const auto rows = static_cast<std::size_t>(key.size());
  std::vector<Eigen::Index> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return key(a).real() < key(b).real(); });
  std::vector<std::vector<Eigen::Index>> out(strata);
  for (std::size_t s = 0; s < strata; ++s)
    for (std::size_t r = s * rows / strata; r < (s + 1) * rows / strata; ++r) out[s].push_back(order[r]);
  return out;
}

AdjustedDensity mix(std::vector<MixtureComponent> comps) {
  AdjustedDensity out;
  double second = 0.0;
  for (const auto& c : comps) {
    out.mean += c.weight * c.mean;
    second += c.weight * (c.variance + std::norm(c.mean));
  }
  out.variance = std::max(0.0, second - std::norm(out.mean));
  out.components = std::move(comps);
  return out;
}

Eigen::MatrixXcd gather(const Eigen::MatrixXcd& x, const std::vector<Node>& cols) {
  Eigen::MatrixXcd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(cols[c]));
  return out;
}

Eigen::MatrixXcd with_intercept(const Eigen::MatrixXcd& x) {
  Eigen::MatrixXcd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

struct Projection {
  Eigen::VectorXcd coef;
  double resid_var = 0.0;
};

// Population regression of y on cond at one bin of Phi.
Projection project(const Eigen::MatrixXcd& p, Node y, const std::vector<Node>& cond, std::size_t bin) {
  const auto m = static_cast<Eigen::Index>(cond.size());
  Eigen::MatrixXcd block(m, m);
  Eigen::VectorXcd rhs(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    rhs(a) = p(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(cond[a]));
    for (Eigen::Index b = 0; b < m; ++b)
      block(a, b) = p(static_cast<Eigen::Index>(cond[a]), static_cast<Eigen::Index>(cond[b]));
  }
  WienerOptions opts;
  opts.strict = true;
  Projection out;
  out.coef = solve_wiener_bin(block, rhs, bin, opts).w;
  Complex explained(0.0, 0.0);
  for (Eigen::Index a = 0; a < m; ++a)
    explained += out.coef(a) * p(static_cast<Eigen::Index>(cond[a]), static_cast<Eigen::Index>(y));
  out.resid_var = std::max(0.0, (p(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)) - explained).real());
  return out;
}

}  // namespace

DirectEffectEstimate estimate_direct_effect(const CausalGraph& g, const SpectralMatrixField& phi, Node u, Node y,
                                            const NodeSet& z) {
  if (g.size() != phi.n) throw ArgumentError("graph and spectral field disagree on node count");
  check_distinct(phi.n, u, y, z);
  DirectEffectEstimate out;
  out.report = single_door_check(g, u, y, z);
  require_admissible(out.report, "single-door");
  out.u = u;
  out.y = y;
  out.adjustment.assign(z.begin(), z.end());
  std::vector<Node> cond{u};
  cond.insert(cond.end(), z.begin(), z.end());
  WienerField w = wiener_from_psd(phi, y, cond);
  out.alpha.resize(w.num_bins());
  for (std::size_t k = 0; k < w.num_bins(); ++k) out.alpha[k] = w.coeffs(0, static_cast<Eigen::Index>(k));
  out.flags = w.flags;
  return out;
}

DirectEffectEstimate estimate_direct_effect(const CausalGraph& g, const SpectralEnsemble& ens, Node u, Node y,
                                            const NodeSet& z) {
  if (ens.num_segments() < z.size() + 2) throw ArgumentError("need R >= |Z| + 2 segments");
  return estimate_direct_effect(g, estimate_psd_ensemble(ens), u, y, z);
}

FreqGaussianSummary summarize(const SpectralEnsemble& ens) {
  const std::size_t R = ens.num_segments();
  if (R < 2) throw ArgumentError("Gaussian summary needs at least two segments");
  FreqGaussianSummary out;
  out.n = ens.n();
  out.by_node.assign(ens.n(), std::vector<BinGaussian>(ens.grid().size()));
  for (std::size_t k = 0; k < ens.grid().size(); ++k) {
    const auto& x = ens.bin(k);
    for (std::size_t i = 0; i < ens.n(); ++i) {
      const auto col = x.col(static_cast<Eigen::Index>(i));
      BinGaussian& g = out.by_node[i][k];
      g.count = R;
      g.mean = col.mean();
      Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
      for (Eigen::Index r = 0; r < col.size(); ++r) {
        const Complex d = col(r) - g.mean;
        c(0, 0) += d.real() * d.real();
        c(0, 1) += d.real() * d.imag();
        c(1, 1) += d.imag() * d.imag();
      }
      c(1, 0) = c(0, 1);
      g.cov = c / static_cast<double>(R - 1);
    }
  }
  return out;
}

AdjustedDensity backdoor_adjust(const CausalGraph& g, const SpectralEnsemble& ens, Node w, Node y, const NodeSet& z,
                                Complex w_star, std::size_t bin, std::size_t strata) {
  if (g.size() != ens.n()) throw ArgumentError("graph and ensemble disagree on node count");
  check_distinct(ens.n(), w, y, z);
  check_bin(bin, ens.grid().size());
  if (strata == 0) throw ArgumentError("need at least one stratum");
  require_admissible(back_door_check(g, {w}, {y}, z), "back-door");

  const Eigen::MatrixXcd& x = ens.bin(bin);
  std::vector<Node> regressors{w};
  regressors.insert(regressors.end(), z.begin(), z.end());
  const Eigen::MatrixXcd design = with_intercept(gather(x, regressors));
  const Eigen::VectorXcd target = x.col(static_cast<Eigen::Index>(y));

  std::vector<std::vector<Eigen::Index>> groups;
  if (z.empty()) {
    groups.emplace_back(static_cast<std::size_t>(x.rows()));
    std::iota(groups[0].begin(), groups[0].end(), 0);
  } else {
    groups = strata_by(x.col(static_cast<Eigen::Index>(*z.begin())), strata);
  }
  std::vector<MixtureComponent> comps;
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const auto& rows = groups[s];
    if (rows.size() < regressors.size() + 2)
      throw CoverageError("stratum " + std::to_string(s) + " is empty or underpopulated", s);
    Eigen::MatrixXcd xs(static_cast<Eigen::Index>(rows.size()), design.cols());
    Eigen::VectorXcd ys(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      xs.row(static_cast<Eigen::Index>(r)) = design.row(rows[r]);
      ys(static_cast<Eigen::Index>(r)) = target(rows[r]);
    }
    Fit fit = regress(xs, ys, s);
    Eigen::VectorXcd at = xs.colwise().mean().transpose();
    at(1) = w_star;
    // z still varies inside the stratum; its contribution gamma^T Cov(z) conj(gamma)
    const Eigen::Index nz = xs.cols() - 2;
    double z_spread = 0.0;
    if (nz > 0) {
      const Eigen::MatrixXcd zc = xs.rightCols(nz).rowwise() - at.tail(nz).transpose();
      const Eigen::VectorXcd gamma = fit.coef.tail(nz);
      z_spread = (zc * gamma).squaredNorm() / static_cast<double>(rows.size());
    }
    MixtureComponent c;
    c.weight = static_cast<double>(rows.size()) / static_cast<double>(x.rows());
    c.mean = (at.transpose() * fit.coef)(0);
    c.variance = fit.resid_var + z_spread;
    comps.push_back(c);
  }
  return mix(std::move(comps));
}

AdjustedDensity backdoor_adjust(const CausalGraph& g, const SpectralMatrixField& phi, Node w, Node y,
                                const NodeSet& z, Complex w_star, std::size_t bin) {
  if (g.size() != phi.n) throw ArgumentError("graph and spectral field disagree on node count");
  check_distinct(phi.n, w, y, z);
  check_bin(bin, phi.num_bins());
  require_admissible(back_door_check(g, {w}, {y}, z), "back-door");
  const auto& p = phi.phi[bin];
  std::vector<Node> cond{w};
  cond.insert(cond.end(), z.begin(), z.end());
  Projection proj = project(p, y, cond, bin);
  // Var(c^T Z) = c^T Phi_ZZ conj(c)
  double spread = 0.0;
  for (std::size_t a = 1; a < cond.size(); ++a)
    for (std::size_t b = 1; b < cond.size(); ++b)
      spread += (proj.coef(static_cast<Eigen::Index>(a)) *
                 p(static_cast<Eigen::Index>(cond[a]), static_cast<Eigen::Index>(cond[b])) *
                 std::conj(proj.coef(static_cast<Eigen::Index>(b))))
                    .real();
  MixtureComponent c{1.0, proj.coef(0) * w_star, proj.resid_var + std::max(0.0, spread)};
  return mix({c});
}

AdjustedDensity frontdoor_adjust(const CausalGraph& g, const SpectralEnsemble& ens, Node w, Node y,
                                 const NodeSet& z, Complex w_star, std::size_t bin, std::size_t strata) {
  if (g.size() != ens.n()) throw ArgumentError("graph and ensemble disagree on node count");
  check_distinct(ens.n(), w, y, z);
  check_bin(bin, ens.grid().size());
  if (z.empty()) throw ArgumentError("front-door adjustment needs a nonempty mediator set");
  if (strata == 0) throw ArgumentError("need at least one stratum");
  require_admissible(front_door_check(g, {w}, {y}, z), "front-door");

  const Eigen::MatrixXcd& x = ens.bin(bin);
  const std::vector<Node> mediators(z.begin(), z.end());
  const auto m = static_cast<Eigen::Index>(mediators.size());
  const Eigen::VectorXcd wcol = x.col(static_cast<Eigen::Index>(w));

  // z | w*: mean and residual covariance
  const Eigen::MatrixXcd wdesign = with_intercept(wcol);
  Eigen::VectorXcd z_mean(m);
  Eigen::MatrixXcd resid(x.rows(), m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::VectorXcd za = x.col(static_cast<Eigen::Index>(mediators[static_cast<std::size_t>(a)]));
    Fit f = regress(wdesign, za, 0);
    z_mean(a) = f.coef(0) + f.coef(1) * w_star;
    resid.col(a) = za - wdesign * f.coef;
  }
  const Eigen::MatrixXcd z_cov = (resid.transpose() * resid.conjugate()) / static_cast<double>(x.rows() - 2);

  std::vector<Node> regressors{w};
  regressors.insert(regressors.end(), mediators.begin(), mediators.end());
  const Eigen::MatrixXcd design = with_intercept(gather(x, regressors));
  const Eigen::VectorXcd target = x.col(static_cast<Eigen::Index>(y));
  auto groups = strata_by(wcol, strata);
  std::vector<MixtureComponent> comps;
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const auto& rows = groups[s];
    if (rows.size() < regressors.size() + 2)
      throw CoverageError("stratum " + std::to_string(s) + " is empty or underpopulated", s);
    Eigen::MatrixXcd xs(static_cast<Eigen::Index>(rows.size()), design.cols());
    Eigen::VectorXcd ys(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      xs.row(static_cast<Eigen::Index>(r)) = design.row(rows[r]);
      ys(static_cast<Eigen::Index>(r)) = target(rows[r]);
    }
    Fit fit = regress(xs, ys, s);
    const Complex w_bar = xs.col(1).mean();
    const double w_spread = (xs.col(1).array() - w_bar).abs2().mean();
    const Eigen::VectorXcd gamma = fit.coef.tail(m);
    MixtureComponent c;
    c.weight = static_cast<double>(rows.size()) / static_cast<double>(x.rows());
    c.mean = fit.coef(0) + fit.coef(1) * w_bar + (gamma.transpose() * z_mean)(0);
    c.variance = fit.resid_var + std::norm(fit.coef(1)) * w_spread +
                 std::max(0.0, (gamma.transpose() * z_cov * gamma.conjugate())(0).real());
    comps.push_back(c);
  }
  return mix(std::move(comps));
}

AdjustedDensity frontdoor_adjust(const CausalGraph& g, const SpectralMatrixField& phi, Node w, Node y,
                                 const NodeSet& z, Complex w_star, std::size_t bin) {
  if (g.size() != phi.n) throw ArgumentError("graph and spectral field disagree on node count");
  check_distinct(phi.n, w, y, z);
  check_bin(bin, phi.num_bins());
  if (z.empty()) throw ArgumentError("front-door adjustment needs a nonempty mediator set");
  require_admissible(front_door_check(g, {w}, {y}, z), "front-door");
  const auto& p = phi.phi[bin];
  const std::vector<Node> mediators(z.begin(), z.end());
  const auto m = static_cast<Eigen::Index>(mediators.size());
  const auto wi = static_cast<Eigen::Index>(w);
  const double pww = p(wi, wi).real();
  if (!(pww > 0.0)) throw ConditioningError("cause has zero power at bin " + std::to_string(bin), {bin});
  Eigen::VectorXcd gain(m);  // regression of each mediator on w
  for (Eigen::Index a = 0; a < m; ++a) gain(a) = p(static_cast<Eigen::Index>(mediators[static_cast<std::size_t>(a)]), wi) / pww;
  Eigen::MatrixXcd z_cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      z_cov(a, b) = p(static_cast<Eigen::Index>(mediators[static_cast<std::size_t>(a)]),
                      static_cast<Eigen::Index>(mediators[static_cast<std::size_t>(b)])) -
                    gain(a) * std::conj(gain(b)) * pww;
  std::vector<Node> cond{w};
  cond.insert(cond.end(), mediators.begin(), mediators.end());
  Projection proj = project(p, y, cond, bin);
  const Eigen::VectorXcd gamma = proj.coef.tail(m);
  MixtureComponent c;
  c.weight = 1.0;
  c.mean = (gamma.transpose() * gain)(0) * w_star;
  c.variance = proj.resid_var + std::norm(proj.coef(0)) * pww +
               std::max(0.0, (gamma.transpose() * z_cov * gamma.conjugate())(0).real());
  return mix({c});
}

InterventionContrast contrast_summaries(const FreqGaussianSummary& arm1, const FreqGaussianSummary& arm2,
                                        Node intervened, double z_crit) {
  if (arm1.n != arm2.n || arm1.by_node.empty() || arm1.by_node[0].size() != arm2.by_node[0].size())
    throw ArgumentError("arms disagree in shape");
  if (intervened >= arm1.n) throw ArgumentError("intervened node out of range");
  constexpr double kVarianceFloor = 1e-24;
  const std::size_t bins = arm1.by_node[0].size();
  InterventionContrast out;
  out.intervened = intervened;
  out.z_crit = z_crit;
  for (Node i = 0; i < arm1.n; ++i) {
    NodeContrast nc;
    nc.node = i;
    for (std::size_t k = 0; k < bins; ++k) {
      const BinGaussian& a = arm1.at(i, k);
      const BinGaussian& b = arm2.at(i, k);
      const double n1 = static_cast<double>(a.count), n2 = static_cast<double>(b.count);
      const double se_re = std::sqrt(std::max(a.cov(0, 0) / n1 + b.cov(0, 0) / n2, kVarianceFloor));
      const double se_im = std::sqrt(std::max(a.cov(1, 1) / n1 + b.cov(1, 1) / n2, kVarianceFloor));
      nc.z_re.push_back((b.mean.real() - a.mean.real()) / se_re);
      nc.z_im.push_back((b.mean.imag() - a.mean.imag()) / se_im);
      nc.re_means_1.push_back(a.mean.real());
      nc.im_means_1.push_back(a.mean.imag());
      nc.re_means_2.push_back(b.mean.real());
      nc.im_means_2.push_back(b.mean.imag());
      for (bool imag : {false, true}) {
        const double z = std::abs(imag ? nc.z_im.back() : nc.z_re.back());
        if (z > nc.max_z) {
          nc.max_z = z;
          nc.argmax_bin = k;
          nc.argmax_imag = imag;
        }
      }
    }
    nc.affected = nc.max_z > z_crit;
    out.nodes.push_back(std::move(nc));
  }
  return out;
}

InterventionContrast intervention_contrast(const ArSpec& spec, const InterventionSpec& iv1,
                                           const InterventionSpec& iv2, std::size_t R, std::size_t N,
                                           std::uint64_t seed, double z_crit) {
  if (iv1.node != iv2.node) throw ArgumentError("both arms must intervene on the same node");
  if (iv1.node >= spec.n()) throw ArgumentError("intervened node out of range");
  FreqGaussianSummary arms[2];
  const InterventionSpec* ivs[2] = {&iv1, &iv2};
  for (int a = 0; a < 2; ++a) {
    ArRun run;
    run.mode = ArRun::Mode::restart;
    run.length = N;
    run.segments = R;
    run.seed = mix_seed(seed, static_cast<std::uint64_t>(a) + 1);
    arms[a] = summarize(segment_fft(apply_intervention(spec, run, *ivs[a])));
  }
  InterventionContrast out = contrast_summaries(arms[0], arms[1], iv1.node, z_crit);
  out.segments = R;
  out.segment_length = N;
  return out;
}

InterventionDensity atomic_intervention_density(const LdimSpec& spec, Node i, Complex value, std::size_t bin) {
  const std::size_t n = spec.n();
  if (i >= n) throw ArgumentError("intervened node out of range");
  check_bin(bin, spec.grid().size());
  Eigen::MatrixXcd h = spec.h().values[bin];
  CausalGraph at_bin(n);
  for (Node v = 0; v < n; ++v)
    for (Node u = 0; u < n; ++u)
      if (u != v && std::abs(h(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u))) > kEdgeTolerance)
        at_bin.add_edge(u, v);
  if (on_directed_cycle(at_bin, i))
    throw UnsupportedStructureError("node " + std::to_string(i) + " lies on a directed cycle at bin " +
                                    std::to_string(bin));
  const auto ii = static_cast<Eigen::Index>(i);
  const auto nn = static_cast<Eigen::Index>(n);
  h.row(ii).setZero();
  const Eigen::MatrixXcd gain = (Eigen::MatrixXcd::Identity(nn, nn) - h).partialPivLu().inverse();
  Eigen::VectorXd d = spec.noise().diag.col(static_cast<Eigen::Index>(bin));
  d(ii) = 0.0;
  InterventionDensity out;
  out.intervened = i;
  out.bin = bin;
  out.mean = gain.col(ii) * value;
  Eigen::MatrixXcd cov = gain * d.cast<Complex>().asDiagonal() * gain.adjoint();
  out.cov = 0.5 * (cov + cov.adjoint());
  const std::size_t N = spec.grid().size();
  const bool real_bin = bin == 0 || 2 * bin == N;
  for (Eigen::Index v = 0; v < nn; ++v) {
    const double var = out.cov(v, v).real();
    Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
    if (real_bin) {
      c(0, 0) = var;
    } else {
      c(0, 0) = c(1, 1) = 0.5 * var;
    }
    out.re_im_cov.push_back(c);
  }
  return out;
}

}  // namespace spectral_causal
