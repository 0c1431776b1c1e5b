#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "spectral_causal/errors.hpp"
#include "spectral_causal/simulate.hpp"
#include "spectral_causal/spectral.hpp"
#include "spectral_causal/wiener.hpp"

using namespace spectral_causal;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd random_hpd(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = Complex(nd(rng), nd(rng));
  return a * a.adjoint() + 0.5 * Eigen::MatrixXcd::Identity(n, n);
}

SpectralMatrixField single_bin(const Eigen::MatrixXcd& m) {
  SpectralMatrixField f;
  f.n = static_cast<std::size_t>(m.rows());
  f.phi = {m};
  return f;
}

Eigen::MatrixXcd sub(const Eigen::MatrixXcd& m, const std::vector<Node>& rows, const std::vector<Node>& cols) {
  Eigen::MatrixXcd out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          m(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
  return out;
}

}  // namespace

TEST(Complement, ExcludesTarget) { EXPECT_EQ(complement(4, 2), (std::vector<Node>{0, 1, 3})); }

TEST(WienerFromPsd, Sem2RecoversDirectGain) {
  const std::size_t N = 32;
  auto phi = closed_form_psd(oracle::sem2(N));
  auto f = wiener_from_psd(phi, 0, {1, 2});
  FrequencyGrid grid(N);
  for (std::size_t k = 0; k < N; ++k) {
    EXPECT_LT(std::abs(f.at(1, k) - oracle::sem2_beta(grid.omega(k))), 1e-10);
    EXPECT_LT(std::abs(f.at(2, k)), 1e-10);
  }
}

TEST(WienerFromPsd, Sem1ProjectionIsBiased) {
  const std::size_t N = 32;
  FrequencyGrid grid(N);
  auto f = wiener_from_psd(closed_form_psd(oracle::sem1(N)), 1, {0, 2});
  for (std::size_t k = 0; k < N; ++k) {
    const Complex a = oracle::sem1_a(grid.omega(k)), b = oracle::sem1_b(grid.omega(k));
    // Unit noise: coefficient of Z is b / (1 + |a|^2) by the precision-matrix expansion.
    EXPECT_LT(std::abs(f.at(0, k) - b / (1.0 + std::norm(a))), 1e-10);
    EXPECT_GT(std::abs(f.at(0, k) - b), 0.3 * std::abs(b));
  }
}

TEST(WienerFromPsd, Sem1WithGeneralNoise) {
  const std::size_t N = 16;
  const double sz = 1.7, sy = 0.6, sx = 2.2;
  auto spec = oracle::ldim_from_gains(3, N, {{0, 1, oracle::sem1_b}, {1, 2, oracle::sem1_a}}, {sz, sy, sx});
  auto f = wiener_from_psd(closed_form_psd(spec), 1, {0, 2});
  FrequencyGrid grid(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Complex a = oracle::sem1_a(grid.omega(k)), b = oracle::sem1_b(grid.omega(k));
    EXPECT_LT(std::abs(f.at(0, k) - b * sx / (sx + std::norm(a) * sy)), 1e-10);
  }
}

TEST(WienerFromPsd, IdentityGivesZero) {
  SpectralMatrixField f = single_bin(Eigen::MatrixXcd::Identity(4, 4));
  auto w = wiener_from_psd(f, 1, {0, 2, 3});
  EXPECT_LT(w.coeffs.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WienerFromPsd, MatchesCramerOracle) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    auto m = random_hpd(4, rng);
    const std::vector<Node> c{0, 2, 3};
    auto w = wiener_from_psd(single_bin(m), 1, c);
    // w^T Phi_CC = Phi_{i,C}  <=>  Phi_CC^T w = Phi_{i,C}^T
    Eigen::MatrixXcd a = sub(m, c, c).transpose();
    Eigen::VectorXcd rhs = sub(m, {1}, c).transpose();
    auto expected = oracle::cramer_solve(a, rhs);
    for (std::size_t j = 0; j < c.size(); ++j)
      EXPECT_LT(std::abs(w.coeffs(static_cast<Eigen::Index>(j), 0) - expected[j]), 1e-10);
  }
}

TEST(WienerFromPsd, ArgumentChecks) {
  auto phi = single_bin(Eigen::MatrixXcd::Identity(3, 3));
  EXPECT_THROW(wiener_from_psd(phi, 0, {}), ArgumentError);
  EXPECT_THROW(wiener_from_psd(phi, 0, {0, 1}), ArgumentError);
}

TEST(WienerFromPsd, SingularBlockIsRegularizedOrRejected) {
  Eigen::VectorXcd v(3);
  v << 1.0, Complex(0.5, 0.5), 2.0;
  Eigen::MatrixXcd m = v * v.adjoint();
  m(0, 0) += 1.0;
  auto w = wiener_from_psd(single_bin(m), 0, {1, 2});
  EXPECT_EQ(w.flags, std::vector<std::size_t>{0});
  EXPECT_TRUE(w.coeffs.allFinite());
  WienerOptions strict;
  strict.strict = true;
  try {
    wiener_from_psd(single_bin(m), 0, {1, 2}, strict);
    FAIL();
  } catch (const ConditioningError& e) {
    EXPECT_EQ(e.bins(), std::vector<std::size_t>{0});
  }
}

TEST(WienerFromPsd, ResidualSpectrumIsRealAndNonnegative) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    auto spec = oracle::random_ldim(oracle::random_dag(5, 0.5, rng), 16, rng);
    auto phi = closed_form_psd(spec);
    for (Node i = 0; i < 5; ++i) {
      const auto c = complement(5, i);
      auto w = wiener_from_psd(phi, i, c);
      for (std::size_t k = 0; k < 16; ++k) {
        Complex resid = phi.phi[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < c.size(); ++j)
          resid -= w.coeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
                   phi.phi[k](static_cast<Eigen::Index>(c[j]), static_cast<Eigen::Index>(i));
        EXPECT_LT(std::abs(resid.imag()), 1e-9);
        EXPECT_GE(resid.real(), -1e-9);
      }
    }
  }
}

TEST(WienerFromPsd, DSeparationImpliesZeroCoefficient) {
  std::mt19937_64 rng(29);
  std::size_t cases = 0;
  for (int rep = 0; rep < 400 && cases < 150; ++rep) {
    auto g = oracle::random_dag(6, 0.35, rng);
    auto phi = closed_form_psd(oracle::random_ldim(g, 8, rng));
    std::uniform_int_distribution<Node> pick(0, 5);
    const Node i = pick(rng), j = pick(rng);
    if (i == j) continue;
    NodeSet z;
    std::bernoulli_distribution coin(0.4);
    for (Node v = 0; v < 6; ++v)
      if (v != i && v != j && coin(rng)) z.insert(v);
    if (!oracle::d_separated(g, {i}, z, {j})) continue;
    ++cases;
    std::vector<Node> c(z.begin(), z.end());
    c.push_back(j);
    auto w = wiener_from_psd(phi, i, c);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_LT(std::abs(w.at(j, k)), 1e-8);
  }
  EXPECT_GE(cases, 100u);
}

TEST(WienerFreq, IdenticalSeriesGiveUnitCoefficient) {
  auto panel = restart_and_record(oracle::acceptance_ar(), 50, 16, 1);
  std::vector<Eigen::MatrixXd> segs;
  for (const auto& s : panel.segments()) {
    Eigen::MatrixXd t(2, 16);
    t.row(0) = s.row(3);
    t.row(1) = s.row(3);
    segs.push_back(t);
  }
  auto ens = segment_fft(TimeSeriesPanel::segmented(segs));
  for (std::size_t k = 0; k < 16; ++k) {
    auto sol = wiener_freq(ens, 0, {1}, k);
    EXPECT_NEAR(std::abs(sol.w(0) - 1.0), 0.0, 1e-9);
  }
}

TEST(WienerFreq, EqualsPsdRouteExactly) {
  auto ens = segment_fft(simulate_circular(oracle::sem2(64), 2000, 4));
  auto phi = estimate_psd_ensemble(ens);
  for (Node i = 0; i < 3; ++i) {
    auto f = wiener_from_psd(phi, i, complement(3, i));
    for (std::size_t k = 0; k < 64; ++k) {
      auto sol = wiener_freq(ens, i, complement(3, i), k);
      EXPECT_LT((sol.w - f.coeffs.col(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(WienerFreq, Sem2SampledWithinThreePercent) {
  const std::size_t N = 64;
  auto ens = segment_fft(simulate_circular(oracle::sem2(N), 10000, 8));
  FrequencyGrid grid(N);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    auto sol = wiener_freq(ens, 0, {1, 2}, k);
    const Complex beta = oracle::sem2_beta(grid.omega(k));
    worst = std::max(worst, std::abs(sol.w(0) - beta));
    scale = std::max(scale, std::abs(beta));
  }
  EXPECT_LT(worst / scale, 0.03);
}

TEST(WienerFreq, IndependentNoiseIsNull) {
  const std::size_t N = 32;
  LdimSpec spec(FrequencyGrid(N), TransferMatrixField::zeros(3, N), NoisePsd::constant(3, N, 1.0));
  auto ens = segment_fft(simulate_circular(spec, 10000, 21));
  for (std::size_t k = 0; k < N; ++k) EXPECT_LT(wiener_freq(ens, 0, {1, 2}, k).w.cwiseAbs().maxCoeff(), 0.05);
}

TEST(WienerFreq, TooFewSegments) {
  auto ens = segment_fft(restart_and_record(oracle::acceptance_ar(), 3, 16, 1));
  EXPECT_THROW(wiener_freq(ens, 0, {1, 2, 3}, 1), ArgumentError);
}

TEST(WienerTime, DelayedCopyIsExact) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(2, 4000);
  for (Eigen::Index t = 0; t < x.cols(); ++t) x(1, t) = nd(rng);
  x(0, 0) = 0.0;
  for (Eigen::Index t = 1; t < x.cols(); ++t) x(0, t) = x(1, t - 1);
  auto tw = wiener_time(TimeSeriesPanel::streaming(x), 0, {1}, 4);
  for (Eigen::Index l = 0; l < 4; ++l) EXPECT_NEAR(tw.coeffs(0, l), l == 1 ? 1.0 : 0.0, 1e-6);
}

TEST(WienerTime, IndependentTargetIsNull) {
  ArSpec s;
  s.self_lags = Eigen::MatrixXd::Zero(3, kArLags);
  s.cross_gains = Eigen::MatrixXd::Zero(3, 3);
  s.noise_std = Eigen::VectorXd::Ones(3);
  auto tw = wiener_time(simulate_ar(s, 100000, 6), 0, {1, 2}, 8);
  EXPECT_LT(tw.coeffs.cwiseAbs().maxCoeff(), 0.02);
}

TEST(WienerTime, LagOneArMatchesGainAndFrequencyRoute) {
  // x0 = 0.6 x1(t-1) + e0, x1 = 0.7 x2(t-1) + e1, x2 = e2.
  ArSpec s;
  s.self_lags = Eigen::MatrixXd::Zero(3, kArLags);
  s.cross_gains = Eigen::MatrixXd::Zero(3, 3);
  s.cross_gains(0, 1) = 0.6;
  s.cross_gains(1, 2) = 0.7;
  s.noise_std = Eigen::VectorXd::Ones(3);
  auto panel = simulate_ar(s, 100000, 10);
  auto tw = wiener_time(panel, 0, {1, 2}, 8);
  const std::size_t N = 64;
  auto resp = tw.frequency_response(N);
  auto ens = segment_fft(panel.resegment(N));
  FrequencyGrid grid(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Complex beta = 0.6 * std::polar(1.0, -grid.omega(k));
    EXPECT_LT(std::abs(resp(0, static_cast<Eigen::Index>(k)) - beta) / 0.6, 0.05);
    auto sol = wiener_freq(ens, 0, {1, 2}, k);
    EXPECT_LT(std::abs(sol.w(0) - resp(0, static_cast<Eigen::Index>(k))) / 0.6, 0.1);
  }
}

TEST(WienerTime, FrequencyResponseIsDftOfLags) {
  TimeDomainWiener tw;
  tw.conditioning = {1};
  tw.lag_depth = 3;
  tw.coeffs = Eigen::MatrixXd(1, 3);
  tw.coeffs << 0.5, -0.25, 2.0;
  auto r = tw.frequency_response(8);
  for (std::size_t k = 0; k < 8; ++k) {
    const double w = 2.0 * kPi * k / 8.0;
    const Complex expected = 0.5 - 0.25 * std::polar(1.0, -w) + 2.0 * std::polar(1.0, -2.0 * w);
    EXPECT_LT(std::abs(r(0, static_cast<Eigen::Index>(k)) - expected), 1e-14);
  }
}

TEST(WienerTime, UnderdeterminedRejected) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 60);
  EXPECT_THROW(wiener_time(TimeSeriesPanel::streaming(x), 0, {1, 2}, 8), ArgumentError);
}

TEST(WienerCofactor, ThreeNodeClosedForm) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    auto m = random_hpd(3, rng);
    auto w = wiener_cofactor(single_bin(m), 0, 1);
    const Complex expected = (m(0, 1) * m(2, 2) - m(0, 2) * m(2, 1)) / (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1));
    EXPECT_LT(std::abs(w[0] - expected), 1e-10 * std::abs(expected) + 1e-14);
  }
}

TEST(WienerCofactor, DiagonalGivesZero) {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  EXPECT_EQ(wiener_cofactor(single_bin(d), 0, 2)[0], Complex(0.0, 0.0));
}

TEST(WienerCofactor, EqualsSolveRoute) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    auto m = random_hpd(4, rng);
    auto f = wiener_from_psd(single_bin(m), 2, complement(4, 2));
    for (Node k : complement(4, 2)) {
      const Complex c = wiener_cofactor(single_bin(m), 2, k)[0];
      EXPECT_LT(std::abs(c - f.at(k, 0)), 1e-8 * std::max(1.0, std::abs(c)));
    }
  }
}

TEST(WienerCofactor, DegenerateMinorRejected) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(3, 3);
  m(1, 2) = m(2, 1) = 1.0;
  m(2, 2) = 1.0;  // rows 1 and 2 equal: minor of (0, 0) is singular
  EXPECT_THROW(wiener_cofactor(single_bin(m), 0, 1), DegeneracyError);
  EXPECT_THROW(wiener_cofactor(single_bin(m), 0, 0), ArgumentError);
}

TEST(WienerLinearity, ExactDecompositions) {
  const std::size_t N = 16, R = 200;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  // Columns: 0 = target, 1 = y1, 2 = y2, 3..4 = conditioning.
  std::vector<Eigen::MatrixXcd> bins(N, Eigen::MatrixXcd(R, 5));
  std::vector<Complex> alpha(N), beta(N);
  for (std::size_t k = 0; k < N; ++k) {
    alpha[k] = Complex(nd(rng), nd(rng));
    beta[k] = Complex(nd(rng), nd(rng));
    for (std::size_t r = 0; r < R; ++r)
      for (Eigen::Index c = 1; c < 5; ++c) bins[k](static_cast<Eigen::Index>(r), c) = Complex(nd(rng), nd(rng));
  }
  auto build = [&](auto combine) {
    auto b = bins;
    for (std::size_t k = 0; k < N; ++k) b[k].col(0) = combine(k, b[k]);
    return SpectralEnsemble(FrequencyGrid(N), b);
  };
  const std::vector<Node> cond{3, 4};
  auto same = build([](std::size_t, const Eigen::MatrixXcd& b) { return Eigen::VectorXcd(b.col(1)); });
  EXPECT_LT(wiener_linearity_check(same, 0, {{1, std::vector<Complex>(N, 1.0)}}, cond), 1e-12);
  auto doubled = build([](std::size_t, const Eigen::MatrixXcd& b) { return Eigen::VectorXcd(2.0 * b.col(1)); });
  EXPECT_LT(wiener_linearity_check(doubled, 0, {{1, std::vector<Complex>(N, 2.0)}}, cond), 1e-12);
  auto mix = build([&](std::size_t k, const Eigen::MatrixXcd& b) {
    return Eigen::VectorXcd(alpha[k] * b.col(1) + beta[k] * b.col(2));
  });
  EXPECT_LT(wiener_linearity_check(mix, 0, {{1, alpha}, {2, beta}}, cond), 1e-8);
  EXPECT_GT(wiener_linearity_check(mix, 0, {{1, beta}, {2, alpha}}, cond), 1e-3);
}

TEST(ThreeWayAgreement, CircularPanelsMatchClosedForm) {
  // Errors are compared with the sampling standard deviation of a complex
  // least-squares coefficient: sqrt(resid_var * [Phi_CC^-1]_jj / R), where
  // resid_var = 1 / K_ii and [Phi_CC^-1]_jj = K_jj - |K_ij|^2 / K_ii, K = Phi^-1.
  const std::size_t N = 32, R = 10000;
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 3; ++rep) {
    auto spec = oracle::random_ldim(oracle::random_dag(5, 0.5, rng), N, rng);
    auto ens = segment_fft(simulate_circular(spec, R, 77 + rep));
    auto phi_hat = estimate_psd_ensemble(ens);
    auto phi = closed_form_psd(spec);
    for (Node i = 0; i < 5; ++i) {
      const auto c = complement(5, i);
      auto est = wiener_from_psd(phi_hat, i, c);
      for (std::size_t j = 0; j < c.size(); ++j) {
        const auto truth = wiener_cofactor(phi, i, c[j]);
        for (std::size_t k = 0; k < N; ++k) {
          EXPECT_LT(std::abs(wiener_freq(ens, i, c, k).w(static_cast<Eigen::Index>(j)) - est.at(c[j], k)), 1e-9);
          const Eigen::MatrixXcd prec = phi.phi[k].inverse();
          const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(c[j]);
          const double kii = prec(ii, ii).real();
          const double sd = std::sqrt((prec(jj, jj).real() - std::norm(prec(ii, jj)) / kii) / kii / R);
          // real-valued bins carry half the degrees of freedom
          const double factor = (k == 0 || k == N / 2) ? 6.0 * std::sqrt(2.0) : 6.0;
          EXPECT_LT(std::abs(est.at(c[j], k) - truth[k]), factor * sd) << "target " << i << " bin " << k;
        }
      }
    }
  }
}
