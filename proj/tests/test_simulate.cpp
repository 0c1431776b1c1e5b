#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "spectral_causal/errors.hpp"
#include "spectral_causal/simulate.hpp"
#include "spectral_causal/spectral.hpp"

using namespace spectral_causal;

namespace {

ArSpec white_spec(std::size_t n, double sd = 1.0) {
  ArSpec s;
  s.self_lags = Eigen::MatrixXd::Zero(n, kArLags);
  s.cross_gains = Eigen::MatrixXd::Zero(n, n);
  s.noise_std = Eigen::VectorXd::Constant(n, sd);
  return s;
}

Eigen::MatrixXd lag0_cov(const Eigen::MatrixXd& x) {
  return x * x.transpose() / static_cast<double>(x.cols());
}

Complex naive_dft(const std::vector<double>& y, std::size_t k) {
  const double N = static_cast<double>(y.size());
  Complex s = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t)
    s += y[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / N);
  return s / std::sqrt(N);
}

}  // namespace

TEST(SimulateAr, WhiteNoiseLagZeroCovariance) {
  auto panel = simulate_ar(white_spec(3), 100000, 42);
  ASSERT_TRUE(panel.is_streaming());
  auto c = lag0_cov(panel.segment(0));
  EXPECT_LT((c - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(SimulateAr, ZeroNoiseGivesZeroPanel) {
  auto spec = oracle::acceptance_ar();
  spec.noise_std.setZero();
  auto panel = simulate_ar(spec, 500, 1);
  EXPECT_EQ(panel.segment(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SimulateAr, DeterministicGivenSeed) {
  auto spec = oracle::acceptance_ar();
  auto a = simulate_ar(spec, 2000, 99);
  auto b = simulate_ar(spec, 2000, 99);
  auto c = simulate_ar(spec, 2000, 100);
  EXPECT_TRUE(a.segment(0) == b.segment(0));
  EXPECT_FALSE(a.segment(0) == c.segment(0));
}

TEST(SimulateAr, UnstableSpecRejectedWithRadius) {
  auto spec = white_spec(2);
  spec.self_lags(0, 0) = -1.0;  // x0(t) = x0(t-1) + e: unit root
  try {
    simulate_ar(spec, 100, 0);
    FAIL() << "expected a stability error";
  } catch (const StabilityError& e) {
    EXPECT_NEAR(e.spectral_radius(), 1.0, 1e-12);
    EXPECT_NE(std::string(e.what()).find("stability"), std::string::npos);
  }
  spec.self_lags(0, 0) = -(1.0 - 1e-7);  // inside the 1e-6 guard band
  EXPECT_THROW(simulate_ar(spec, 100, 0), StabilityError);
  spec.self_lags(0, 0) = -0.99;
  EXPECT_NO_THROW(simulate_ar(spec, 100, 0));
}

TEST(SimulateAr, CompanionRadiusMatchesAr1Root) {
  auto spec = white_spec(1);
  spec.self_lags(0, 0) = -0.5;
  EXPECT_NEAR(companion_spectral_radius(spec), 0.5, 1e-12);
  // x(t) = 0.5 x(t-1) + 0.3 x(t-2): roots of z^2 - 0.5 z - 0.3.
  spec.self_lags(0, 1) = -0.3;
  const double root = (0.5 + std::sqrt(0.25 + 1.2)) / 2.0;
  EXPECT_NEAR(companion_spectral_radius(spec), root, 1e-12);
}

TEST(SimulateAr, BurnInFollowsRadius) {
  auto spec = white_spec(1);
  spec.self_lags(0, 0) = -0.5;
  EXPECT_EQ(default_burn_in(spec), 20u);  // 10 * 1 / (1 - 0.5)
  spec.self_lags(0, 0) = -0.99999;
  EXPECT_EQ(default_burn_in(spec), kMaxBurnIn);
}

TEST(SimulateAr, MalformedSpecRejected) {
  auto spec = white_spec(3);
  spec.cross_gains(1, 1) = 0.2;
  EXPECT_THROW(simulate_ar(spec, 10, 0), ArgumentError);
  spec = white_spec(3);
  spec.self_lags.resize(3, 2);
  EXPECT_THROW(simulate_ar(spec, 10, 0), StructuralError);
}

TEST(SimulateCircular, WhiteEnsemblePowerMatchesNoise) {
  const std::size_t N = 64;
  NoisePsd noise = NoisePsd::constant(2, N, 1.0);
  noise.diag.row(1).setConstant(2.5);
  LdimSpec spec(FrequencyGrid(N), TransferMatrixField::zeros(2, N), noise);
  auto ens = segment_fft(simulate_circular(spec, 10000, 3));
  for (std::size_t k = 0; k < N; ++k)
    for (Node i = 0; i < 2; ++i) {
      const double power = ens.bin(k).col(static_cast<Eigen::Index>(i)).squaredNorm() / 10000.0;
      EXPECT_NEAR(power / noise.diag(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), 1.0, 0.05);
    }
}

TEST(SimulateCircular, SingleEdgeCrossSpectrumRecoversGain) {
  const std::size_t N = 64;
  auto gain = [](double w) { return 0.8 * std::polar(1.0, -w); };
  auto spec = oracle::ldim_from_gains(2, N, {{0, 1, gain}}, {1.0, 0.25});
  auto ens = segment_fft(simulate_circular(spec, 10000, 17));
  FrequencyGrid grid(N);
  for (std::size_t k = 0; k < N; ++k) {
    const auto& b = ens.bin(k);
    // sum X1 conj(X0) / sum |X0|^2; Eigen's dot conjugates its left operand
    const Complex ratio = b.col(0).dot(b.col(1)) / b.col(0).squaredNorm();
    EXPECT_LT(std::abs(ratio - gain(grid.omega(k))), 0.02 * 0.8) << "bin " << k;
  }
}

TEST(SimulateCircular, ZeroNoiseGivesZeroPanel) {
  auto spec = oracle::sem2(16);
  LdimSpec quiet(spec.grid(), spec.h(), NoisePsd::constant(3, 16, 0.0));
  auto panel = simulate_circular(quiet, 10, 0);
  for (const auto& s : panel.segments()) EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SimulateCircular, EnsemblePsdConvergesToClosedForm) {
  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 3; ++rep) {
    auto spec = oracle::random_ldim(oracle::random_dag(6, 0.4, rng), 64, rng);
    auto est = estimate_psd_ensemble(segment_fft(simulate_circular(spec, 10000, 100 + rep)));
    EXPECT_LT(field_relative_error(est, closed_form_psd(spec)), 0.05);
  }
}

TEST(SimulateCircular, RejectsNonPowerOfTwoGrid) {
  EXPECT_THROW(simulate_circular(oracle::sem2(12), 4, 0), ArgumentError);
}

TEST(RestartAndRecord, SingleSegmentEqualsUnburnedStream) {
  auto spec = oracle::acceptance_ar();
  auto seg = restart_and_record(spec, 1, 64, 5);
  auto stream = simulate_ar(spec, 64, 5, 0);
  EXPECT_TRUE(seg.segment(0) == stream.segment(0));
}

TEST(RestartAndRecord, SegmentsAreIndependent) {
  auto spec = oracle::acceptance_ar();
  const std::size_t R = 10000;
  auto panel = restart_and_record(spec, R, 8, 11);
  ASSERT_EQ(panel.num_segments(), R);
  // Lag-one correlation across consecutive segments of x_i(1) (x_i(0) is pure noise).
  for (Node i = 0; i < spec.n(); ++i) {
    double sxy = 0, sxx = 0, syy = 0, mx = 0;
    for (std::size_t r = 0; r < R; ++r) mx += panel.segment(r)(static_cast<Eigen::Index>(i), 1);
    mx /= R;
    for (std::size_t r = 0; r + 1 < R; ++r) {
      const double a = panel.segment(r)(static_cast<Eigen::Index>(i), 1) - mx;
      const double b = panel.segment(r + 1)(static_cast<Eigen::Index>(i), 1) - mx;
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(static_cast<double>(R)));
  }
}

TEST(RestartAndRecord, ZeroNoiseGivesZeroSegments) {
  auto spec = oracle::acceptance_ar();
  spec.noise_std.setZero();
  auto panel = restart_and_record(spec, 5, 16, 0);
  for (const auto& s : panel.segments()) EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Intervention, ForcedNodeFollowsSequenceExactly) {
  auto spec = oracle::acceptance_ar();
  InterventionSpec iv{1, {}};
  for (int t = 0; t < 16; ++t) iv.sequence.push_back(t < 8 ? 1.5 : -0.5);
  auto panel = apply_intervention(spec, ArRun{ArRun::Mode::restart, 32, 50, 3, std::nullopt}, iv);
  for (const auto& s : panel.segments())
    for (Eigen::Index t = 0; t < 32; ++t) EXPECT_EQ(s(1, t), iv.sequence[static_cast<std::size_t>(t) % 16]);
  ASSERT_TRUE(panel.meta().intervention.has_value());
  EXPECT_EQ(panel.meta().intervention->node, 1u);
}

TEST(Intervention, ZeroSequenceZeroesSpectrum) {
  auto spec = oracle::acceptance_ar();
  auto panel = apply_intervention(spec, ArRun{ArRun::Mode::restart, 64, 20, 0, std::nullopt},
                                  InterventionSpec{2, std::vector<double>(64, 0.0)});
  auto ens = segment_fft(panel);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_EQ(ens.bin(k).col(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Intervention, NaturalPathOnSourceLeavesRunUnchanged) {
  auto spec = oracle::acceptance_ar();
  spec.self_lags(0, 0) = 0.0;  // source node is then pure noise
  auto natural = restart_and_record(spec, 1, 64, 8);
  InterventionSpec iv{0, {}};
  for (Eigen::Index t = 0; t < 64; ++t) iv.sequence.push_back(natural.segment(0)(0, t));
  auto forced = apply_intervention(spec, ArRun{ArRun::Mode::restart, 64, 1, 8, std::nullopt}, iv);
  EXPECT_TRUE(forced.segment(0) == natural.segment(0));
}

TEST(Intervention, SquareWaveGivesExactSincSpectrum) {
  std::vector<double> y1(64, 0.0);
  std::fill(y1.begin(), y1.begin() + 32, 1.0);
  auto panel = apply_intervention(oracle::acceptance_ar(), ArRun{ArRun::Mode::restart, 64, 4, 1, std::nullopt},
                                  InterventionSpec{1, y1});
  auto ens = segment_fft(panel);
  for (std::size_t k = 0; k < 64; ++k)
    for (std::size_t r = 0; r < 4; ++r) EXPECT_LT(std::abs(ens.coeff(r, 1, k) - naive_dft(y1, k)), 1e-12);
  // DC holds 32 / sqrt(64); even bins other than DC vanish.
  EXPECT_NEAR(ens.coeff(0, 1, 0).real(), 4.0, 1e-12);
  EXPECT_LT(std::abs(ens.coeff(0, 1, 2)), 1e-12);
}

TEST(Intervention, RejectsBadSequences) {
  auto spec = oracle::acceptance_ar();
  ArRun run{ArRun::Mode::restart, 64, 2, 0, std::nullopt};
  EXPECT_THROW(apply_intervention(spec, run, InterventionSpec{1, std::vector<double>(48, 1.0)}), ArgumentError);
  EXPECT_THROW(apply_intervention(spec, run, InterventionSpec{9, std::vector<double>(64, 1.0)}), ArgumentError);
}

TEST(Intervention, StabilityStillRequiredOfTheNaturalSpec) {
  auto spec = white_spec(2);
  spec.self_lags(0, 0) = -1.2;  // explosive on its own
  EXPECT_THROW(simulate_ar(spec, 10, 0), StabilityError);
  EXPECT_THROW(apply_intervention(spec, ArRun{ArRun::Mode::restart, 8, 2, 0, std::nullopt},
                                  InterventionSpec{0, std::vector<double>(8, 1.0)}),
               StabilityError);
}

TEST(Panel, ResegmentDropsTail) {
  auto panel = simulate_ar(white_spec(2), 1000, 0);
  auto seg = panel.resegment(64);
  EXPECT_EQ(seg.num_segments(), 15u);
  EXPECT_EQ(seg.segment_length(), 64u);
  EXPECT_TRUE(seg.segment(3) == panel.segment(0).middleCols(192, 64));
}
