#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spectral_causal/errors.hpp"
#include "spectral_causal/io.hpp"
#include "spectral_causal/model.hpp"

using namespace spectral_causal;

namespace {

LdimSpec zero_spec(std::size_t n, std::size_t N, double noise = 1.0) {
  return LdimSpec(FrequencyGrid(N), TransferMatrixField::zeros(n, N), NoisePsd::constant(n, N, noise));
}

double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(FrequencyGrid, UniformBins) {
  FrequencyGrid g(8);
  EXPECT_EQ(g.size(), 8u);
  EXPECT_DOUBLE_EQ(g.omega(0), 0.0);
  EXPECT_NEAR(g.omega(2), std::numbers::pi / 2, 1e-15);
  EXPECT_THROW(FrequencyGrid(0), ArgumentError);
}

TEST(ValidateLdim, ZeroTransferPassesWithUnitCondition) {
  auto r = validate_ldim(zero_spec(3, 16));
  EXPECT_TRUE(r.passed());
  ASSERT_EQ(r.condition_numbers.size(), 16u);
  for (double c : r.condition_numbers) EXPECT_NEAR(c, 1.0, 1e-12);
}

TEST(ValidateLdim, NonzeroDiagonalIsReportedAtItsBin) {
  auto h = TransferMatrixField::zeros(2, 8);
  h.values[3](0, 0) = 0.5;
  LdimSpec spec(FrequencyGrid(8), h, NoisePsd::constant(2, 8, 1.0));
  auto r = validate_ldim(spec);
  EXPECT_FALSE(r.passed());
  ASSERT_EQ(r.diagonal_violations.size(), 1u);
  EXPECT_EQ(r.diagonal_violations[0].first, 3u);
  EXPECT_EQ(r.diagonal_violations[0].second, 0u);
}

TEST(ValidateLdim, SingularLoopFailsInvertibility) {
  auto h = TransferMatrixField::zeros(2, 8);
  h.values[5](0, 1) = 1.0;
  h.values[5](1, 0) = 1.0;  // det(I - H) = 1 - 1 = 0
  LdimSpec spec(FrequencyGrid(8), h, NoisePsd::constant(2, 8, 1.0));
  auto r = validate_ldim(spec);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.ill_conditioned_bins, std::vector<std::size_t>{5});
  try {
    closed_form_psd(spec);
    FAIL() << "expected a conditioning error";
  } catch (const ConditioningError& e) {
    EXPECT_EQ(e.bins(), std::vector<std::size_t>{5});
    EXPECT_EQ(e.exit_code(), 4);
  }
}

TEST(ValidateLdim, NonPositiveNoiseIsReported) {
  NoisePsd noise = NoisePsd::constant(2, 4, 1.0);
  noise.diag(1, 2) = 0.0;
  LdimSpec spec(FrequencyGrid(4), TransferMatrixField::zeros(2, 4), noise);
  auto r = validate_ldim(spec);
  ASSERT_EQ(r.noise_violations.size(), 1u);
  EXPECT_EQ(r.noise_violations[0], (std::pair<Node, std::size_t>{1, 2}));
}

TEST(ValidateLdim, DimensionMismatchIsStructural) {
  EXPECT_THROW(LdimSpec(FrequencyGrid(8), TransferMatrixField::zeros(2, 4), NoisePsd::constant(2, 8, 1.0)),
               StructuralError);
  EXPECT_THROW(LdimSpec(FrequencyGrid(4), TransferMatrixField::zeros(2, 4), NoisePsd::constant(3, 4, 1.0)),
               StructuralError);
}

TEST(ClosedFormPsd, ZeroTransferGivesNoise) {
  auto phi = closed_form_psd(zero_spec(3, 8));
  for (const auto& m : phi.phi) EXPECT_LT((m - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-15);
}

TEST(ClosedFormPsd, ChainEntriesMatchHandExpansion) {
  const std::size_t N = 32;
  auto phi = closed_form_psd(oracle::sem1(N));
  FrequencyGrid grid(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Complex b = oracle::sem1_b(grid.omega(k));
    // Y = b Z + e_Y, so Phi_YY = |b|^2 + 1 and Phi_YZ = E[Y conj Z] = b.
    EXPECT_NEAR(std::abs(phi.phi[k](1, 1) - (std::norm(b) + 1.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(phi.phi[k](1, 0) - b), 0.0, 1e-12);
  }
}

TEST(ClosedFormPsd, ScalesWithNoise) {
  std::mt19937_64 rng(7);
  auto g = oracle::random_dag(5, 0.5, rng);
  auto spec = oracle::random_ldim(g, 16, rng);
  NoisePsd scaled = spec.noise();
  scaled.diag *= 3.5;
  auto a = closed_form_psd(spec);
  auto b = closed_form_psd(LdimSpec(spec.grid(), spec.h(), scaled));
  for (std::size_t k = 0; k < 16; ++k) EXPECT_LT(rel_diff(b.phi[k], 3.5 * a.phi[k]), 1e-13);
}

TEST(ClosedFormPsd, HermitianPositiveDefinite) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto spec = oracle::random_ldim(oracle::random_dag(6, 0.4, rng), 16, rng);
    for (const auto& m : closed_form_psd(spec).phi) {
      EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-10 * m.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    }
  }
}

TEST(ClosedFormPsd, InverseMatchesFactoredForm) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    auto spec = oracle::random_ldim(oracle::random_digraph(5, 0.25, rng), 16, rng);
    if (!validate_ldim(spec).passed()) continue;
    auto phi = closed_form_psd(spec);
    auto inv = closed_form_inverse_psd(spec);
    for (std::size_t k = 0; k < 16; ++k) {
      // Factored form built here from H and the noise directly.
      const Eigen::MatrixXcd ih = Eigen::MatrixXcd::Identity(5, 5) - spec.h().values[k];
      Eigen::MatrixXcd noise_inv = Eigen::MatrixXcd::Zero(5, 5);
      for (Eigen::Index i = 0; i < 5; ++i) noise_inv(i, i) = 1.0 / spec.noise().diag(i, static_cast<Eigen::Index>(k));
      const Eigen::MatrixXcd expected = ih.adjoint() * noise_inv * ih;
      EXPECT_LT(rel_diff(inv.phi[k], expected), 1e-8);
      EXPECT_LT(rel_diff(phi.phi[k].inverse(), expected), 1e-8);
    }
  }
}

TEST(ClosedFormPsd, LinearInFirstArgument) {
  // y (node 3) = alpha x0 + beta x1 + own noise; y has no children.
  const std::size_t N = 16;
  auto alpha = [](double w) { return Complex(0.3, -0.2) + 0.5 * std::polar(1.0, -w); };
  auto beta = [](double w) { return Complex(-0.7, 0.1) * std::polar(1.0, -2.0 * w); };
  auto spec = oracle::ldim_from_gains(
      4, N,
      {{0, 1, [](double w) { return 0.6 * std::polar(1.0, -w); }},
       {1, 2, [](double w) { return Complex(0.4, 0.0) - 0.3 * std::polar(1.0, -w); }},
       {0, 3, alpha},
       {1, 3, beta}},
      {1.0, 0.7, 1.3, 0.2});
  auto phi = closed_form_psd(spec);
  FrequencyGrid grid(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double w = grid.omega(k);
    const Complex lhs = phi.phi[k](3, 2);
    const Complex rhs = alpha(w) * phi.phi[k](0, 2) + beta(w) * phi.phi[k](1, 2);
    EXPECT_LT(std::abs(lhs - rhs), 1e-10);
  }
}

TEST(GraphFromTransfer, Examples) {
  auto h = TransferMatrixField::zeros(3, 8);
  EXPECT_TRUE(graph_from_transfer(h, 0.1).edges().empty());
  h.values[4](2, 0) = 0.3;
  auto g = graph_from_transfer(h, 0.1);
  EXPECT_EQ(g.edges(), (std::set<Edge>{{0, 2}}));
  EXPECT_TRUE(graph_from_transfer(h, 0.5).edges().empty());
}

TEST(GraphFromTransfer, MonotoneInTolerance) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto spec = oracle::random_ldim(oracle::random_digraph(5, 0.4, rng), 8, rng);
    std::size_t prev = spec.n() * spec.n();
    for (double tol : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 2.0}) {
      auto g = graph_from_transfer(spec.h(), tol);
      EXPECT_LE(g.edges().size(), prev);
      auto tighter = graph_from_transfer(spec.h(), tol + 0.1);
      for (const auto& e : tighter.edges()) EXPECT_TRUE(g.has_edge(e.first, e.second));
      prev = g.edges().size();
    }
  }
}

TEST(LdimSpec, GraphDerivedFromTransfer) {
  auto spec = oracle::sem2(8);
  EXPECT_EQ(spec.graph().edges(), (std::set<Edge>{{1, 0}, {2, 1}}));
}

TEST(LdimJson, RoundTripIsBitExact) {
  std::mt19937_64 rng(9);
  auto spec = oracle::random_ldim(oracle::random_dag(4, 0.6, rng), 8, rng);
  auto back = ldim_from_json(Json::parse(to_json(spec).dump()));
  ASSERT_EQ(back.n(), spec.n());
  ASSERT_EQ(back.grid().size(), spec.grid().size());
  for (std::size_t k = 0; k < 8; ++k) EXPECT_TRUE(back.h().values[k] == spec.h().values[k]);
  EXPECT_TRUE(back.noise().diag == spec.noise().diag);
}
