#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "eki/seq_model.hpp"

namespace {

TEST(EffectiveDimension, FifthRootForPTwo) { EXPECT_EQ(eki::effective_dimension(100000, 2.0, 1.0), 10u); }

TEST(EffectiveDimension, FloorAtOne) {
  EXPECT_EQ(eki::effective_dimension(1, 2.0, 1.0), 1u);
  EXPECT_EQ(eki::effective_dimension(1, 0.5, 1.0), 1u);
  EXPECT_EQ(eki::effective_dimension(10, 2.0, 0.01), 1u);
}

TEST(EffectiveDimension, OverrideBypassesRule) {
  eki::ModelConfig cfg;
  cfg.dim_override = 100;
  for (std::size_t n : {10u, 10000u, 1000000u}) EXPECT_EQ(eki::model_dimension(cfg, n), 100u);
  cfg.dim_override.reset();
  EXPECT_EQ(eki::model_dimension(cfg, 100000), 10u);
}

TEST(GroundTruth, PowerLawCoefficients) {
  const auto v = eki::ground_truth(3, 2.5);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[1], std::pow(2.0, -2.5));
  EXPECT_DOUBLE_EQ(v[2], std::pow(3.0, -2.5));
  EXPECT_DOUBLE_EQ(eki::ground_truth(5, 0.75)[0], 1.0);
  EXPECT_THROW(eki::ground_truth(3, 0.5), eki::InvalidArgument);
}

TEST(GroundTruth, NormMatchesIndependentSum) {
  const auto v = eki::ground_truth(100, 2.5);
  double acc = 0.0;
  for (int i = 1; i <= 100; ++i) acc += 1.0 / std::pow(double(i), 5.0);
  EXPECT_NEAR(v.squaredNorm(), acc, 1e-12);
}

TEST(GroundTruth, SobolevPartialSumsConvergeBelowTwoAndDivergeAbove) {
  const auto v = eki::ground_truth(200000, 2.5);
  const auto below = eki::sobolev_partial_sums(v, 1.9);
  const auto above = eki::sobolev_partial_sums(v, 2.1);
  // increments over dyadic blocks [N, 2N): shrinking below, growing above
  double prev_below = HUGE_VAL, prev_above = 0.0;
  for (Eigen::Index N = 100; 2 * N <= v.size(); N *= 2) {
    const double ib = below[2 * N - 1] - below[N - 1];
    const double ia = above[2 * N - 1] - above[N - 1];
    EXPECT_LT(ib, prev_below);
    EXPECT_GT(ia, prev_above);
    prev_below = ib;
    prev_above = ia;
  }
}

TEST(ApplyForward, DiagonalAction) {
  const auto basis = eki::eigenpairs(6);
  eki::SeqVector e1 = eki::SeqVector::Zero(6);
  e1[0] = 1.0;
  const auto k1 = eki::apply_forward(basis, e1);
  EXPECT_DOUBLE_EQ(k1[0], 4.0);
  EXPECT_EQ(k1.tail(5).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(eki::apply_forward(basis, eki::SeqVector::Zero(6)).cwiseAbs().maxCoeff(), 0.0);

  eki::SeqVector v(6);
  v << 1.0, -2.0, 0.5, 3.0, -1.0, 7.0;
  const auto twice = eki::apply_forward(basis, eki::apply_forward(basis, v));
  for (Eigen::Index i = 0; i < 6; ++i)
    EXPECT_DOUBLE_EQ(twice[i], basis.singular_values()[i] * basis.singular_values()[i] * v[i]);
}

TEST(Observations, NoiseFreeIsExact) {
  const auto basis = eki::eigenpairs(50);
  const auto v0 = eki::ground_truth(50, 2.5);
  const auto obs = eki::generate_observations(basis, v0, 100, 50, 1, 0, 0, true);
  EXPECT_EQ((obs.ytilde - eki::apply_forward(basis, v0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Observations, DeterministicGivenSeed) {
  const auto basis = eki::eigenpairs(40);
  const auto v0 = eki::ground_truth(40, 2.5);
  const auto a = eki::generate_observations(basis, v0, 1000, 40, 99, 3, 1);
  // draw from unrelated streams in between
  (void)eki::generate_observations(basis, v0, 1000, 40, 5, 0, 0);
  const auto b = eki::generate_observations(basis, v0, 1000, 40, 99, 3, 1);
  EXPECT_TRUE(a.ytilde == b.ytilde);
  const auto c = eki::generate_observations(basis, v0, 1000, 40, 99, 4, 1);
  EXPECT_FALSE(a.ytilde == c.ytilde);
}

TEST(Observations, NoiseVarianceCalibration) {
  const std::size_t D = 10000, n = 400;
  const auto basis = eki::eigenpairs(D);
  const auto v0 = eki::ground_truth(D, 2.5);
  const auto obs = eki::generate_observations(basis, v0, n, D, 11);
  const Eigen::VectorXd noise = obs.ytilde - eki::apply_forward(basis, v0);
  const double var = (noise.array() - noise.mean()).square().sum() / double(D - 1);
  EXPECT_NEAR(var, 1.0 / n, 0.05 / n);
}

TEST(Observations, DimensionPreconditions) {
  const auto basis = eki::eigenpairs(10);
  EXPECT_THROW(eki::generate_observations(basis, eki::ground_truth(10, 2.5), 10, 11, 1), eki::InvalidArgument);
  EXPECT_THROW(eki::generate_observations(basis, eki::ground_truth(12, 2.5), 10, 5, 1), eki::InvalidArgument);
}

TEST(Residual, ZeroAtTruthWithoutNoise) {
  const auto basis = eki::eigenpairs(20);
  const auto v0 = eki::ground_truth(20, 2.5);
  const auto obs = eki::generate_observations(basis, v0, 100, 20, 1, 0, 0, true);
  EXPECT_EQ(eki::residual(basis, obs, v0), 0.0);
  EXPECT_DOUBLE_EQ(eki::residual(basis, obs, eki::SeqVector::Zero(20)), obs.ytilde.squaredNorm());
  EXPECT_THROW(eki::residual(basis, obs, eki::SeqVector::Zero(19)), eki::InvalidArgument);
}

TEST(Residual, NonNegativeAndZeroOnlyAtInterpolant) {
  const auto basis = eki::eigenpairs(5);
  const auto obs = eki::generate_observations(basis, eki::ground_truth(5, 2.5), 50, 5, 3);
  const eki::SeqVector interp = obs.ytilde.cwiseQuotient(basis.singular_values());
  EXPECT_NEAR(eki::residual(basis, obs, interp), 0.0, 1e-28);
  eki::SeqVector off = interp;
  off[2] += 1e-3;
  EXPECT_GT(eki::residual(basis, obs, off), 0.0);
}

TEST(Residual, MonteCarloMeanAtTruthIsDOverN) {
  const std::size_t D = 100, n = 10000, draws = 10000;
  const auto basis = eki::eigenpairs(D);
  const auto v0 = eki::ground_truth(D, 2.5);
  double acc = 0.0;
  for (std::size_t r = 0; r < draws; ++r) acc += eki::residual(basis, eki::generate_observations(basis, v0, n, D, 17, r), v0);
  const double mean = acc / double(draws);
  EXPECT_NEAR(mean, double(D) / double(n), 0.05 * double(D) / double(n));
}

TEST(DiscrepancyThreshold, LinearInConstant) {
  eki::ModelConfig cfg;
  cfg.kappa_constant = 1.0;
  EXPECT_DOUBLE_EQ(eki::discrepancy_threshold(cfg, 100, 10000), 0.01);
  cfg.kappa_constant = 0.5;
  EXPECT_DOUBLE_EQ(eki::discrepancy_threshold(cfg, 100, 10000), 0.005);
}

TEST(ModelConfig, ValidationRejectsBadValues) {
  eki::ModelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = [&](auto mutate) {
    eki::ModelConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), eki::InvalidArgument);
  };
  bad([](auto& c) { c.kappa_constant = 1.5; });
  bad([](auto& c) { c.kappa_constant = 0.0; });
  bad([](auto& c) { c.dt = 0.0; });
  bad([](auto& c) { c.particles = 1; });
  bad([](auto& c) { c.quantile_level = 1.0; });
  bad([](auto& c) { c.alpha = -1.0; });
  bad([](auto& c) { c.k_max = c.k0; });
}

TEST(PriorSpec, SpectrumVariants) {
  eki::PriorSpec standard{2.0, 1.0, 4, eki::PriorDecay::kStandard};
  eki::PriorSpec half{2.0, 1.0, 4, eki::PriorDecay::kHalf};
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(standard.eigenvalues()[i], std::pow(double(i + 1), -5.0));
    EXPECT_DOUBLE_EQ(half.eigenvalues()[i], std::pow(double(i + 1), -2.5));
    if (i) {
      EXPECT_LT(standard.eigenvalues()[i], standard.eigenvalues()[i - 1]);
    }
  }
}

TEST(ObservationCsv, SchemaAndRowCount) {
  const auto basis = eki::eigenpairs(3);
  const auto obs = eki::generate_observations(basis, eki::ground_truth(3, 2.5), 100, 3, 1, 0, 0, true);
  const std::string csv = eki::observations_table(basis, obs).str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "i,kappa_i,ytilde_i,truth_i");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("\n1,4,4,1\n"), std::string::npos);
}

}  // namespace
