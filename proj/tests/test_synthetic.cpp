#include <cmath>

#include <gtest/gtest.h>

#include "dfw/balance.hpp"
#include "dfw/effects.hpp"
#include "dfw/propensity.hpp"
#include "dfw/random.hpp"
#include "dfw/synthetic.hpp"
#include "dfw/weighting.hpp"
#include "support.hpp"

using namespace dfw;

namespace {

double mean_abs_raw_smd(const DatasetBundle& b) {
  const auto r = balance_report(b, unit_weights(static_cast<Eigen::Index>(b.size())));
  double s = 0.0;
  for (const auto& c : r.covariates) s += std::abs(c.smd_unweighted);
  return s / static_cast<double>(r.covariates.size());
}

}  // namespace

TEST(Random, NormalQuantile) {
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-15);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-12);
  EXPECT_EQ(normal_quantile(0.3), -normal_quantile(0.7));
}

TEST(Random, GoldenValues) {
  RandomStream r(1, 2);
  EXPECT_EQ(r.next_u64(), 4694496169842849589ULL);
  LinearGenConfig g;
  g.seed = 42;
  const auto b = generate_linear(g);
  EXPECT_EQ(b.covariates(0, 0), 0x1.61e5b58ff4881p-1);
  EXPECT_EQ(b.covariates(1499, 5), -0x1.1a8ef9f343167p-2);
  EXPECT_EQ(b.treatment[0], 1);
  EXPECT_EQ(b.outcome_factual[7], -0x1.3c284778d43f8p-6);
}

TEST(Random, UniformInOpenInterval) {
  RandomStream r(7, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(LinearGenerator, DefaultShapeAndTruth) {
  const auto b = generate_linear({});
  EXPECT_EQ(b.covariates.rows(), 1500);
  EXPECT_EQ(b.covariates.cols(), 6);
  EXPECT_EQ(true_ate(b), 5.0);
  EXPECT_NEAR((*b.outcome_y1 - *b.outcome_y0).mean(), 5.0, 1e-13);
  EXPECT_NO_THROW(validate_bundle(b));
}

TEST(LinearGenerator, FactualAssembly) {
  const auto b = generate_linear(bias_preset("high"));
  const Vector t = treatment_as_vector(b.treatment);
  const Vector rebuilt = t.cwiseProduct(*b.outcome_y1) + (1.0 - t.array()).matrix().cwiseProduct(*b.outcome_y0);
  EXPECT_TRUE((rebuilt.array() == b.outcome_factual.array()).all());
  ASSERT_TRUE(b.true_propensity.has_value());
  EXPECT_TRUE((b.true_propensity->array() > 0).all() && (b.true_propensity->array() < 1).all());
}

TEST(LinearGenerator, Deterministic) {
  LinearGenConfig g = bias_preset("moderate");
  g.seed = 99;
  EXPECT_TRUE(identical(generate_linear(g), generate_linear(g)));
  g.seed = 100;
  EXPECT_FALSE(identical(generate_linear(g), generate_linear(bias_preset("moderate"))));
}

TEST(LinearGenerator, ColumnsUseIndependentStreams) {
  const Matrix a = detail::standard_normal_columns(50, 3, 5);
  const Matrix b = detail::standard_normal_columns(50, 5, 5);
  EXPECT_TRUE((a.array() == b.leftCols(3).array()).all());
}

TEST(LinearGenerator, NoBiasIsBalancedAssignment) {
  LinearGenConfig g;
  g.n = 100000;
  g.bias_weights.fill(0.0);
  const auto b = generate_linear(g);
  const double frac = treatment_as_vector(b.treatment).mean();
  EXPECT_NEAR(frac, 0.5, 0.01);
}

TEST(LinearGenerator, Errors) {
  LinearGenConfig g;
  g.n = 0;
  EXPECT_DFW_ERROR(generate_linear(g), ErrorCode::kConfig);
  g.n = 10;
  g.outcome_noise_sd = -1.0;
  EXPECT_DFW_ERROR(generate_linear(g), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(bias_preset("extreme"), ErrorCode::kConfig);
}

TEST(NonlinearGenerator, HeterogeneousEffect) {
  const auto b = generate_nonlinear({});
  for (Eigen::Index i = 0; i < b.covariates.rows(); ++i) {
    ASSERT_EQ((*b.true_effect)[i], 2.0 + 0.5 * b.covariates(i, 4));
    ASSERT_NEAR((*b.outcome_y1)[i] - (*b.outcome_y0)[i], 2.0 + 0.5 * b.covariates(i, 4), 1e-13);
  }
  const Eigen::RowVectorXd zero = Eigen::RowVectorXd::Zero(6);
  EXPECT_EQ(detail::logistic(nonlinear_logit({}, zero)), 0.5);
}

TEST(NonlinearGenerator, LargeSampleMeanEffect) {
  NonlinearGenConfig c;
  c.n = 1000000;
  EXPECT_NEAR(true_ate(generate_nonlinear(c)), 2.0, 0.01);
}

TEST(RoleGenerator, RolesDriveTheRightMechanisms) {
  const RoleGenConfig c;
  const auto b = generate_roles(c);
  ASSERT_TRUE(b.feature_roles.has_value());
  EXPECT_EQ(b.covariates.cols(), 6);
  for (Eigen::Index i = 0; i < 50; ++i) {
    Eigen::RowVectorXd row = b.covariates.row(i);
    Eigen::RowVectorXd no_adj = row, no_ins = row;
    for (std::size_t j = 0; j < b.feature_roles->size(); ++j) {
      if ((*b.feature_roles)[j] == FeatureRole::kAdjustment) no_adj[static_cast<Eigen::Index>(j)] = 0.0;
      if ((*b.feature_roles)[j] == FeatureRole::kInstrumental) no_ins[static_cast<Eigen::Index>(j)] = 0.0;
    }
    EXPECT_EQ(roles_logit(c, no_adj), roles_logit(c, row));
    EXPECT_NE(roles_mean_y0(c, no_adj), roles_mean_y0(c, row));
    EXPECT_EQ(roles_mean_y0(c, no_ins), roles_mean_y0(c, row));
    EXPECT_NE(roles_logit(c, no_ins), roles_logit(c, row));
  }
}

TEST(RoleGenerator, AdjustmentCoefficientsNearZero) {
  RoleGenConfig c;
  c.n = 100000;
  const auto b = generate_roles(c);
  const auto fit = fit_logistic(b.covariates, b.treatment);
  for (std::size_t j = 0; j < b.feature_roles->size(); ++j) {
    if ((*b.feature_roles)[j] == FeatureRole::kAdjustment) {
      EXPECT_LT(std::abs(fit.coefficients[static_cast<Eigen::Index>(j) + 1]), 0.1);
    }
  }
}

TEST(BiasPresets, HighPresetHasExtremePropensities) {
  const auto b = generate_linear(bias_preset("high"));
  const Vector e = fit_logistic(b.covariates, b.treatment).treated_probability();
  const auto extreme = (e.array() < 0.01 || e.array() > 0.99).count();
  EXPECT_GE(static_cast<double>(extreme), 0.01 * 1500);
}

TEST(BiasPresets, LowPresetStillBiased) {
  const auto b = generate_linear(bias_preset("low"));
  const auto r = balance_report(b, unit_weights(1500));
  double mx = 0.0;
  for (const auto& c : r.covariates) mx = std::max(mx, std::abs(c.smd_unweighted));
  EXPECT_GT(mx, 10.0);
}

TEST(BiasPresets, OrderedByRawImbalance) {
  const double low = mean_abs_raw_smd(generate_linear(bias_preset("low")));
  const double mid = mean_abs_raw_smd(generate_linear(bias_preset("moderate")));
  const double high = mean_abs_raw_smd(generate_linear(bias_preset("high")));
  EXPECT_LT(low, mid);
  EXPECT_LT(mid, high);
}
