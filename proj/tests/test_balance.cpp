#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dfw/balance.hpp"
#include "dfw/synthetic.hpp"
#include "dfw/weighting.hpp"
#include "support.hpp"

using namespace dfw;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double brute_edf(const Vector& x, const Vector& w, double at) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    den += w[i];
    if (x[i] <= at) num += w[i];
  }
  return num / den;
}

double brute_ks(const Vector& a, const Vector& wa, const Vector& b, const Vector& wb) {
  double sup = 0.0;
  for (const Vector* s : {&a, &b})
    for (Eigen::Index i = 0; i < s->size(); ++i)
      sup = std::max(sup, std::abs(brute_edf(a, wa, (*s)[i]) - brute_edf(b, wb, (*s)[i])));
  return sup;
}

}  // namespace

TEST(WeightedMean, Fixtures) {
  EXPECT_DOUBLE_EQ(weighted_mean(vec({1, 2, 6}), Vector::Ones(3)), 3.0);
  EXPECT_DOUBLE_EQ(weighted_mean(vec({0, 10}), vec({1, 3})), 7.5);
  EXPECT_DOUBLE_EQ(weighted_mean(vec({4.25}), vec({2})), 4.25);
  EXPECT_DFW_ERROR(weighted_mean(vec({1, 2}), vec({0, 0})), ErrorCode::kZeroWeight);
  EXPECT_DFW_ERROR(weighted_mean(vec({1, 2}), vec({1})), ErrorCode::kDimensionMismatch);
}

TEST(WeightedVariance, Fixtures) {
  EXPECT_NEAR(weighted_variance(vec({1, 2, 3}), vec({1, 2, 1})), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(weighted_variance(vec({3, 3, 3}), vec({1, 5, 2})), 0.0);
  // Unit weights reduce to the n - 1 sample variance.
  const Vector x = vec({1, 4, 2, 8, 5});
  const double mean = x.mean();
  EXPECT_NEAR(weighted_variance(x, Vector::Ones(5)), (x.array() - mean).square().sum() / 4.0, 1e-14);
  EXPECT_DFW_ERROR(weighted_variance(vec({1}), vec({1})), ErrorCode::kDegenerateWeights);
}

TEST(Smd, Fixtures) {
  const Vector t = vec({0.5, 1.5});
  const Vector c = vec({-0.5, 0.5});
  const Vector u = Vector::Ones(2);
  EXPECT_NEAR(smd(t, u, c, u), 141.42, 0.005);
  EXPECT_DOUBLE_EQ(smd(t, u, t, u), 0.0);
  EXPECT_DOUBLE_EQ(smd(c, u, t, u), -smd(t, u, c, u));
  EXPECT_DFW_ERROR(smd(vec({1, 1}), u, vec({2, 2}), u), ErrorCode::kDegenerateWeights);
}

TEST(Smd, InvariantToCommonRescaling) {
  const Vector t = vec({0.3, 1.2, 2.5, 0.7});
  const Vector wt = vec({0.2, 1.5, 0.8, 2.0});
  const Vector c = vec({-0.4, 0.1, 0.9});
  const Vector wc = vec({1.1, 0.6, 0.3});
  EXPECT_NEAR(smd(t, wt, c, wc), smd(t, 7.0 * wt, c, 7.0 * wc), 1e-12);
}

TEST(Ecdf, Fixtures) {
  const auto tr = weighted_ecdf(vec({1, 2, 3, 4}), Vector::Ones(4));
  EXPECT_DOUBLE_EQ(evaluate_ecdf(tr, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(evaluate_ecdf(tr, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(evaluate_ecdf(tr, 4.0), 1.0);
}

TEST(Ecdf, UnitWeightsMatchCounting) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(0, 9);
  Vector x(40);
  for (int i = 0; i < 40; ++i) x[i] = d(rng);
  const auto tr = weighted_ecdf(x, Vector::Ones(40));
  for (double q = -1.0; q <= 10.0; q += 0.5) {
    const double count = static_cast<double>((x.array() <= q).count()) / 40.0;
    EXPECT_DOUBLE_EQ(evaluate_ecdf(tr, q), count) << q;
  }
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GE(tr[i].cumulative, tr[i - 1].cumulative);
}

TEST(KsStatistic, Fixtures) {
  const Vector u = Vector::Ones(2);
  EXPECT_DOUBLE_EQ(ks_statistic(vec({1, 2}), u, vec({1.5, 2.5}), u), 0.5);
  EXPECT_DOUBLE_EQ(ks_statistic(vec({1, 2}), u, vec({1, 2}), u), 0.0);
  EXPECT_DOUBLE_EQ(ks_statistic(vec({1, 2}), u, vec({3, 4}), u), 1.0);
  EXPECT_DFW_ERROR(ks_statistic(Vector(0), Vector(0), vec({1}), vec({1})), ErrorCode::kInsufficientData);
}

TEST(KsStatistic, EqualsBruteForceExactly) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> val(0, 15), wt(1, 5), len(1, 50);
  for (int trial = 0; trial < 300; ++trial) {
    const int na = len(rng), nb = len(rng);
    Vector a(na), wa(na), b(nb), wb(nb);
    for (int i = 0; i < na; ++i) {
      a[i] = val(rng) * 0.25;
      wa[i] = wt(rng);
    }
    for (int i = 0; i < nb; ++i) {
      b[i] = val(rng) * 0.25;
      wb[i] = wt(rng);
    }
    ASSERT_EQ(ks_statistic(a, wa, b, wb), brute_ks(a, wa, b, wb)) << trial;
  }
}

TEST(KsStatistic, RealWeightsAgreeWithBruteForce) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(30), wa(30), b(25), wb(25);
    for (int i = 0; i < 30; ++i) { a[i] = z(rng); wa[i] = u(rng); }
    for (int i = 0; i < 25; ++i) { b[i] = z(rng) + 0.3; wb[i] = u(rng); }
    ASSERT_NEAR(ks_statistic(a, wa, b, wb), brute_ks(a, wa, b, wb), 1e-14);
  }
}

TEST(KsStatistic, InvariantToMonotoneTransform) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  Vector a(20), b(20), wa = Vector::Ones(20), wb(20);
  for (int i = 0; i < 20; ++i) { a[i] = z(rng); b[i] = z(rng); wb[i] = 1.0 + i % 3; }
  const Vector ea = a.array().exp(), eb = b.array().exp();
  EXPECT_DOUBLE_EQ(ks_statistic(a, wa, b, wb), ks_statistic(ea, wa, eb, wb));
  const double k = ks_statistic(a, wa, b, wb);
  EXPECT_GE(k, 0.0);
  EXPECT_LE(k, 1.0);
}

TEST(ReplicationCi, Fixtures) {
  const auto c = replication_ci({2.5, 2.5, 2.5});
  EXPECT_DOUBLE_EQ(c.lower, 2.5);
  EXPECT_DOUBLE_EQ(c.point, 2.5);
  EXPECT_DOUBLE_EQ(c.upper, 2.5);
  std::vector<double> seq;
  for (int i = 1; i <= 10; ++i) seq.push_back(i / 10.0);
  const auto s = replication_ci(seq);
  EXPECT_NEAR(s.point, 0.55, 1e-15);
  EXPECT_NEAR(s.lower, 0.1225, 1e-15);
  EXPECT_NEAR(s.upper, 0.9775, 1e-15);
  std::reverse(seq.begin(), seq.end());
  const auto r = replication_ci(seq);
  EXPECT_EQ(r.lower, s.lower);
  EXPECT_EQ(r.upper, s.upper);
  EXPECT_DFW_ERROR(replication_ci({1.0}), ErrorCode::kInsufficientData);
}

TEST(BalanceReport, ShapesAndInvariants) {
  const auto b = generate_linear(bias_preset("moderate"));
  const auto r = balance_report(b, unit_weights(static_cast<Eigen::Index>(b.size())));
  ASSERT_EQ(r.covariates.size(), 6u);
  for (const auto& c : r.covariates) {
    EXPECT_EQ(c.smd_unweighted, c.smd_weighted);
    EXPECT_GE(c.ks_weighted, 0.0);
    EXPECT_LE(c.ks_weighted, 1.0);
    EXPECT_EQ(c.ecdf_treated.back().cumulative, 1.0);
    EXPECT_EQ(c.ecdf_control.back().cumulative, 1.0);
  }
  EXPECT_DFW_ERROR(balance_report(b, unit_weights(3)), ErrorCode::kDimensionMismatch);
}
