#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dfw/data_model.hpp"
#include "dfw/error.hpp"

namespace dfw {

/// One step of a weighted ECDF: F(value) = cumulative.
struct EcdfPoint {
  double value = 0.0;
  double cumulative = 0.0;
};

using EcdfTrace = std::vector<EcdfPoint>;

struct Interval {
  double lower = 0.0;
  double point = 0.0;
  double upper = 0.0;
};

/// Balance of one covariate between arms. SMD values are in percent.
struct CovariateBalance {
  std::string feature;
  double smd_unweighted = 0.0;
  double smd_weighted = 0.0;
  double ks_weighted = 0.0;
  EcdfTrace ecdf_treated;
  EcdfTrace ecdf_control;
};

struct BalanceReport {
  Scheme scheme = Scheme::kUnit;
  std::vector<CovariateBalance> covariates;
};

namespace detail {
inline void check_pair(const Vector& values, const Vector& weights) {
  if (values.size() != weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "values and weights differ in length");
  }
}
}  // namespace detail

inline double weighted_mean(const Vector& values, const Vector& weights) {
  detail::check_pair(values, weights);
  const double total = weights.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroWeight, "total weight is not positive");
  return weights.dot(values) / total;
}

/// Reliability-weighted variance:
///   s^2 = sum(w) / (sum(w)^2 - sum(w^2)) * sum_i w_i (x_i - mean_w)^2
inline double weighted_variance(const Vector& values, const Vector& weights) {
  detail::check_pair(values, weights);
  const double total = weights.sum();
  const double denom = total * total - weights.squaredNorm();
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kDegenerateWeights,
                "weighted variance needs (sum w)^2 > sum w^2");
  }
  const double mean = weighted_mean(values, weights);
  return total / denom * weights.dot((values.array() - mean).square().matrix());
}

/// Standardized mean difference in percent: 100 (mean_T - mean_C) / pooled sd.
inline double smd(const Vector& treated_values, const Vector& treated_weights,
                  const Vector& control_values, const Vector& control_weights) {
  const double diff = weighted_mean(treated_values, treated_weights) -
                      weighted_mean(control_values, control_weights);
  const double pooled = 0.5 * (weighted_variance(treated_values, treated_weights) +
                               weighted_variance(control_values, control_weights));
  if (!(pooled > 0.0)) throw Error(ErrorCode::kDegenerateWeights, "pooled variance is zero");
  return 100.0 * diff / std::sqrt(pooled);
}

/// Weighted ECDF evaluated at each distinct sorted value (right-continuous).
inline EcdfTrace weighted_ecdf(const Vector& values, const Vector& weights) {
  detail::check_pair(values, weights);
  const double total = weights.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroWeight, "total weight is not positive");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  EcdfTrace trace;
  double acc = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    acc += weights[order[k]];
    const double v = values[order[k]];
    if (k + 1 < order.size() && values[order[k + 1]] == v) continue;
    trace.push_back({v, acc / total});
  }
  // Summation order can leave the last step a rounding error short of one.
  if (!trace.empty()) trace.back().cumulative = 1.0;
  return trace;
}

/// Evaluates a trace at x (0 below the minimum).
inline double evaluate_ecdf(const EcdfTrace& trace, double x) {
  auto it = std::upper_bound(trace.begin(), trace.end(), x,
                             [](double q, const EcdfPoint& p) { return q < p.value; });
  if (it == trace.begin()) return 0.0;
  return std::prev(it)->cumulative;
}

/// Two-sample K-S statistic on weighted EDFs. Both EDFs are step functions
/// that jump only at sample values, so the supremum is attained on the
/// pooled distinct values; one merge sweep evaluates it exactly.
inline double ks_statistic(const Vector& treated_values, const Vector& treated_weights,
                           const Vector& control_values, const Vector& control_weights) {
  if (treated_values.size() == 0 || control_values.size() == 0) {
    throw Error(ErrorCode::kInsufficientData, "K-S statistic needs two non-empty groups");
  }
  const EcdfTrace a = weighted_ecdf(treated_values, treated_weights);
  const EcdfTrace b = weighted_ecdf(control_values, control_weights);
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  double sup = 0.0;
  while (i < a.size() || j < b.size()) {
    const double va = i < a.size() ? a[i].value : INFINITY;
    const double vb = j < b.size() ? b[j].value : INFINITY;
    const double v = std::min(va, vb);
    if (va == v) fa = a[i++].cumulative;
    if (vb == v) fb = b[j++].cumulative;
    sup = std::max(sup, std::abs(fa - fb));
  }
  return std::min(sup, 1.0);
}

/// Mean with empirical 2.5% / 97.5% percentiles (linear interpolation between
/// order statistics) across replications.
inline Interval replication_ci(std::vector<double> values, double level = 0.95) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "confidence interval needs at least 2 replications");
  }
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::kConfig, "CI level must be in (0,1)");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  double sum = 0.0;
  for (double v : values) sum += v;
  const double tail = 0.5 * (1.0 - level);
  Interval out{quantile(tail), sum / static_cast<double>(values.size()), quantile(1.0 - tail)};
  // Guard the ordering against rounding in the mean of a constant sequence.
  out.lower = std::min(out.lower, out.point);
  out.upper = std::max(out.upper, out.point);
  return out;
}

/// Per-covariate SMD (unweighted and weighted), weighted K-S and ECDF traces.
inline BalanceReport balance_report(const DatasetBundle& bundle, const WeightVector& weights) {
  if (weights.size() != static_cast<Eigen::Index>(bundle.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "weights not aligned with bundle");
  }
  const auto treated = arm_indices(bundle.treatment, 1);
  const auto control = arm_indices(bundle.treatment, 0);
  if (treated.empty() || control.empty()) throw Error(ErrorCode::kEmptyArm, "balance needs both arms");
  const Vector wt = gather(weights.weights, treated);
  const Vector wc = gather(weights.weights, control);
  const Vector ut = Vector::Ones(wt.size());
  const Vector uc = Vector::Ones(wc.size());

  BalanceReport report;
  report.scheme = weights.scheme;
  for (Eigen::Index k = 0; k < bundle.covariates.cols(); ++k) {
    const Vector col = bundle.covariates.col(k);
    const Vector xt = gather(col, treated);
    const Vector xc = gather(col, control);
    CovariateBalance cb;
    cb.feature = k < static_cast<Eigen::Index>(bundle.feature_names.size())
                     ? bundle.feature_names[static_cast<std::size_t>(k)]
                     : "x" + std::to_string(k + 1);
    cb.smd_unweighted = smd(xt, ut, xc, uc);
    cb.smd_weighted = smd(xt, wt, xc, wc);
    cb.ks_weighted = ks_statistic(xt, wt, xc, wc);
    cb.ecdf_treated = weighted_ecdf(xt, wt);
    cb.ecdf_control = weighted_ecdf(xc, wc);
    report.covariates.push_back(std::move(cb));
  }
  return report;
}

}  // namespace dfw
