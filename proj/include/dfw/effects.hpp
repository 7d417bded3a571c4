#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "dfw/balance.hpp"
#include "dfw/data_model.hpp"
#include "dfw/error.hpp"
#include "dfw/outcome_models.hpp"

namespace dfw {

enum class EffectEstimator { kWeightedRegression, kWeightedMeanDiff };

inline std::string_view to_string(EffectEstimator e) {
  return e == EffectEstimator::kWeightedRegression ? "WEIGHTED_REGRESSION" : "WEIGHTED_MEAN_DIFF";
}

enum class Linearity { kLinear, kNonlinear };

inline std::string_view to_string(Linearity l) {
  return l == Linearity::kLinear ? "linear" : "nonlinear";
}

struct OutcomeModelConfig {
  RidgeConfig ridge;
  KernelRidgeConfig kernel;
};

struct EffectEstimate {
  double ate_hat = 0.0;
  std::optional<double> epsilon_ate;
  std::optional<double> pehe;
  EffectEstimator estimator = EffectEstimator::kWeightedRegression;
  // Per-row effect estimates on the evaluation rows.
  std::optional<Vector> ite_hat;
};

inline double epsilon_ate(double ate_true, double ate_hat) { return std::abs(ate_true - ate_hat); }

/// Root mean squared difference between true and estimated individual effects.
inline double pehe(const Vector& ite_true, const Vector& ite_hat) {
  if (ite_true.size() != ite_hat.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "PEHE inputs differ in length");
  }
  if (ite_true.size() == 0) throw Error(ErrorCode::kInsufficientData, "PEHE needs at least one row");
  return std::sqrt((ite_true - ite_hat).squaredNorm() / static_cast<double>(ite_true.size()));
}

inline Vector true_ite(const DatasetBundle& bundle) {
  if (!bundle.has_potential_outcomes()) {
    throw Error(ErrorCode::kMissingCounterfactual, "bundle has no potential outcomes");
  }
  if (bundle.true_effect) return *bundle.true_effect;
  return *bundle.outcome_y1 - *bundle.outcome_y0;
}

/// Mean of y1 - y0 over the bundle's rows.
inline double true_ate(const DatasetBundle& bundle) {
  const Vector ite = true_ite(bundle);
  // A constant effect is returned as is rather than through a rounded sum.
  if ((ite.array() == ite[0]).all()) return ite[0];
  return ite.mean();
}

/// Fits the S-learner outcome model on [x, t] with the given weights.
inline OutcomeModel fit_outcome_model(const DatasetBundle& train, const WeightVector& weights,
                                      const OutcomeModelConfig& config, Linearity linearity) {
  const Matrix design = with_treatment_column(train.covariates, train.treatment);
  if (linearity == Linearity::kLinear) {
    return fit_weighted_ridge(design, train.outcome_factual, weights, config.ridge);
  }
  // Kernel ridge is not scale free in the weights; rescale to mean one so the
  // estimator is.
  WeightVector normalized{weights.weights / weights.weights.mean(), weights.scheme};
  return fit_weighted_kernel_ridge(design, train.outcome_factual, normalized, config.kernel);
}

/// Weighted S-learner: fits on `train`, then averages yhat1 - yhat0 over the
/// evaluation rows. Scores against ground truth when `evaluate` carries
/// potential outcomes.
inline EffectEstimate estimate_weighted_regression(const DatasetBundle& train,
                                                   const WeightVector& weights,
                                                   const OutcomeModelConfig& config,
                                                   Linearity linearity,
                                                   const DatasetBundle& evaluate) {
  if (weights.size() != static_cast<Eigen::Index>(train.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "weights not aligned with training rows");
  }
  const OutcomeModel model = fit_outcome_model(train, weights, config, linearity);
  const auto [y0_hat, y1_hat] = predict_potential_outcomes(model, evaluate.covariates);
  EffectEstimate out;
  out.estimator = EffectEstimator::kWeightedRegression;
  out.ite_hat = y1_hat - y0_hat;
  out.ate_hat = out.ite_hat->mean();
  if (evaluate.has_potential_outcomes()) {
    const Vector ite = true_ite(evaluate);
    out.epsilon_ate = epsilon_ate(true_ate(evaluate), out.ate_hat);
    out.pehe = pehe(ite, *out.ite_hat);
  }
  return out;
}

inline EffectEstimate estimate_weighted_regression(const DatasetBundle& bundle,
                                                   const WeightVector& weights,
                                                   const OutcomeModelConfig& config,
                                                   Linearity linearity) {
  return estimate_weighted_regression(bundle, weights, config, linearity, bundle);
}

/// Difference of weighted arm means of the factual outcome. The ground truth,
/// when present, is the mean true effect over `truth_rows`.
inline EffectEstimate estimate_weighted_mean_diff(const DatasetBundle& bundle,
                                                  const WeightVector& weights,
                                                  const DatasetBundle* truth_rows = nullptr) {
  if (weights.size() != static_cast<Eigen::Index>(bundle.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "weights not aligned with bundle");
  }
  const auto treated = arm_indices(bundle.treatment, 1);
  const auto control = arm_indices(bundle.treatment, 0);
  if (treated.empty() || control.empty()) throw Error(ErrorCode::kEmptyArm, "both arms required");
  EffectEstimate out;
  out.estimator = EffectEstimator::kWeightedMeanDiff;
  out.ate_hat = weighted_mean(gather(bundle.outcome_factual, treated), gather(weights.weights, treated)) -
                weighted_mean(gather(bundle.outcome_factual, control), gather(weights.weights, control));
  const DatasetBundle& truth = truth_rows ? *truth_rows : bundle;
  // The contrast implies a constant individual effect.
  out.ite_hat = Vector::Constant(static_cast<Eigen::Index>(truth.size()), out.ate_hat);
  if (truth.has_potential_outcomes()) {
    const Vector ite = true_ite(truth);
    out.epsilon_ate = epsilon_ate(true_ate(truth), out.ate_hat);
    out.pehe = pehe(ite, *out.ite_hat);
  }
  return out;
}

}  // namespace dfw
