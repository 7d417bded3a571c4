#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "dfw/data_model.hpp"
#include "dfw/error.hpp"

namespace dfw {

struct RidgeConfig {
  double penalty = 1.0;
  bool include_intercept = true;
};

struct KernelRidgeConfig {
  double penalty = 0.1;
  // RBF coefficient in exp(-gamma |a - b|^2); unset means 1 / (number of
  // covariates), excluding the treatment column.
  std::optional<double> rbf_bandwidth;
  bool median_heuristic = false;
};

/// Linear outcome model over [x, t]; `coefficients` excludes the intercept.
struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;

  Vector predict(const Matrix& design) const {
    if (design.cols() != coefficients.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "design width differs from model width");
    }
    return (design * coefficients).array() + intercept;
  }
};

struct KernelModel {
  Matrix support;  // training rows of [x, t]
  Vector dual;
  double gamma = 1.0;

  Vector predict(const Matrix& design) const;
};

using OutcomeModel = std::variant<LinearModel, KernelModel>;

namespace detail {

inline void check_weights(const Vector& w, Eigen::Index n) {
  if (w.size() != n) throw Error(ErrorCode::kDimensionMismatch, "weight length differs from rows");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
      throw Error(ErrorCode::kZeroWeight, "outcome model weights must be positive and finite");
    }
  }
}

inline Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma) {
  const Vector an = a.rowwise().squaredNorm();
  const Vector bn = b.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * a * b.transpose()).colwise() + an;
  d2.rowwise() += bn.transpose();
  return (-gamma * d2.cwiseMax(0.0)).array().exp().matrix();
}

}  // namespace detail

inline Vector KernelModel::predict(const Matrix& design) const {
  if (design.cols() != support.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "design width differs from kernel model width");
  }
  return detail::rbf_gram(design, support, gamma) * dual;
}

/// Weighted ridge objective (weights rescaled to sum one, intercept free):
///   sum_i w_i (y_i - b0 - d_i . beta)^2 + penalty |beta|^2
inline double weighted_ridge_objective(const Matrix& design, const Vector& outcome,
                                       const Vector& weights, double penalty, double intercept,
                                       const Vector& beta) {
  const Vector w = weights / weights.sum();
  const Vector r = (outcome - design * beta).array() - intercept;
  return w.dot(r.cwiseProduct(r)) + penalty * beta.squaredNorm();
}

/// Closed-form weighted ridge: (X'WX + penalty J) b = X'Wy, J the identity
/// with the intercept entry zeroed. Weights are rescaled to sum one first,
/// so multiplying all weights by a constant leaves the solution unchanged.
inline LinearModel fit_weighted_ridge(const Matrix& design, const Vector& outcome,
                                      const WeightVector& weights, const RidgeConfig& config = {}) {
  if (!(config.penalty >= 0.0) || !std::isfinite(config.penalty)) {
    throw Error(ErrorCode::kConfig, "ridge penalty must be finite and non-negative");
  }
  const Eigen::Index n = design.rows();
  if (outcome.size() != n || n == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "design rows and outcome length differ");
  }
  detail::check_weights(weights.weights, n);
  const Vector w = weights.weights / weights.weights.sum();

  const Eigen::Index p = design.cols() + (config.include_intercept ? 1 : 0);
  Matrix x(n, p);
  if (config.include_intercept) {
    x.col(0).setOnes();
    x.rightCols(design.cols()) = design;
  } else {
    x = design;
  }
  Matrix lhs = x.transpose() * w.asDiagonal() * x;
  lhs.diagonal().array() += config.penalty;
  if (config.include_intercept) lhs(0, 0) -= config.penalty;
  const Vector rhs = x.transpose() * w.cwiseProduct(outcome);

  Eigen::LDLT<Matrix> ldlt(lhs);
  const Vector pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      !(pivots.minCoeff() > 1e-13 * pivots.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kSingularSystem, "weighted ridge normal equations are singular");
  }
  const Vector sol = ldlt.solve(rhs);

  LinearModel model;
  if (config.include_intercept) {
    model.intercept = sol[0];
    model.coefficients = sol.tail(design.cols());
  } else {
    model.coefficients = sol;
  }
  return model;
}

inline double resolve_rbf_gamma(const Matrix& design, const KernelRidgeConfig& config) {
  if (config.median_heuristic) {
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(design.rows() * (design.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < design.rows(); ++j) {
        d2.push_back((design.row(i) - design.row(j)).squaredNorm());
      }
    }
    if (d2.empty()) throw Error(ErrorCode::kInsufficientData, "median heuristic needs two rows");
    auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
    std::nth_element(d2.begin(), mid, d2.end());
    if (!(*mid > 0.0)) throw Error(ErrorCode::kInsufficientData, "median pairwise distance is zero");
    return 1.0 / *mid;
  }
  if (config.rbf_bandwidth) return *config.rbf_bandwidth;
  return 1.0 / static_cast<double>(std::max<Eigen::Index>(1, design.cols() - 1));
}

/// Weighted RBF kernel ridge: solves (K + penalty W^-1) a = y, the minimizer
/// of sum_i w_i (y_i - f(x_i))^2 + penalty |f|^2 in the kernel norm.
inline KernelModel fit_weighted_kernel_ridge(const Matrix& covariates_with_t, const Vector& outcome,
                                             const WeightVector& weights,
                                             const KernelRidgeConfig& config = {}) {
  const Eigen::Index n = covariates_with_t.rows();
  if (n < 2) throw Error(ErrorCode::kInsufficientData, "kernel ridge needs at least two rows");
  if (outcome.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "design rows and outcome length differ");
  }
  if (!(config.penalty > 0.0) || !std::isfinite(config.penalty)) {
    throw Error(ErrorCode::kConfig, "kernel ridge penalty must be positive");
  }
  detail::check_weights(weights.weights, n);
  const double gamma = resolve_rbf_gamma(covariates_with_t, config);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::kConfig, "RBF bandwidth must be positive");
  }

  Matrix system = detail::rbf_gram(covariates_with_t, covariates_with_t, gamma);
  system.diagonal() += config.penalty * weights.weights.cwiseInverse();
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem, "regularized kernel system is ill-conditioned");
  }
  KernelModel model;
  model.support = covariates_with_t;
  model.dual = llt.solve(outcome);
  model.gamma = gamma;
  if (!model.dual.allFinite()) {
    throw Error(ErrorCode::kSingularSystem, "kernel ridge solve produced non-finite coefficients");
  }
  return model;
}

/// Appends a constant treatment column to covariates.
inline Matrix with_treatment_column(const Matrix& covariates, double t) {
  Matrix out(covariates.rows(), covariates.cols() + 1);
  out.leftCols(covariates.cols()) = covariates;
  out.col(covariates.cols()).setConstant(t);
  return out;
}

inline Matrix with_treatment_column(const Matrix& covariates, const std::vector<int>& treatment) {
  Matrix out = with_treatment_column(covariates, 0.0);
  out.col(covariates.cols()) = treatment_as_vector(treatment);
  return out;
}

inline Vector predict(const OutcomeModel& model, const Matrix& design) {
  return std::visit([&](const auto& m) { return m.predict(design); }, model);
}

/// S-learner counterfactuals: the model evaluated with the treatment column
/// forced to 0 and to 1. Returns (y0_hat, y1_hat).
inline std::pair<Vector, Vector> predict_potential_outcomes(const OutcomeModel& model,
                                                            const Matrix& covariates) {
  return {predict(model, with_treatment_column(covariates, 0.0)),
          predict(model, with_treatment_column(covariates, 1.0))};
}

}  // namespace dfw
