#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dfw/data_model.hpp"
#include "dfw/error.hpp"

namespace dfw {

struct LogisticConfig {
  double ridge_penalty = 1e-6;
  int max_iterations = 100;
  double convergence_tol = 1e-8;  // max absolute coefficient change
  double probability_floor = 1e-6;
};

enum class CbpsInit { kLogisticMle, kZero };

struct CbpsConfig {
  int max_iterations = 500;
  double gradient_tol = 1e-8;
  double ridge_penalty = 1e-6;
  CbpsInit init = CbpsInit::kLogisticMle;
  double probability_floor = 1e-6;
};

namespace detail {

inline void check_floor(double floor) {
  if (!(floor > 0.0 && floor < 0.5) || !std::isfinite(floor)) {
    throw Error(ErrorCode::kConfig, "probability_floor must lie in (0, 0.5)");
  }
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

inline void check_binary(const Matrix& x, const std::vector<int>& treatment) {
  if (static_cast<std::size_t>(x.rows()) != treatment.size() || treatment.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "covariate rows and treatment length differ");
  }
  bool any_treated = false;
  bool any_control = false;
  for (int t : treatment) {
    if (t != 0 && t != 1) throw Error(ErrorCode::kCoding, "propensity fits need binary treatment");
    (t == 1 ? any_treated : any_control) = true;
  }
  if (!any_treated || !any_control) throw Error(ErrorCode::kEmptyArm, "one treatment arm is empty");
}

inline Matrix binary_rows(const Vector& treated_prob, double floor) {
  Matrix rows(treated_prob.size(), 2);
  for (Eigen::Index i = 0; i < treated_prob.size(); ++i) {
    const double p = std::clamp(treated_prob[i], floor, 1.0 - floor);
    rows(i, 0) = 1.0 - p;
    rows(i, 1) = p;
  }
  return rows;
}

// Penalty matrix: identity with the intercept entry zeroed.
inline Vector penalty_mask(Eigen::Index dim) {
  Vector mask = Vector::Ones(dim);
  mask[0] = 0.0;
  return mask;
}

}  // namespace detail

/// Ridge-penalized Bernoulli log-likelihood (intercept unpenalized):
///   sum_i [t_i eta_i - log(1 + exp(eta_i))] - ridge * |beta_{1:}|^2.
inline double logistic_penalized_loglik(const Matrix& covariates, const std::vector<int>& treatment,
                                        const Vector& coefficients, double ridge) {
  const Vector eta = detail::with_intercept(covariates) * coefficients;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += treatment[static_cast<std::size_t>(i)] * eta[i] - detail::softplus(eta[i]);
  }
  return ll - ridge * coefficients.tail(coefficients.size() - 1).squaredNorm();
}

/// Gradient of logistic_penalized_loglik.
inline Vector logistic_penalized_score(const Matrix& covariates,
                                       const std::vector<int>& treatment,
                                       const Vector& coefficients, double ridge) {
  const Matrix design = detail::with_intercept(covariates);
  const Vector eta = design * coefficients;
  Vector resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    resid[i] = treatment[static_cast<std::size_t>(i)] - detail::sigmoid(eta[i]);
  }
  return design.transpose() * resid -
         2.0 * ridge * detail::penalty_mask(coefficients.size()).cwiseProduct(coefficients);
}

/// Logistic-link probabilities under `fit`, floored into [floor, 1 - floor].
inline Matrix predict_propensity(const PropensityFit& fit, const Matrix& covariates) {
  if (covariates.cols() + 1 != fit.coefficients.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "propensity model expects " + std::to_string(fit.coefficients.size() - 1) +
                    " covariates, got " + std::to_string(covariates.cols()));
  }
  const Vector eta = detail::with_intercept(covariates) * fit.coefficients;
  return detail::binary_rows(eta.unaryExpr([](double z) { return detail::sigmoid(z); }),
                             fit.probability_floor);
}

/// Logistic regression by iteratively reweighted least squares (Newton with
/// step halving on the penalized log-likelihood).
inline PropensityFit fit_logistic(const Matrix& covariates, const std::vector<int>& treatment,
                                  const LogisticConfig& config = {}) {
  detail::check_floor(config.probability_floor);
  if (config.ridge_penalty < 0.0 || config.max_iterations < 1 || !(config.convergence_tol > 0.0)) {
    throw Error(ErrorCode::kConfig, "invalid logistic configuration");
  }
  detail::check_binary(covariates, treatment);

  const Matrix design = detail::with_intercept(covariates);
  const Eigen::Index dim = design.cols();
  const auto n = static_cast<double>(design.rows());
  const Vector mask = detail::penalty_mask(dim);
  const Vector t = treatment_as_vector(treatment);

  Vector beta = Vector::Zero(dim);
  double loglik = logistic_penalized_loglik(covariates, treatment, beta, config.ridge_penalty);
  bool converged = false;
  int iter = 0;
  for (; iter < config.max_iterations && !converged; ++iter) {
    const Vector eta = design * beta;
    Vector p(eta.size());
    Vector w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      p[i] = detail::sigmoid(eta[i]);
      w[i] = p[i] * (1.0 - p[i]);
    }
    const Vector score =
        design.transpose() * (t - p) - 2.0 * config.ridge_penalty * mask.cwiseProduct(beta);
    Matrix hessian = design.transpose() * w.asDiagonal() * design;
    hessian.diagonal() += 2.0 * config.ridge_penalty * mask;

    Eigen::LDLT<Matrix> ldlt(hessian);
    const Vector pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        !(pivots.minCoeff() > 1e-13 * pivots.cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::kSingularSystem,
                  "weighted normal equations are singular at iteration " + std::to_string(iter));
    }
    Vector step = ldlt.solve(score);

    // Step halving keeps the penalized likelihood non-decreasing.
    double scale = 1.0;
    Vector candidate = beta + step;
    double cand_ll = logistic_penalized_loglik(covariates, treatment, candidate, config.ridge_penalty);
    for (int halving = 0; halving < 40 && !(cand_ll >= loglik - 1e-12 * std::abs(loglik)); ++halving) {
      scale *= 0.5;
      candidate = beta + scale * step;
      cand_ll = logistic_penalized_loglik(covariates, treatment, candidate, config.ridge_penalty);
    }
    const double change = (candidate - beta).cwiseAbs().maxCoeff();
    beta = candidate;
    loglik = cand_ll;
    if (change <= config.convergence_tol) converged = true;
  }

  const Vector score = logistic_penalized_score(covariates, treatment, beta, config.ridge_penalty);
  const double score_norm = score.cwiseAbs().maxCoeff();
  if (!converged || !(score_norm <= 1e-6 * n)) {
    throw Error(ErrorCode::kNonConvergence,
                "logistic IRLS stopped after " + std::to_string(iter) +
                    " iterations with penalized score max-norm " + std::to_string(score_norm));
  }

  PropensityFit fit;
  fit.coefficients = beta;
  fit.estimator = PropensityEstimator::kLogistic;
  fit.probability_floor = config.probability_floor;
  fit.iterations = iter;
  fit.objective = loglik;
  fit.probabilities = predict_propensity(fit, covariates);
  return fit;
}

/// Covariate-balance objective minimized by CBPS:
///   |(1/n) sum_i [t_i/e_i - (1-t_i)/(1-e_i)] (1, x_i)|^2 + ridge |beta_{1:}|^2
/// with e_i floored into [floor, 1 - floor].
class CbpsObjective {
 public:
  CbpsObjective(const Matrix& covariates, const std::vector<int>& treatment, double ridge,
                double floor)
      : design_(detail::with_intercept(covariates)),
        t_(treatment_as_vector(treatment)),
        mask_(detail::penalty_mask(design_.cols())),
        ridge_(ridge),
        floor_(floor) {}

  Eigen::Index dim() const { return design_.cols(); }

  Vector balance_residual(const Vector& beta) const {
    const Vector eta = design_ * beta;
    Vector r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double e = std::clamp(detail::sigmoid(eta[i]), floor_, 1.0 - floor_);
      r[i] = t_[i] / e - (1.0 - t_[i]) / (1.0 - e);
    }
    return design_.transpose() * r / static_cast<double>(design_.rows());
  }

  double value(const Vector& beta) const {
    return balance_residual(beta).squaredNorm() +
           ridge_ * mask_.cwiseProduct(beta).squaredNorm();
  }

  // Jacobian of the balance residual; clamped samples contribute nothing.
  Matrix residual_jacobian(const Vector& beta) const {
    const Vector eta = design_ * beta;
    Vector d(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double raw = detail::sigmoid(eta[i]);
      if (raw < floor_ || raw > 1.0 - floor_) {
        d[i] = 0.0;
        continue;
      }
      d[i] = -t_[i] * (1.0 - raw) / raw - (1.0 - t_[i]) * raw / (1.0 - raw);
    }
    return design_.transpose() * d.asDiagonal() * design_ / static_cast<double>(design_.rows());
  }

  Vector gradient(const Vector& beta) const {
    return 2.0 * residual_jacobian(beta).transpose() * balance_residual(beta) +
           2.0 * ridge_ * mask_.cwiseProduct(beta);
  }

  const Vector& penalty_mask() const { return mask_; }
  double ridge() const { return ridge_; }

 private:
  Matrix design_;
  Vector t_;
  Vector mask_;
  double ridge_;
  double floor_;
};

/// CBPS as a pure balance-objective minimizer. Descent uses the gradient
/// preconditioned by the damped Gauss-Newton metric, with Armijo backtracking.
inline PropensityFit fit_cbps(const Matrix& covariates, const std::vector<int>& treatment,
                              const CbpsConfig& config = {}) {
  detail::check_floor(config.probability_floor);
  if (config.ridge_penalty < 0.0 || config.max_iterations < 1 || !(config.gradient_tol > 0.0)) {
    throw Error(ErrorCode::kConfig, "invalid CBPS configuration");
  }
  detail::check_binary(covariates, treatment);

  const CbpsObjective objective(covariates, treatment, config.ridge_penalty,
                                config.probability_floor);
  Vector beta = Vector::Zero(objective.dim());
  if (config.init == CbpsInit::kLogisticMle) {
    LogisticConfig lc;
    lc.ridge_penalty = config.ridge_penalty;
    lc.probability_floor = config.probability_floor;
    beta = fit_logistic(covariates, treatment, lc).coefficients;
  }

  double value = objective.value(beta);
  if (!std::isfinite(value)) throw Error(ErrorCode::kOverflow, "CBPS objective is not finite");
  std::vector<double> trace{value};

  bool converged = false;
  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    const Vector residual = objective.balance_residual(beta);
    const Matrix jac = objective.residual_jacobian(beta);
    const Vector grad = 2.0 * jac.transpose() * residual +
                        2.0 * objective.ridge() * objective.penalty_mask().cwiseProduct(beta);
    if (!grad.allFinite()) throw Error(ErrorCode::kOverflow, "CBPS gradient is not finite");
    if (grad.cwiseAbs().maxCoeff() <= config.gradient_tol) {
      converged = true;
      break;
    }

    Matrix metric = 2.0 * jac.transpose() * jac;
    metric.diagonal() += 2.0 * objective.ridge() * objective.penalty_mask();
    const double damping = 1e-10 * std::max(1.0, metric.diagonal().maxCoeff());
    metric.diagonal().array() += damping;
    Vector direction = -metric.ldlt().solve(grad);
    double slope = grad.dot(direction);
    if (!direction.allFinite() || !(slope < 0.0)) {
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Vector candidate = beta + step * direction;
      const double cand = objective.value(candidate);
      if (std::isfinite(cand) && cand <= value + 1e-4 * step * slope) {
        beta = candidate;
        value = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable decrease remains along a descent direction.
      converged = true;
      break;
    }
    trace.push_back(value);
  }

  if (!converged) {
    throw Error(ErrorCode::kNonConvergence,
                "CBPS did not reach gradient tolerance in " + std::to_string(iter) +
                    " iterations (objective " + std::to_string(value) + ")");
  }

  PropensityFit fit;
  fit.coefficients = beta;
  fit.estimator = PropensityEstimator::kCbps;
  fit.probability_floor = config.probability_floor;
  fit.iterations = iter;
  fit.objective = value;
  fit.trace = std::move(trace);
  fit.probabilities = predict_propensity(fit, covariates);
  return fit;
}

}  // namespace dfw
