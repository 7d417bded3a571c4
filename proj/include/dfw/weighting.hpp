#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dfw/data_model.hpp"
#include "dfw/error.hpp"

namespace dfw {

/// Which propensity model feeds a weighting scheme. The CBPS scheme always
/// uses CBPS propensities; every other scheme defaults to logistic.
struct SchemeSpec {
  Scheme scheme = Scheme::kDfw;
  PropensityEstimator propensity_source = PropensityEstimator::kLogistic;

  static SchemeSpec for_scheme(Scheme s) {
    return {s, s == Scheme::kCbps ? PropensityEstimator::kCbps : PropensityEstimator::kLogistic};
  }

  bool valid() const {
    return scheme != Scheme::kCbps || propensity_source == PropensityEstimator::kCbps;
  }
};

/// Deconfounding-factor weights: w_i = 1 - P(T = t_i | x_i). Works for any
/// number of treatment arms.
inline WeightVector dfw_weights(const Matrix& probabilities, std::span<const int> treatment) {
  if (static_cast<std::size_t>(probabilities.rows()) != treatment.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "probability rows and treatment length differ");
  }
  WeightVector out{Vector(probabilities.rows()), Scheme::kDfw};
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    const int t = treatment[static_cast<std::size_t>(i)];
    if (t < 0 || t >= probabilities.cols()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "treatment " + std::to_string(t) + " has no probability column");
    }
    out.weights[i] = 1.0 - probabilities(i, t);
  }
  return out;
}

namespace detail {
inline void check_binary_pair(const Vector& e, std::span<const int> treatment) {
  if (static_cast<std::size_t>(e.size()) != treatment.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "propensity and treatment lengths differ");
  }
  for (int t : treatment) {
    if (t != 0 && t != 1) throw Error(ErrorCode::kCoding, "binary treatment expected");
  }
}
}  // namespace detail

/// Inverse probability weights, unclipped.
inline WeightVector ipw_weights(const Vector& e, std::span<const int> treatment) {
  detail::check_binary_pair(e, treatment);
  WeightVector out{Vector(e.size()), Scheme::kIpw};
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    out.weights[i] = treatment[static_cast<std::size_t>(i)] == 1 ? 1.0 / e[i] : 1.0 / (1.0 - e[i]);
  }
  return out;
}

/// Overlap weights: probability of the opposite treatment.
inline WeightVector overlap_weights(const Vector& e, std::span<const int> treatment) {
  detail::check_binary_pair(e, treatment);
  WeightVector out{Vector(e.size()), Scheme::kOverlap};
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    out.weights[i] = treatment[static_cast<std::size_t>(i)] == 1 ? 1.0 - e[i] : e[i];
  }
  return out;
}

inline WeightVector unit_weights(Eigen::Index n) { return {Vector::Ones(n), Scheme::kUnit}; }

/// Coefficient of variation sigma / mu with the population (divisor n)
/// standard deviation.
inline double cv_of_weights(const Vector& w) {
  if (w.size() < 1) throw Error(ErrorCode::kInsufficientData, "CV needs at least one weight");
  const double mean = w.mean();
  if (!(mean > 0.0)) throw Error(ErrorCode::kZeroWeight, "CV undefined for non-positive mean");
  const double var = (w.array() - mean).square().mean();
  return std::sqrt(var) / mean;
}

inline double cv_of_weights(const WeightVector& w) { return cv_of_weights(w.weights); }

}  // namespace dfw
