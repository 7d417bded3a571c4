#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfw/error.hpp"

namespace dfw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class FeatureRole { kInstrumental, kConfounder, kAdjustment, kNoise };

inline std::string_view to_string(FeatureRole role) {
  switch (role) {
    case FeatureRole::kInstrumental: return "instrumental";
    case FeatureRole::kConfounder: return "confounder";
    case FeatureRole::kAdjustment: return "adjustment";
    case FeatureRole::kNoise: return "noise";
  }
  return "noise";
}

enum class Scheme { kDfw, kIpw, kCbps, kOverlap, kUnit };

inline std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kDfw: return "DFW";
    case Scheme::kIpw: return "IPW";
    case Scheme::kCbps: return "CBPS";
    case Scheme::kOverlap: return "OVERLAP";
    case Scheme::kUnit: return "UNIT";
  }
  return "UNIT";
}

inline Scheme parse_scheme(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Scheme s : {Scheme::kDfw, Scheme::kIpw, Scheme::kCbps, Scheme::kOverlap,
                   Scheme::kUnit}) {
    if (upper == to_string(s)) return s;
  }
  throw Error(ErrorCode::kConfig, "unknown weighting scheme '" + std::string(text) + "'");
}

/// Observational dataset: covariates, integer-coded treatment, factual outcome
/// and, for simulated data, both potential outcomes.
struct DatasetBundle {
  Matrix covariates;                 // n x K
  std::vector<int> treatment;        // values in {0, ..., num_treatments - 1}
  Vector outcome_factual;
  std::optional<Vector> outcome_y0;
  std::optional<Vector> outcome_y1;
  std::vector<std::string> feature_names;
  std::optional<std::vector<FeatureRole>> feature_roles;
  // Treatment probability used by a generator for the Bernoulli draw.
  std::optional<Vector> true_propensity;
  // Individual effect y1 - y0 as specified by a generator, free of the
  // rounding in the stored outcome difference.
  std::optional<Vector> true_effect;
  int num_treatments = 2;

  std::size_t size() const { return treatment.size(); }
  Eigen::Index num_features() const { return covariates.cols(); }
  bool has_potential_outcomes() const { return outcome_y0 && outcome_y1; }
};

namespace detail {
template <typename Derived>
bool same_values(const Eigen::DenseBase<Derived>& a, const Eigen::DenseBase<Derived>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.derived().array() == b.derived().array()).all();
}

template <typename T>
bool same_optional(const std::optional<T>& a, const std::optional<T>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_values(*a, *b);
}
}  // namespace detail

/// Bit-for-bit equality of every stored column.
inline bool identical(const DatasetBundle& a, const DatasetBundle& b) {
  return detail::same_values(a.covariates, b.covariates) && a.treatment == b.treatment &&
         detail::same_values(a.outcome_factual, b.outcome_factual) &&
         detail::same_optional(a.outcome_y0, b.outcome_y0) &&
         detail::same_optional(a.outcome_y1, b.outcome_y1) &&
         detail::same_optional(a.true_propensity, b.true_propensity) &&
         detail::same_optional(a.true_effect, b.true_effect) &&
         a.feature_names == b.feature_names && a.feature_roles == b.feature_roles &&
         a.num_treatments == b.num_treatments;
}

/// Per-sample weights tagged with the scheme that produced them.
struct WeightVector {
  Vector weights;
  Scheme scheme = Scheme::kUnit;

  Eigen::Index size() const { return weights.size(); }
};

enum class PropensityEstimator { kLogistic, kCbps };

/// Fitted treatment-assignment model. `coefficients` holds the intercept
/// first; `probabilities` is n x M and row-stochastic.
struct PropensityFit {
  Vector coefficients;
  Matrix probabilities;
  PropensityEstimator estimator = PropensityEstimator::kLogistic;
  double probability_floor = 1e-6;
  int iterations = 0;
  double objective = 0.0;
  // Objective value after each accepted step (CBPS only).
  std::vector<double> trace;

  // P(T = 1 | x) for binary fits.
  Vector treated_probability() const { return probabilities.col(1); }
};

inline std::vector<Eigen::Index> arm_indices(const std::vector<int>& treatment, int arm) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < treatment.size(); ++i) {
    if (treatment[i] == arm) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

inline Vector gather(const Vector& values, std::span<const Eigen::Index> rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[rows[i]];
  return out;
}

inline Vector treatment_as_vector(const std::vector<int>& treatment) {
  Vector t(static_cast<Eigen::Index>(treatment.size()));
  for (std::size_t i = 0; i < treatment.size(); ++i) t[static_cast<Eigen::Index>(i)] = treatment[i];
  return t;
}

/// Checks every bundle invariant and returns the bundle unchanged.
inline DatasetBundle validate_bundle(const DatasetBundle& bundle) {
  const auto n = bundle.treatment.size();
  const auto rows = static_cast<std::size_t>(bundle.covariates.rows());
  if (n == 0 || rows != n || static_cast<std::size_t>(bundle.outcome_factual.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch,
                "treatment/covariate/outcome lengths differ or are empty (n=" +
                    std::to_string(n) + ", rows=" + std::to_string(rows) +
                    ", outcome=" + std::to_string(bundle.outcome_factual.size()) + ")");
  }
  if (bundle.covariates.cols() < 1) {
    throw Error(ErrorCode::kShapeMismatch, "bundle has no covariates");
  }
  if (!bundle.feature_names.empty() &&
      static_cast<Eigen::Index>(bundle.feature_names.size()) != bundle.covariates.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "feature_names length differs from covariate count");
  }
  if (bundle.feature_roles &&
      static_cast<Eigen::Index>(bundle.feature_roles->size()) != bundle.covariates.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "feature_roles length differs from covariate count");
  }
  for (const auto* opt : {&bundle.outcome_y0, &bundle.outcome_y1, &bundle.true_propensity,
                          &bundle.true_effect}) {
    if (*opt && static_cast<std::size_t>((*opt)->size()) != n) {
      throw Error(ErrorCode::kShapeMismatch, "optional per-sample column has wrong length");
    }
  }
  if (bundle.num_treatments < 2) {
    throw Error(ErrorCode::kCoding, "num_treatments must be at least 2");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(bundle.num_treatments), 0);
  for (int t : bundle.treatment) {
    if (t < 0 || t >= bundle.num_treatments) {
      throw Error(ErrorCode::kCoding, "treatment value " + std::to_string(t) +
                                          " outside {0.." +
                                          std::to_string(bundle.num_treatments - 1) + "}");
    }
    ++counts[static_cast<std::size_t>(t)];
  }
  for (std::size_t arm = 0; arm < counts.size(); ++arm) {
    if (counts[arm] == 0) {
      throw Error(ErrorCode::kEmptyArm, "treatment arm " + std::to_string(arm) + " is empty");
    }
  }
  if (bundle.has_potential_outcomes()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double expected =
          bundle.treatment[i] == 1 ? (*bundle.outcome_y1)[r] : (*bundle.outcome_y0)[r];
      if (bundle.outcome_factual[r] != expected) {
        throw Error(ErrorCode::kCoding,
                    "factual outcome at row " + std::to_string(i) +
                        " does not match the potential outcome of the received arm");
      }
    }
  }
  return bundle;
}

/// Row subset of a bundle, preserving every optional column.
inline DatasetBundle select_rows(const DatasetBundle& bundle, std::span<const Eigen::Index> rows) {
  DatasetBundle out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.covariates.resize(m, bundle.covariates.cols());
  out.treatment.resize(rows.size());
  out.outcome_factual.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto r = rows[static_cast<std::size_t>(i)];
    out.covariates.row(i) = bundle.covariates.row(r);
    out.treatment[static_cast<std::size_t>(i)] = bundle.treatment[static_cast<std::size_t>(r)];
    out.outcome_factual[i] = bundle.outcome_factual[r];
  }
  if (bundle.outcome_y0) out.outcome_y0 = gather(*bundle.outcome_y0, rows);
  if (bundle.outcome_y1) out.outcome_y1 = gather(*bundle.outcome_y1, rows);
  if (bundle.true_propensity) out.true_propensity = gather(*bundle.true_propensity, rows);
  if (bundle.true_effect) out.true_effect = gather(*bundle.true_effect, rows);
  out.feature_names = bundle.feature_names;
  out.feature_roles = bundle.feature_roles;
  out.num_treatments = bundle.num_treatments;
  return out;
}

}  // namespace dfw
