#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dfw/data_model.hpp"
#include "dfw/error.hpp"
#include "dfw/random.hpp"

namespace dfw {

// Child stream ids. Covariate column j draws from stream j, so adding columns
// never perturbs earlier ones.
namespace streams {
inline constexpr std::uint64_t kTreatmentNoise = 1000;
inline constexpr std::uint64_t kTreatmentDraw = 1001;
inline constexpr std::uint64_t kOutcomeNoise = 1002;
}  // namespace streams

struct LinearGenConfig {
  int n = 1500;
  std::array<double, 6> bias_weights{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  double treatment_noise_sd = 0.08;
  double outcome_noise_sd = 0.1;
  double effect_c = 5.0;
  std::uint64_t seed = 0;
};

struct NonlinearGenConfig {
  int n = 1500;
  double alpha = 3.0;
  double beta = 1.0;
  double gamma = 0.5;
  double propensity_noise_sd = 0.05;
  double outcome_noise_sd = 0.1;
  std::uint64_t seed = 0;
};

struct RoleGenConfig {
  int n = 1500;
  int instrumental = 2;
  int confounding = 2;
  int adjustment = 2;
  double instrumental_scale = 1.0;
  double confounding_scale = 1.0;
  double adjustment_scale = 1.0;
  double treatment_noise_sd = 0.08;
  double outcome_noise_sd = 0.1;
  double effect_c = 2.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline void check_common(int n, double a, double b) {
  if (n <= 0) throw Error(ErrorCode::kConfig, "generator needs n > 0");
  if (!(a >= 0.0) || !(b >= 0.0)) throw Error(ErrorCode::kConfig, "noise sds must be >= 0");
}

inline Matrix standard_normal_columns(int n, int k, std::uint64_t seed) {
  Matrix x(n, k);
  for (int j = 0; j < k; ++j) {
    RandomStream rs(seed, static_cast<std::uint64_t>(j));
    for (int i = 0; i < n; ++i) x(i, j) = rs.normal();
  }
  return x;
}

inline std::vector<std::string> x_names(int k) {
  std::vector<std::string> names;
  for (int j = 1; j <= k; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

// Draws treatment from `propensity` and assembles factual outcomes.
inline DatasetBundle assemble(Matrix x, const Vector& propensity, Vector y0, const Vector& effect,
                              std::uint64_t seed) {
  const auto n = x.rows();
  DatasetBundle b;
  b.covariates = std::move(x);
  b.treatment.resize(static_cast<std::size_t>(n));
  RandomStream draw(seed, streams::kTreatmentDraw);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.treatment[static_cast<std::size_t>(i)] = draw.uniform() < propensity[i] ? 1 : 0;
  }
  Vector y1 = y0 + effect;
  b.outcome_factual.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.outcome_factual[i] = b.treatment[static_cast<std::size_t>(i)] == 1 ? y1[i] : y0[i];
  }
  b.outcome_y0 = std::move(y0);
  b.outcome_y1 = std::move(y1);
  b.true_propensity = propensity;
  b.true_effect = effect;
  b.feature_names = x_names(static_cast<int>(b.covariates.cols()));
  return b;
}

}  // namespace detail

/// Linear design with selection bias:
///   P(T=1|x) = sigmoid(x . w + eps),  eps ~ N(0, treatment_noise_sd^2)
///   y0 = w1 x1 + w2 x2 - w3 x3 + w4 x4 - w5 x5 + w6 x6 + eta,  y1 = y0 + c
inline DatasetBundle generate_linear(const LinearGenConfig& config) {
  detail::check_common(config.n, config.treatment_noise_sd, config.outcome_noise_sd);
  constexpr std::array<double, 6> kOutcomeSigns{1, 1, -1, 1, -1, 1};
  Matrix x = detail::standard_normal_columns(config.n, 6, config.seed);
  RandomStream tnoise(config.seed, streams::kTreatmentNoise);
  RandomStream onoise(config.seed, streams::kOutcomeNoise);
  Vector propensity(config.n);
  Vector y0(config.n);
  for (int i = 0; i < config.n; ++i) {
    double logit = 0.0;
    double mean = 0.0;
    for (int j = 0; j < 6; ++j) {
      logit += x(i, j) * config.bias_weights[static_cast<std::size_t>(j)];
      mean += kOutcomeSigns[static_cast<std::size_t>(j)] *
              config.bias_weights[static_cast<std::size_t>(j)] * x(i, j);
    }
    propensity[i] = detail::logistic(logit + tnoise.normal(0.0, config.treatment_noise_sd));
    y0[i] = mean + onoise.normal(0.0, config.outcome_noise_sd);
  }
  const Vector effect = Vector::Constant(config.n, config.effect_c);
  return validate_bundle(detail::assemble(std::move(x), propensity, std::move(y0), effect, config.seed));
}

/// Structural parts of the non-linear design (noise excluded).
inline double nonlinear_logit(const NonlinearGenConfig& c, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return c.alpha * std::tanh(x[0]) + c.beta * x[1] * x[1] - c.gamma * x[2];
}

inline double nonlinear_mean_y0(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return 1.5 * x[0] + std::sin(x[1]) - 0.8 * x[2] + 0.5 * x[3];
}

inline double nonlinear_effect(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return 2.0 + 0.5 * x[4];
}

/// Non-linear assignment and outcome with heterogeneous effect 2 + 0.5 x5.
inline DatasetBundle generate_nonlinear(const NonlinearGenConfig& config) {
  detail::check_common(config.n, config.propensity_noise_sd, config.outcome_noise_sd);
  Matrix x = detail::standard_normal_columns(config.n, 6, config.seed);
  RandomStream tnoise(config.seed, streams::kTreatmentNoise);
  RandomStream onoise(config.seed, streams::kOutcomeNoise);
  Vector propensity(config.n);
  Vector y0(config.n);
  Vector effect(config.n);
  for (int i = 0; i < config.n; ++i) {
    const Eigen::RowVectorXd row = x.row(i);
    propensity[i] = detail::logistic(nonlinear_logit(config, row) +
                                     tnoise.normal(0.0, config.propensity_noise_sd));
    y0[i] = nonlinear_mean_y0(row) + onoise.normal(0.0, config.outcome_noise_sd);
    effect[i] = nonlinear_effect(row);
  }
  return validate_bundle(detail::assemble(std::move(x), propensity, std::move(y0), effect, config.seed));
}

/// Column roles of the role-separated design, in column order.
inline std::vector<FeatureRole> role_layout(const RoleGenConfig& c) {
  std::vector<FeatureRole> roles;
  roles.insert(roles.end(), static_cast<std::size_t>(c.instrumental), FeatureRole::kInstrumental);
  roles.insert(roles.end(), static_cast<std::size_t>(c.confounding), FeatureRole::kConfounder);
  roles.insert(roles.end(), static_cast<std::size_t>(c.adjustment), FeatureRole::kAdjustment);
  return roles;
}

/// Treatment logit (noise excluded): instrumental and confounding columns only.
inline double roles_logit(const RoleGenConfig& c, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const auto roles = role_layout(c);
  double z = 0.0;
  for (std::size_t j = 0; j < roles.size(); ++j) {
    const double v = x[static_cast<Eigen::Index>(j)];
    if (roles[j] == FeatureRole::kInstrumental) z += c.instrumental_scale * v;
    if (roles[j] == FeatureRole::kConfounder) z += c.confounding_scale * v;
  }
  return z;
}

/// Mean control outcome: confounding and adjustment columns only.
inline double roles_mean_y0(const RoleGenConfig& c, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const auto roles = role_layout(c);
  double y = 0.0;
  for (std::size_t j = 0; j < roles.size(); ++j) {
    const double v = x[static_cast<Eigen::Index>(j)];
    if (roles[j] == FeatureRole::kConfounder) y += c.confounding_scale * v;
    if (roles[j] == FeatureRole::kAdjustment) y += c.adjustment_scale * v;
  }
  return y;
}

inline DatasetBundle generate_roles(const RoleGenConfig& config) {
  detail::check_common(config.n, config.treatment_noise_sd, config.outcome_noise_sd);
  if (config.instrumental < 1 || config.confounding < 1 || config.adjustment < 1) {
    throw Error(ErrorCode::kConfig, "each feature role needs at least one column");
  }
  const auto roles = role_layout(config);
  const int k = static_cast<int>(roles.size());
  Matrix x = detail::standard_normal_columns(config.n, k, config.seed);
  RandomStream tnoise(config.seed, streams::kTreatmentNoise);
  RandomStream onoise(config.seed, streams::kOutcomeNoise);
  Vector propensity(config.n);
  Vector y0(config.n);
  for (int i = 0; i < config.n; ++i) {
    const Eigen::RowVectorXd row = x.row(i);
    propensity[i] = detail::logistic(roles_logit(config, row) +
                                     tnoise.normal(0.0, config.treatment_noise_sd));
    y0[i] = roles_mean_y0(config, row) + onoise.normal(0.0, config.outcome_noise_sd);
  }
  const Vector effect = Vector::Constant(config.n, config.effect_c);
  DatasetBundle b = detail::assemble(std::move(x), propensity, std::move(y0), effect, config.seed);
  b.feature_roles = roles;
  return validate_bundle(b);
}

struct BiasPreset {
  std::string_view name;
  LinearGenConfig config;
};

/// Frozen selection-bias presets: w1, w4, w6 vary, the rest stay at 0.5.
inline std::array<BiasPreset, 3> bias_presets() {
  const auto make = [](double v) {
    LinearGenConfig c;
    c.bias_weights = {v, 0.5, 0.5, v, 0.5, v};
    return c;
  };
  return {BiasPreset{"low", make(0.3)}, BiasPreset{"moderate", make(1.5)},
          BiasPreset{"high", make(3.0)}};
}

inline LinearGenConfig bias_preset(std::string_view name) {
  for (const auto& p : bias_presets()) {
    if (p.name == name) return p.config;
  }
  throw Error(ErrorCode::kConfig, "unknown bias preset '" + std::string(name) + "'");
}

}  // namespace dfw
