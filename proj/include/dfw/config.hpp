#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dfw/cv_study.hpp"
#include "dfw/data_model.hpp"
#include "dfw/effects.hpp"
#include "dfw/error.hpp"

namespace dfw {

inline constexpr int kConfigFormatVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

enum class DatasetKind { kLinear, kNonlinear, kRoles, kIhdp, kJobs };

inline std::string_view to_string(DatasetKind d) {
  switch (d) {
    case DatasetKind::kLinear: return "linear";
    case DatasetKind::kNonlinear: return "nonlinear";
    case DatasetKind::kRoles: return "roles";
    case DatasetKind::kIhdp: return "ihdp";
    case DatasetKind::kJobs: return "jobs";
  }
  return "linear";
}

enum class EvalSplit { kTest, kTrain, kFull };

inline std::string_view to_string(EvalSplit e) {
  switch (e) {
    case EvalSplit::kTest: return "test";
    case EvalSplit::kTrain: return "train";
    case EvalSplit::kFull: return "full";
  }
  return "test";
}

/// Flat key = value experiment description. Lines starting with '#' are
/// comments. Unknown keys are rejected.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::kLinear;
  std::string bias = "low";  // synthetic designs: low | moderate | high
  std::optional<int> n;
  std::optional<double> effect_c;
  std::string data_path;
  std::vector<Scheme> schemes{Scheme::kDfw, Scheme::kIpw, Scheme::kCbps, Scheme::kOverlap};
  std::map<Scheme, EffectEstimator> estimator_overrides;
  int replications = 30;
  double split_ratio = 0.8;
  std::uint64_t base_seed = 20250101;
  std::string output_dir = "out";
  std::optional<Linearity> linearity;  // defaults by dataset
  double probability_floor = 1e-6;
  double ridge_penalty = 1e-3;  // against the weight-normalized loss
  double kernel_penalty = 0.1;
  std::string kernel_bandwidth = "auto";  // auto | median | <number>
  EvalSplit eval_split = EvalSplit::kTest;
  std::optional<bool> standardize;        // defaults on for real data
  std::optional<double> jobs_true_ate;
  int threads = 1;

  Linearity resolved_linearity() const {
    if (linearity) return *linearity;
    return dataset == DatasetKind::kNonlinear ? Linearity::kNonlinear : Linearity::kLinear;
  }

  EffectEstimator estimator_for(Scheme s) const {
    if (auto it = estimator_overrides.find(s); it != estimator_overrides.end()) return it->second;
    return s == Scheme::kOverlap ? EffectEstimator::kWeightedMeanDiff
                                 : EffectEstimator::kWeightedRegression;
  }

  void validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error(ErrorCode::kConfig, "split_ratio must be in (0,1)");
    if (replications < 1) throw Error(ErrorCode::kConfig, "replications must be >= 1");
    if (threads < 1) throw Error(ErrorCode::kConfig, "threads must be >= 1");
    if (schemes.empty()) throw Error(ErrorCode::kConfig, "no schemes selected");
    if (bias != "low" && bias != "moderate" && bias != "high") {
      throw Error(ErrorCode::kConfig, "bias must be low, moderate or high");
    }
    if ((dataset == DatasetKind::kIhdp || dataset == DatasetKind::kJobs) && data_path.empty()) {
      throw Error(ErrorCode::kConfig, "data_path is required for real datasets");
    }
  }

  /// Canonical key = value text; hashed for provenance.
  std::string canonical() const {
    std::ostringstream o;
    o << "format_version = " << kConfigFormatVersion << '\n';
    o << "dataset = " << to_string(dataset) << '\n';
    o << "bias = " << bias << '\n';
    if (n) o << "n = " << *n << '\n';
    if (effect_c) o << "effect_c = " << csv::format(*effect_c) << '\n';
    if (!data_path.empty()) o << "data_path = " << data_path << '\n';
    o << "schemes = ";
    for (std::size_t i = 0; i < schemes.size(); ++i) o << (i ? "," : "") << to_string(schemes[i]);
    o << '\n';
    for (const auto& [s, e] : estimator_overrides) o << "estimator." << to_string(s) << " = " << to_string(e) << '\n';
    o << "replications = " << replications << '\n';
    o << "split_ratio = " << csv::format(split_ratio) << '\n';
    o << "base_seed = " << base_seed << '\n';
    o << "linearity = " << to_string(resolved_linearity()) << '\n';
    o << "probability_floor = " << csv::format(probability_floor) << '\n';
    o << "ridge_penalty = " << csv::format(ridge_penalty) << '\n';
    o << "kernel_penalty = " << csv::format(kernel_penalty) << '\n';
    o << "kernel_bandwidth = " << kernel_bandwidth << '\n';
    o << "eval_split = " << to_string(eval_split) << '\n';
    if (standardize) o << "standardize = " << (*standardize ? "true" : "false") << '\n';
    if (jobs_true_ate) o << "jobs_true_ate = " << csv::format(*jobs_true_ate) << '\n';
    return o.str();
  }
};

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw Error(ErrorCode::kConfig, key + ": expected a boolean, got '" + v + "'");
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!csv::parse_double(v, out)) throw Error(ErrorCode::kConfig, key + ": expected a number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, key + ": expected an integer, got '" + v + "'");
  }
}

inline EffectEstimator parse_estimator(const std::string& v) {
  if (v == "WEIGHTED_REGRESSION" || v == "regression") return EffectEstimator::kWeightedRegression;
  if (v == "WEIGHTED_MEAN_DIFF" || v == "mean_diff") return EffectEstimator::kWeightedMeanDiff;
  throw Error(ErrorCode::kConfig, "unknown estimator '" + v + "'");
}

inline DatasetKind parse_dataset(const std::string& v) {
  for (DatasetKind d : {DatasetKind::kLinear, DatasetKind::kNonlinear, DatasetKind::kRoles,
                        DatasetKind::kIhdp, DatasetKind::kJobs}) {
    if (v == to_string(d)) return d;
  }
  throw Error(ErrorCode::kConfig, "unknown dataset '" + v + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (csv::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(csv::trim(std::string_view(line).substr(0, eq)));
    const std::string value(csv::trim(std::string_view(line).substr(eq + 1)));
    using namespace detail;
    if (key == "format_version") {
      if (parse_int(key, value) != kConfigFormatVersion) {
        throw Error(ErrorCode::kConfig, "unsupported config format_version " + value);
      }
    } else if (key == "dataset") {
      c.dataset = parse_dataset(value);
    } else if (key == "bias") {
      c.bias = value;
    } else if (key == "n") {
      c.n = static_cast<int>(parse_int(key, value));
    } else if (key == "effect_c") {
      c.effect_c = parse_real(key, value);
    } else if (key == "data_path") {
      c.data_path = value;
    } else if (key == "schemes") {
      c.schemes.clear();
      for (const auto& s : csv::split(value, ',')) {
        if (!s.empty()) c.schemes.push_back(parse_scheme(s));
      }
    } else if (key.rfind("estimator.", 0) == 0) {
      c.estimator_overrides[parse_scheme(key.substr(10))] = parse_estimator(value);
    } else if (key == "replications") {
      c.replications = static_cast<int>(parse_int(key, value));
    } else if (key == "split_ratio") {
      c.split_ratio = parse_real(key, value);
    } else if (key == "base_seed") {
      c.base_seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else if (key == "linearity") {
      if (value == "linear") c.linearity = Linearity::kLinear;
      else if (value == "nonlinear") c.linearity = Linearity::kNonlinear;
      else throw Error(ErrorCode::kConfig, "linearity must be linear or nonlinear");
    } else if (key == "probability_floor") {
      c.probability_floor = parse_real(key, value);
    } else if (key == "ridge_penalty") {
      c.ridge_penalty = parse_real(key, value);
    } else if (key == "kernel_penalty") {
      c.kernel_penalty = parse_real(key, value);
    } else if (key == "kernel_bandwidth") {
      if (value != "auto" && value != "median") parse_real(key, value);
      c.kernel_bandwidth = value;
    } else if (key == "eval_split") {
      if (value == "test") c.eval_split = EvalSplit::kTest;
      else if (value == "train") c.eval_split = EvalSplit::kTrain;
      else if (value == "full") c.eval_split = EvalSplit::kFull;
      else throw Error(ErrorCode::kConfig, "eval_split must be test, train or full");
    } else if (key == "standardize") {
      c.standardize = parse_bool(key, value);
    } else if (key == "jobs_true_ate") {
      c.jobs_true_ate = parse_real(key, value);
    } else if (key == "threads") {
      c.threads = static_cast<int>(parse_int(key, value));
    } else {
      throw Error(ErrorCode::kConfig, "unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dfw
