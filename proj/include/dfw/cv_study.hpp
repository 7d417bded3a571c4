#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "dfw/csv.hpp"
#include "dfw/error.hpp"
#include "dfw/weighting.hpp"

namespace dfw {

enum class EnumerationMode { kTuples, kMultisets };

inline std::string_view to_string(EnumerationMode m) {
  return m == EnumerationMode::kTuples ? "tuples" : "multisets";
}

inline EnumerationMode parse_enumeration_mode(std::string_view s) {
  if (s == "tuples" || s == "TUPLES") return EnumerationMode::kTuples;
  if (s == "multisets" || s == "MULTISETS") return EnumerationMode::kMultisets;
  throw Error(ErrorCode::kConfig, "unknown enumeration mode '" + std::string(s) + "'");
}

struct CvStudyConfig {
  double grid_min = 0.10;
  double grid_max = 0.90;
  double step = 0.10;
  int tuple_size = 6;
  EnumerationMode mode = EnumerationMode::kTuples;
  // CVs closer than this count as equal, never as a DFW win.
  double tie_tolerance = 1e-12;
};

struct CvStudyResult {
  EnumerationMode mode = EnumerationMode::kTuples;
  long long total = 0;
  long long dfw_wins = 0;  // strict CV(DFW) < CV(IPW)
  long long ties = 0;
  std::vector<double> differences;  // CV(DFW) - CV(IPW) per enumeration

  double fraction() const { return total ? static_cast<double>(dfw_wins) / static_cast<double>(total) : 0.0; }
};

inline std::vector<double> cv_grid_levels(const CvStudyConfig& c) {
  if (!(c.step > 0.0) || !(c.grid_min > 0.0) || !(c.grid_max < 1.0) || c.grid_max < c.grid_min) {
    throw Error(ErrorCode::kConfig, "propensity grid must lie inside (0,1) with a positive step");
  }
  const auto count = static_cast<int>(std::llround((c.grid_max - c.grid_min) / c.step)) + 1;
  if (count < 2) throw Error(ErrorCode::kConfig, "propensity grid needs at least 2 levels");
  std::vector<double> levels;
  for (int i = 0; i < count; ++i) levels.push_back(c.grid_min + i * c.step);
  return levels;
}

/// CV of IPW weights (1/p) and DFW weights (1 - p) for one propensity
/// assignment, every sample treated with p its observed-treatment probability.
struct CvPair {
  double ipw = 0.0;
  double dfw = 0.0;
};

inline CvPair cv_pair(const std::vector<double>& probabilities) {
  Vector e(static_cast<Eigen::Index>(probabilities.size()));
  for (std::size_t i = 0; i < probabilities.size(); ++i) e[static_cast<Eigen::Index>(i)] = probabilities[i];
  const std::vector<int> treated(probabilities.size(), 1);
  Matrix rows(e.size(), 2);
  rows.col(0) = (1.0 - e.array()).matrix();
  rows.col(1) = e;
  return {cv_of_weights(ipw_weights(e, treated)), cv_of_weights(dfw_weights(rows, treated))};
}

/// Enumerates all size-k propensity assignments over the grid (ordered tuples
/// or multisets) and counts strict DFW wins on weight CV.
inline CvStudyResult run_cv_study(const CvStudyConfig& config) {
  if (config.tuple_size < 1) throw Error(ErrorCode::kConfig, "tuple_size must be positive");
  const auto levels = cv_grid_levels(config);
  const int k = config.tuple_size;
  const int m = static_cast<int>(levels.size());

  CvStudyResult result;
  result.mode = config.mode;
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  std::vector<double> probs(static_cast<std::size_t>(k));
  while (true) {
    for (int i = 0; i < k; ++i) probs[static_cast<std::size_t>(i)] = levels[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    const CvPair cv = cv_pair(probs);
    const double diff = cv.dfw - cv.ipw;
    ++result.total;
    if (std::abs(diff) <= config.tie_tolerance) {
      ++result.ties;
    } else if (diff < 0.0) {
      ++result.dfw_wins;
    }
    result.differences.push_back(diff);

    // Odometer increment; multisets keep indices non-decreasing.
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - 1) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int j = pos + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] =
          config.mode == EnumerationMode::kMultisets ? idx[static_cast<std::size_t>(pos)] : 0;
    }
  }
  return result;
}

inline std::string cv_differences_csv(const CvStudyResult& r) {
  std::string out = "mode,cv_difference\n";
  const std::string mode(to_string(r.mode));
  for (double d : r.differences) out += mode + "," + csv::format(d) + "\n";
  return out;
}

}  // namespace dfw
