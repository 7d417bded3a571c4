#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dfw/csv.hpp"
#include "dfw/data_model.hpp"
#include "dfw/error.hpp"

namespace dfw {

// IHDP realization files: one CSV per realization, named ihdp_npci_<k>.csv,
// columns: treatment, y_factual, y_cfactual, mu0, mu1, x1..x25. A header row
// is optional; when present it must match this manifest.
namespace ihdp {
inline constexpr int kRows = 747;
inline constexpr int kTreated = 139;
inline constexpr int kCovariates = 25;
inline constexpr int kColumns = 5 + kCovariates;

inline std::vector<std::string> column_manifest() {
  std::vector<std::string> cols{"treatment", "y_factual", "y_cfactual", "mu0", "mu1"};
  for (int j = 1; j <= kCovariates; ++j) cols.push_back("x" + std::to_string(j));
  return cols;
}

// The first six covariates are the continuous ones.
inline std::vector<std::string> feature_names() {
  std::vector<std::string> names{"birth.w", "birth.h", "preterm", "birth.o", "nnhealth", "momage"};
  for (int j = 7; j <= kCovariates; ++j) names.push_back("x" + std::to_string(j));
  return names;
}
}  // namespace ihdp

// Jobs (LaLonde) table: header required; columns matched by name.
namespace jobs {
inline constexpr int kRows = 614;
inline constexpr int kTreated = 185;

inline const std::array<std::string, 8>& covariate_names() {
  static const std::array<std::string, 8> names{"age",     "educ",   "black", "hisp",
                                                "married", "nodegr", "re74",  "re75"};
  return names;
}

inline const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a{
      {"treat", "treat"},     {"treatment", "treat"}, {"t", "treat"},
      {"age", "age"},         {"educ", "educ"},       {"education", "educ"},
      {"black", "black"},     {"hisp", "hisp"},       {"hispan", "hisp"},
      {"hispanic", "hisp"},   {"married", "married"}, {"nodegr", "nodegr"},
      {"nodegree", "nodegr"}, {"re74", "re74"},       {"re75", "re75"},
      {"re78", "re78"},
  };
  return a;
}
}  // namespace jobs

struct LoadOptions {
  bool standardize = false;
};

struct IhdpRealization {
  int realization_index = 1;
  DatasetBundle bundle;
};

struct JobsTable {
  DatasetBundle bundle;
};

/// Z-scores every column that is not 0/1 valued (sample sd, divisor n - 1).
inline DatasetBundle standardize_continuous(DatasetBundle bundle) {
  for (Eigen::Index j = 0; j < bundle.covariates.cols(); ++j) {
    auto col = bundle.covariates.col(j);
    const bool binary = (col.array() == 0.0 || col.array() == 1.0).all();
    if (binary || col.size() < 2) continue;
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(col.size() - 1));
    if (sd > 0.0) col = (col.array() - mean) / sd;
  }
  return bundle;
}

inline std::filesystem::path ihdp_file(const std::filesystem::path& dir, int index) {
  return dir / ("ihdp_npci_" + std::to_string(index) + ".csv");
}

/// Loads one IHDP realization (1-based) from a directory of realization files.
inline IhdpRealization load_ihdp(const std::filesystem::path& dir, int realization_index,
                                 const LoadOptions& options = {}) {
  if (realization_index < 1) {
    throw Error(ErrorCode::kMissingRealization, "realization indices are 1-based");
  }
  const auto file = ihdp_file(dir, realization_index);
  if (!std::filesystem::exists(file)) {
    throw Error(ErrorCode::kMissingRealization, "no realization file '" + file.string() + "'");
  }
  const csv::Table table = csv::read_numeric(file.string());
  if (!table.header.empty() && table.header != ihdp::column_manifest()) {
    throw Error(ErrorCode::kSchema, file.string() + ": header does not match the IHDP manifest");
  }
  for (const auto& row : table.rows) {
    if (static_cast<int>(row.size()) != ihdp::kColumns) {
      throw Error(ErrorCode::kSchema, file.string() + ": expected " +
                                          std::to_string(ihdp::kColumns) + " columns, found " +
                                          std::to_string(row.size()));
    }
  }
  const int n = static_cast<int>(table.rows.size());
  if (n != ihdp::kRows) {
    throw Error(ErrorCode::kCount, file.string() + ": expected " + std::to_string(ihdp::kRows) +
                                       " rows, found " + std::to_string(n));
  }

  DatasetBundle b;
  b.covariates.resize(n, ihdp::kCovariates);
  b.treatment.resize(static_cast<std::size_t>(n));
  b.outcome_factual.resize(n);
  Vector y0(n);
  Vector y1(n);
  int treated = 0;
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    if (row[0] != 0.0 && row[0] != 1.0) {
      throw Error(ErrorCode::kSchema, file.string() + ": treatment must be 0/1");
    }
    const int t = static_cast<int>(row[0]);
    treated += t;
    b.treatment[static_cast<std::size_t>(i)] = t;
    b.outcome_factual[i] = row[1];
    y1[i] = t == 1 ? row[1] : row[2];
    y0[i] = t == 1 ? row[2] : row[1];
    for (int j = 0; j < ihdp::kCovariates; ++j) b.covariates(i, j) = row[static_cast<std::size_t>(5 + j)];
  }
  if (treated != ihdp::kTreated) {
    throw Error(ErrorCode::kCount, file.string() + ": expected " + std::to_string(ihdp::kTreated) +
                                       " treated, found " + std::to_string(treated));
  }
  b.outcome_y0 = std::move(y0);
  b.outcome_y1 = std::move(y1);
  b.feature_names = ihdp::feature_names();
  if (options.standardize) b = standardize_continuous(std::move(b));
  return {realization_index, validate_bundle(b)};
}

/// Loads the Jobs table (outcome: 1978 earnings; no counterfactuals).
inline JobsTable load_jobs(const std::filesystem::path& path, const LoadOptions& options = {}) {
  const csv::Table table = csv::read_numeric(path.string());
  if (table.header.empty()) throw Error(ErrorCode::kSchema, path.string() + ": header row required");
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    std::string name = table.header[c];
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    const auto it = jobs::aliases().find(name);
    if (it != jobs::aliases().end()) index[it->second] = c;
  }
  std::vector<std::string> required{"treat", "re78"};
  for (const auto& c : jobs::covariate_names()) required.push_back(c);
  for (const auto& name : required) {
    if (!index.count(name)) throw Error(ErrorCode::kSchema, path.string() + ": missing column '" + name + "'");
  }
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::kSchema, path.string() + ": ragged row");
    }
  }
  const int n = static_cast<int>(table.rows.size());
  if (n != jobs::kRows) {
    throw Error(ErrorCode::kCount, path.string() + ": expected " + std::to_string(jobs::kRows) +
                                       " rows, found " + std::to_string(n));
  }

  const auto is_binary = [](double v) { return v == 0.0 || v == 1.0; };
  DatasetBundle b;
  b.covariates.resize(n, 8);
  b.treatment.resize(static_cast<std::size_t>(n));
  b.outcome_factual.resize(n);
  int treated = 0;
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const double t = row[index["treat"]];
    if (!is_binary(t)) throw Error(ErrorCode::kSchema, path.string() + ": treat must be 0/1");
    b.treatment[static_cast<std::size_t>(i)] = static_cast<int>(t);
    treated += static_cast<int>(t);
    b.outcome_factual[i] = row[index["re78"]];
    for (int j = 0; j < 8; ++j) {
      const auto& name = jobs::covariate_names()[static_cast<std::size_t>(j)];
      const double v = row[index[name]];
      if ((name == "black" || name == "hisp" || name == "married" || name == "nodegr") && !is_binary(v)) {
        throw Error(ErrorCode::kSchema, path.string() + ": column '" + name + "' must be 0/1 (row " +
                                            std::to_string(i + 1) + ")");
      }
      b.covariates(i, j) = v;
    }
  }
  if (treated != jobs::kTreated) {
    throw Error(ErrorCode::kCount, path.string() + ": expected " + std::to_string(jobs::kTreated) +
                                       " treated, found " + std::to_string(treated));
  }
  b.feature_names.assign(jobs::covariate_names().begin(), jobs::covariate_names().end());
  if (options.standardize) b = standardize_continuous(std::move(b));
  return {validate_bundle(b)};
}

/// Bundle CSV: x1..xK, t, y_factual[, y0, y1][, true_propensity]. Optional
/// columns are written only when present.
inline std::string bundle_to_csv(const DatasetBundle& b) {
  std::ostringstream out;
  const auto k = b.covariates.cols();
  for (Eigen::Index j = 0; j < k; ++j) {
    out << (j < static_cast<Eigen::Index>(b.feature_names.size())
                ? b.feature_names[static_cast<std::size_t>(j)]
                : "x" + std::to_string(j + 1))
        << ',';
  }
  out << "t,y_factual";
  if (b.has_potential_outcomes()) out << ",y0,y1";
  if (b.true_propensity) out << ",true_propensity";
  out << '\n';
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < k; ++j) out << csv::format(b.covariates(r, j)) << ',';
    out << b.treatment[i] << ',' << csv::format(b.outcome_factual[r]);
    if (b.has_potential_outcomes()) {
      out << ',' << csv::format((*b.outcome_y0)[r]) << ',' << csv::format((*b.outcome_y1)[r]);
    }
    if (b.true_propensity) out << ',' << csv::format((*b.true_propensity)[r]);
    out << '\n';
  }
  return out.str();
}

/// Reads a CSV written by bundle_to_csv (any leading columns before `t` are
/// covariates).
inline DatasetBundle read_bundle_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_numeric(path.string());
  const auto& h = table.header;
  const auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(h.begin(), h.end(), name);
    if (it == h.end()) return std::nullopt;
    return static_cast<std::size_t>(it - h.begin());
  };
  const auto t_col = find("t");
  const auto y_col = find("y_factual");
  if (!t_col || !y_col || *t_col == 0) {
    throw Error(ErrorCode::kSchema, path.string() + ": needs covariate columns followed by t, y_factual");
  }
  const auto y0_col = find("y0");
  const auto y1_col = find("y1");
  const auto p_col = find("true_propensity");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto k = static_cast<Eigen::Index>(*t_col);
  DatasetBundle b;
  b.covariates.resize(n, k);
  b.outcome_factual.resize(n);
  b.treatment.resize(static_cast<std::size_t>(n));
  Vector y0(n), y1(n), p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    if (row.size() != h.size()) throw Error(ErrorCode::kSchema, path.string() + ": ragged row");
    for (Eigen::Index j = 0; j < k; ++j) b.covariates(i, j) = row[static_cast<std::size_t>(j)];
    const double t = row[*t_col];
    if (t != std::floor(t)) throw Error(ErrorCode::kCoding, path.string() + ": non-integer treatment");
    b.treatment[static_cast<std::size_t>(i)] = static_cast<int>(t);
    b.outcome_factual[i] = row[*y_col];
    if (y0_col && y1_col) {
      y0[i] = row[*y0_col];
      y1[i] = row[*y1_col];
    }
    if (p_col) p[i] = row[*p_col];
  }
  if (y0_col && y1_col) {
    b.outcome_y0 = y0;
    b.outcome_y1 = y1;
  }
  if (p_col) b.true_propensity = p;
  b.feature_names.assign(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(k));
  return validate_bundle(b);
}

}  // namespace dfw
