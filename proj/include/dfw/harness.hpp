#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfw/balance.hpp"
#include "dfw/config.hpp"
#include "dfw/csv.hpp"
#include "dfw/data_model.hpp"
#include "dfw/effects.hpp"
#include "dfw/ingestion.hpp"
#include "dfw/propensity.hpp"
#include "dfw/random.hpp"
#include "dfw/synthetic.hpp"
#include "dfw/weighting.hpp"

namespace dfw {

// ---------------------------------------------------------------------------
// Dataset preparation

/// Non-linear design presets. `moderate` carries the reference constants
/// (alpha 3, beta 1, gamma 0.5); low and high halve and double them.
inline NonlinearGenConfig nonlinear_preset(std::string_view bias) {
  NonlinearGenConfig c;
  double scale = 1.0;
  if (bias == "low") scale = 0.5;
  else if (bias == "high") scale = 2.0;
  else if (bias != "moderate") throw Error(ErrorCode::kConfig, "unknown bias preset '" + std::string(bias) + "'");
  c.alpha *= scale;
  c.beta *= scale;
  c.gamma *= scale;
  return c;
}

/// Per-replication seed: a hash of the base seed and the replication index.
inline std::uint64_t replication_seed(std::uint64_t base_seed, int replication) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(replication));
}

inline constexpr std::uint64_t kSplitStream = 3000;

/// Seeded shuffle into (train, test) row indices.
inline std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> train_test_split(
    std::size_t n, double ratio, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<Eigen::Index>(i);
  RandomStream rs(seed, kSplitStream);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rs.next_u64() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<Eigen::Index> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<Eigen::Index> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

/// Loads or generates the dataset for one replication (1-based index).
class DatasetSource {
 public:
  explicit DatasetSource(const ExperimentConfig& config) : config_(config) {
    if (config.dataset == DatasetKind::kJobs) {
      jobs_ = load_jobs(config.data_path, {config.standardize.value_or(true)}).bundle;
    }
  }

  DatasetBundle get(int replication, std::uint64_t seed) const {
    switch (config_.dataset) {
      case DatasetKind::kLinear: {
        LinearGenConfig c = bias_preset(config_.bias);
        if (config_.n) c.n = *config_.n;
        if (config_.effect_c) c.effect_c = *config_.effect_c;
        c.seed = seed;
        return generate_linear(c);
      }
      case DatasetKind::kNonlinear: {
        NonlinearGenConfig c = nonlinear_preset(config_.bias);
        if (config_.n) c.n = *config_.n;
        c.seed = seed;
        return generate_nonlinear(c);
      }
      case DatasetKind::kRoles: {
        RoleGenConfig c;
        if (config_.n) c.n = *config_.n;
        if (config_.effect_c) c.effect_c = *config_.effect_c;
        c.seed = seed;
        return generate_roles(c);
      }
      case DatasetKind::kIhdp:
        return load_ihdp(config_.data_path, replication, {config_.standardize.value_or(true)}).bundle;
      case DatasetKind::kJobs:
        return *jobs_;
    }
    throw Error(ErrorCode::kConfig, "unsupported dataset");
  }

 private:
  const ExperimentConfig& config_;
  std::optional<DatasetBundle> jobs_;
};

// ---------------------------------------------------------------------------
// Replication logs

struct CovariateLog {
  std::string feature;
  double smd_unweighted = 0.0;
  double smd_weighted = 0.0;
  double ks = 0.0;
};

struct SchemeRun {
  Scheme scheme = Scheme::kDfw;
  EffectEstimator estimator = EffectEstimator::kWeightedRegression;
  double ate_hat = 0.0;
  std::optional<double> ate_true;
  std::optional<double> epsilon_ate;
  std::optional<double> pehe;
  double weight_cv = 0.0;
  std::vector<CovariateLog> balance;
};

struct ReplicationLog {
  int replication = 1;
  std::uint64_t seed = 0;
  std::vector<SchemeRun> runs;
};

struct ReplicationOutput {
  ReplicationLog log;
  // Balance reports with ECDF traces, keyed by scheme name; "unweighted" is
  // the UNIT baseline.
  std::map<std::string, BalanceReport> balance;
};

inline OutcomeModelConfig outcome_config(const ExperimentConfig& config) {
  OutcomeModelConfig oc;
  oc.ridge.penalty = config.ridge_penalty;
  oc.kernel.penalty = config.kernel_penalty;
  if (config.kernel_bandwidth == "median") {
    oc.kernel.median_heuristic = true;
  } else if (config.kernel_bandwidth != "auto") {
    oc.kernel.rbf_bandwidth = detail::parse_real("kernel_bandwidth", config.kernel_bandwidth);
  }
  return oc;
}

inline WeightVector scheme_weights(Scheme scheme, const DatasetBundle& train, const PropensityFit& logistic,
                                   const std::optional<PropensityFit>& cbps) {
  switch (scheme) {
    case Scheme::kDfw: return dfw_weights(logistic.probabilities, train.treatment);
    case Scheme::kIpw: return ipw_weights(logistic.treated_probability(), train.treatment);
    case Scheme::kOverlap: return overlap_weights(logistic.treated_probability(), train.treatment);
    case Scheme::kCbps: {
      WeightVector w = ipw_weights(cbps->treated_probability(), train.treatment);
      w.scheme = Scheme::kCbps;
      return w;
    }
    case Scheme::kUnit: return unit_weights(static_cast<Eigen::Index>(train.size()));
  }
  throw Error(ErrorCode::kConfig, "unsupported scheme");
}

/// Runs every configured scheme on one replication.
inline ReplicationOutput run_replication(const ExperimentConfig& config, const DatasetSource& source,
                                         int replication) {
  const std::uint64_t seed = replication_seed(config.base_seed, replication);
  const auto annotate = [&](const std::string& scope, const Error& e) {
    return Error(e.code(), "replication " + std::to_string(replication) + scope + ": " + e.detail());
  };

  ReplicationOutput out;
  out.log.replication = replication;
  out.log.seed = seed;

  DatasetBundle train, test, full;
  PropensityFit logistic;
  std::optional<PropensityFit> cbps;
  try {
    full = source.get(replication, seed);
    const auto [train_idx, test_idx] = train_test_split(full.size(), config.split_ratio, seed);
    train = validate_bundle(select_rows(full, train_idx));
    test = validate_bundle(select_rows(full, test_idx));
    LogisticConfig lc;
    lc.probability_floor = config.probability_floor;
    logistic = fit_logistic(train.covariates, train.treatment, lc);
    if (std::find(config.schemes.begin(), config.schemes.end(), Scheme::kCbps) != config.schemes.end()) {
      CbpsConfig cc;
      cc.probability_floor = config.probability_floor;
      cbps = fit_cbps(train.covariates, train.treatment, cc);
    }
  } catch (const Error& e) {
    throw annotate("", e);
  }
  const DatasetBundle& evaluate =
      config.eval_split == EvalSplit::kTest ? test : config.eval_split == EvalSplit::kTrain ? train : full;
  const OutcomeModelConfig oc = outcome_config(config);

  out.balance["unweighted"] = balance_report(train, unit_weights(static_cast<Eigen::Index>(train.size())));
  for (Scheme scheme : config.schemes) {
    try {
      const WeightVector w = scheme_weights(scheme, train, logistic, cbps);
      SchemeRun run;
      run.scheme = scheme;
      run.estimator = config.estimator_for(scheme);
      const EffectEstimate est =
          run.estimator == EffectEstimator::kWeightedRegression
              ? estimate_weighted_regression(train, w, oc, config.resolved_linearity(), evaluate)
              : estimate_weighted_mean_diff(train, w, &evaluate);
      run.ate_hat = est.ate_hat;
      if (evaluate.has_potential_outcomes()) {
        run.ate_true = true_ate(evaluate);
        run.epsilon_ate = est.epsilon_ate;
        run.pehe = est.pehe;
      } else if (config.jobs_true_ate) {
        run.ate_true = *config.jobs_true_ate;
        run.epsilon_ate = epsilon_ate(*config.jobs_true_ate, est.ate_hat);
      }
      run.weight_cv = cv_of_weights(w);
      BalanceReport report = balance_report(train, w);
      for (const auto& cb : report.covariates) {
        run.balance.push_back({cb.feature, cb.smd_unweighted, cb.smd_weighted, cb.ks_weighted});
      }
      out.balance[std::string(to_string(scheme))] = std::move(report);
      out.log.runs.push_back(std::move(run));
    } catch (const Error& e) {
      throw annotate(", scheme " + std::string(to_string(scheme)), e);
    }
  }
  return out;
}

/// Runs replications 1..R on a worker pool. Output order is by replication,
/// independent of the number of threads.
inline std::vector<ReplicationOutput> run_replications(const ExperimentConfig& config) {
  config.validate();
  const DatasetSource source(config);
  std::vector<ReplicationOutput> outputs(static_cast<std::size_t>(config.replications));
  std::vector<std::exception_ptr> errors(outputs.size());
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int r = next++; r < config.replications; r = next++) {
      try {
        outputs[static_cast<std::size_t>(r)] = run_replication(config, source, r + 1);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int threads = std::min(config.threads, config.replications);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outputs;
}

// ---------------------------------------------------------------------------
// Aggregation

struct Summary {
  int count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample sd (divisor count - 1); 0 for one value
  double median = 0.0;
};

inline Summary summarize(std::vector<double> v) {
  Summary s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

struct FeatureSummary {
  std::string feature;
  double abs_smd_unweighted = 0.0;  // mean over replications
  double abs_smd_weighted = 0.0;
  int below_threshold = 0;  // replications with |weighted SMD| < 10
  Interval ks;
};

struct SchemeSummary {
  Scheme scheme = Scheme::kDfw;
  EffectEstimator estimator = EffectEstimator::kWeightedRegression;
  Summary ate_hat;
  std::optional<Summary> epsilon_ate;
  std::optional<Summary> pehe;
  Summary weight_cv;
  std::vector<FeatureSummary> features;
};

struct RunReport {
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<SchemeSummary> schemes;
};

inline constexpr double kSmdThreshold = 10.0;

inline RunReport aggregate(const std::string& config_text, const std::vector<ReplicationLog>& logs) {
  RunReport report;
  report.config_text = config_text;
  report.config_hash = fnv1a64(config_text);
  for (const auto& log : logs) report.seeds.push_back(log.seed);
  if (logs.empty()) return report;

  for (std::size_t s = 0; s < logs.front().runs.size(); ++s) {
    SchemeSummary sum;
    sum.scheme = logs.front().runs[s].scheme;
    sum.estimator = logs.front().runs[s].estimator;
    std::vector<double> ate, eps, pe, cv;
    for (const auto& log : logs) {
      const SchemeRun& run = log.runs.at(s);
      ate.push_back(run.ate_hat);
      if (run.epsilon_ate) eps.push_back(*run.epsilon_ate);
      if (run.pehe) pe.push_back(*run.pehe);
      cv.push_back(run.weight_cv);
    }
    sum.ate_hat = summarize(ate);
    if (eps.size() == logs.size()) sum.epsilon_ate = summarize(eps);
    if (pe.size() == logs.size()) sum.pehe = summarize(pe);
    sum.weight_cv = summarize(cv);

    const auto& first = logs.front().runs[s].balance;
    for (std::size_t f = 0; f < first.size(); ++f) {
      FeatureSummary fs;
      fs.feature = first[f].feature;
      std::vector<double> ks;
      double su = 0.0, sw = 0.0;
      for (const auto& log : logs) {
        const CovariateLog& c = log.runs.at(s).balance.at(f);
        su += std::abs(c.smd_unweighted);
        sw += std::abs(c.smd_weighted);
        if (std::abs(c.smd_weighted) < kSmdThreshold) ++fs.below_threshold;
        ks.push_back(c.ks);
      }
      fs.abs_smd_unweighted = su / static_cast<double>(logs.size());
      fs.abs_smd_weighted = sw / static_cast<double>(logs.size());
      fs.ks = ks.size() >= 2 ? replication_ci(ks) : Interval{ks[0], ks[0], ks[0]};
      sum.features.push_back(std::move(fs));
    }
    report.schemes.push_back(std::move(sum));
  }
  return report;
}

namespace detail {
inline nlohmann::ordered_json summary_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.std}, {"median", s.median}};
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}
}  // namespace detail

inline nlohmann::ordered_json report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["format_version"] = kConfigFormatVersion;
  nlohmann::ordered_json prov;
  prov["config_hash"] = detail::hex64(r.config_hash);
  prov["config"] = r.config_text;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (auto s : r.seeds) seeds.push_back(detail::hex64(s));
  prov["replication_seeds"] = seeds;
  prov["library_version"] = kLibraryVersion;
  prov["random_version"] = kRandomVersion;
  j["provenance"] = prov;
  nlohmann::ordered_json schemes = nlohmann::ordered_json::array();
  for (const auto& s : r.schemes) {
    nlohmann::ordered_json js;
    js["scheme"] = std::string(to_string(s.scheme));
    js["estimator"] = std::string(to_string(s.estimator));
    js["ate_hat"] = detail::summary_json(s.ate_hat);
    js["epsilon_ate"] = s.epsilon_ate ? detail::summary_json(*s.epsilon_ate) : nlohmann::ordered_json();
    js["pehe"] = s.pehe ? detail::summary_json(*s.pehe) : nlohmann::ordered_json();
    js["weight_cv"] = detail::summary_json(s.weight_cv);
    nlohmann::ordered_json feats = nlohmann::ordered_json::array();
    for (const auto& f : s.features) {
      feats.push_back({{"feature", f.feature},
                       {"abs_smd_unweighted", f.abs_smd_unweighted},
                       {"abs_smd_weighted", f.abs_smd_weighted},
                       {"below_smd_threshold", f.below_threshold},
                       {"ks", {{"lower", f.ks.lower}, {"point", f.ks.point}, {"upper", f.ks.upper}}}});
    }
    js["balance"] = feats;
    schemes.push_back(js);
  }
  j["schemes"] = schemes;
  return j;
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string replications_csv(const std::vector<ReplicationLog>& logs) {
  std::ostringstream o;
  o << "replication,seed,scheme,estimator,ate_hat,ate_true,epsilon_ate,pehe,weight_cv\n";
  const auto opt = [](const std::optional<double>& v) { return v ? csv::format(*v) : std::string(); };
  for (const auto& log : logs) {
    for (const auto& r : log.runs) {
      o << log.replication << ',' << log.seed << ',' << to_string(r.scheme) << ',' << to_string(r.estimator)
        << ',' << csv::format(r.ate_hat) << ',' << opt(r.ate_true) << ',' << opt(r.epsilon_ate) << ','
        << opt(r.pehe) << ',' << csv::format(r.weight_cv) << '\n';
    }
  }
  return o.str();
}

inline std::string balance_log_csv(const std::vector<ReplicationLog>& logs) {
  std::ostringstream o;
  o << "replication,scheme,feature,smd_unweighted,smd_weighted,ks\n";
  for (const auto& log : logs) {
    for (const auto& r : log.runs) {
      for (const auto& c : r.balance) {
        o << log.replication << ',' << to_string(r.scheme) << ',' << c.feature << ','
          << csv::format(c.smd_unweighted) << ',' << csv::format(c.smd_weighted) << ',' << csv::format(c.ks)
          << '\n';
      }
    }
  }
  return o.str();
}

inline std::string metrics_csv(const RunReport& r) {
  std::ostringstream o;
  o << "scheme,estimator,replications,ate_hat_mean,epsilon_ate_mean,epsilon_ate_std,epsilon_ate_median,"
       "pehe_mean,pehe_std,weight_cv_mean,weight_cv_std\n";
  for (const auto& s : r.schemes) {
    o << to_string(s.scheme) << ',' << to_string(s.estimator) << ',' << s.ate_hat.count << ','
      << csv::format(s.ate_hat.mean) << ',';
    if (s.epsilon_ate) {
      o << csv::format(s.epsilon_ate->mean) << ',' << csv::format(s.epsilon_ate->std) << ','
        << csv::format(s.epsilon_ate->median) << ',';
    } else {
      o << ",,,";
    }
    if (s.pehe) o << csv::format(s.pehe->mean) << ',' << csv::format(s.pehe->std) << ',';
    else o << ",,";
    o << csv::format(s.weight_cv.mean) << ',' << csv::format(s.weight_cv.std) << '\n';
  }
  return o.str();
}

/// Mean absolute SMD per (feature, scheme), with an `unweighted` row per feature.
inline std::string smd_csv(const RunReport& r) {
  std::ostringstream o;
  o << "feature,scheme,smd\n";
  if (r.schemes.empty()) return o.str();
  for (std::size_t f = 0; f < r.schemes.front().features.size(); ++f) {
    const auto& name = r.schemes.front().features[f].feature;
    o << name << ",unweighted," << csv::format(r.schemes.front().features[f].abs_smd_unweighted) << '\n';
    for (const auto& s : r.schemes) {
      o << name << ',' << to_string(s.scheme) << ',' << csv::format(s.features[f].abs_smd_weighted) << '\n';
    }
  }
  return o.str();
}

/// ECDF traces of the first replication: feature, group, scheme, value, cumulative.
inline std::string ecdf_csv(const ReplicationOutput& first, const std::vector<Scheme>& order) {
  std::ostringstream o;
  o << "feature,group,scheme,value,cumulative\n";
  std::vector<std::string> names{"unweighted"};
  for (Scheme s : order) names.emplace_back(to_string(s));
  const auto& base = first.balance.at("unweighted");
  for (std::size_t f = 0; f < base.covariates.size(); ++f) {
    for (const auto& name : names) {
      const auto& cb = first.balance.at(name).covariates[f];
      for (const auto& [group, trace] : {std::pair{"treated", &cb.ecdf_treated}, std::pair{"control", &cb.ecdf_control}}) {
        for (const auto& p : *trace) {
          o << cb.feature << ',' << group << ',' << name << ',' << csv::format(p.value) << ','
            << csv::format(p.cumulative) << '\n';
        }
      }
    }
  }
  return o.str();
}

/// Reads replications.csv and balance_log.csv back into logs.
inline std::vector<ReplicationLog> read_logs(const std::filesystem::path& dir) {
  const auto read_lines = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + p.string() + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (!csv::trim(line).empty()) rows.push_back(csv::split(line));
    }
    return rows;
  };
  const auto num = [](const std::string& s) {
    double v = 0.0;
    if (!csv::parse_double(s, v)) throw Error(ErrorCode::kSchema, "bad number '" + s + "' in log");
    return v;
  };
  const auto opt = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return num(s);
  };

  std::vector<ReplicationLog> logs;
  std::map<std::pair<int, std::string>, SchemeRun*> index;
  for (const auto& f : read_lines(dir / "replications.csv")) {
    if (f.size() != 9) throw Error(ErrorCode::kSchema, "replications.csv: expected 9 fields");
    const int rep = static_cast<int>(std::stol(f[0]));
    if (logs.empty() || logs.back().replication != rep) {
      logs.push_back({rep, std::stoull(f[1]), {}});
    }
    SchemeRun run;
    run.scheme = parse_scheme(f[2]);
    run.estimator = detail::parse_estimator(f[3]);
    run.ate_hat = num(f[4]);
    run.ate_true = opt(f[5]);
    run.epsilon_ate = opt(f[6]);
    run.pehe = opt(f[7]);
    run.weight_cv = num(f[8]);
    logs.back().runs.push_back(run);
  }
  for (auto& log : logs) {
    for (auto& run : log.runs) index[{log.replication, std::string(to_string(run.scheme))}] = &run;
  }
  for (const auto& f : read_lines(dir / "balance_log.csv")) {
    if (f.size() != 6) throw Error(ErrorCode::kSchema, "balance_log.csv: expected 6 fields");
    const auto it = index.find({static_cast<int>(std::stol(f[0])), f[1]});
    if (it == index.end()) throw Error(ErrorCode::kSchema, "balance_log.csv: unknown replication/scheme");
    it->second->balance.push_back({f[2], num(f[3]), num(f[4]), num(f[5])});
  }
  return logs;
}

struct ExperimentResult {
  RunReport report;
  std::vector<ReplicationLog> logs;
};

/// Runs the experiment and writes report.json, metrics.csv, smd.csv,
/// ecdf.csv, replications.csv and balance_log.csv into the output directory.
inline ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files = true) {
  auto outputs = run_replications(config);
  ExperimentResult result;
  for (const auto& o : outputs) result.logs.push_back(o.log);
  result.report = aggregate(config.canonical(), result.logs);
  if (write_files) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    csv::write_text((dir / "report.json").string(), report_to_json(result.report).dump(2) + "\n");
    csv::write_text((dir / "metrics.csv").string(), metrics_csv(result.report));
    csv::write_text((dir / "smd.csv").string(), smd_csv(result.report));
    csv::write_text((dir / "ecdf.csv").string(), ecdf_csv(outputs.front(), config.schemes));
    csv::write_text((dir / "replications.csv").string(), replications_csv(result.logs));
    csv::write_text((dir / "balance_log.csv").string(), balance_log_csv(result.logs));
  }
  return result;
}

struct AuditResult {
  bool ok = true;
  double max_abs_diff = 0.0;
  std::vector<std::string> mismatches;
};

/// Recomputes report.json from the persisted replication logs and compares
/// every number (relative-or-absolute tolerance).
inline AuditResult audit_report(const std::filesystem::path& dir, double tol = 1e-12) {
  std::ifstream in(dir / "report.json");
  if (!in) throw Error(ErrorCode::kIo, "cannot open report.json in '" + dir.string() + "'");
  const auto stored = nlohmann::json::parse(in);
  const auto logs = read_logs(dir);
  const auto recomputed = nlohmann::json(report_to_json(aggregate(stored["provenance"]["config"].get<std::string>(), logs)));

  AuditResult res;
  std::function<void(const nlohmann::json&, const nlohmann::json&, const std::string&)> walk =
      [&](const nlohmann::json& a, const nlohmann::json& b, const std::string& path) {
        if (a.is_number() && b.is_number()) {
          const double x = a.get<double>();
          const double y = b.get<double>();
          const double d = std::abs(x - y);
          res.max_abs_diff = std::max(res.max_abs_diff, d);
          if (d > tol * std::max(1.0, std::abs(x))) {
            res.ok = false;
            res.mismatches.push_back(path);
          }
          return;
        }
        if (a.type() != b.type() || (a.is_structured() && a.size() != b.size())) {
          res.ok = false;
          res.mismatches.push_back(path);
          return;
        }
        if (a.is_object()) {
          for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) {
              res.ok = false;
              res.mismatches.push_back(path + "/" + it.key());
            } else {
              walk(it.value(), b[it.key()], path + "/" + it.key());
            }
          }
        } else if (a.is_array()) {
          for (std::size_t i = 0; i < a.size(); ++i) walk(a[i], b[i], path + "/" + std::to_string(i));
        } else if (a != b) {
          res.ok = false;
          res.mismatches.push_back(path);
        }
      };
  walk(stored, recomputed, "");
  return res;
}

// ---------------------------------------------------------------------------
// Diagnostics only

/// Balance of a bundle under each scheme (logistic propensities; CBPS for the
/// CBPS scheme), fitted on all rows.
inline std::map<std::string, BalanceReport> balance_only(const DatasetBundle& bundle,
                                                         const std::vector<Scheme>& schemes,
                                                         double probability_floor = 1e-6) {
  const DatasetBundle b = validate_bundle(bundle);
  LogisticConfig lc;
  lc.probability_floor = probability_floor;
  const PropensityFit logistic = fit_logistic(b.covariates, b.treatment, lc);
  std::optional<PropensityFit> cbps;
  if (std::find(schemes.begin(), schemes.end(), Scheme::kCbps) != schemes.end()) {
    CbpsConfig cc;
    cc.probability_floor = probability_floor;
    cbps = fit_cbps(b.covariates, b.treatment, cc);
  }
  std::map<std::string, BalanceReport> out;
  out["unweighted"] = balance_report(b, unit_weights(static_cast<Eigen::Index>(b.size())));
  for (Scheme s : schemes) out[std::string(to_string(s))] = balance_report(b, scheme_weights(s, b, logistic, cbps));
  return out;
}

}  // namespace dfw
