#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dfw/harness.hpp"
#include "support.hpp"

using namespace dfw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dfw_harness_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small(const std::string& out, int reps = 4) {
  ExperimentConfig c;
  c.bias = "high";
  c.n = 400;
  c.replications = reps;
  c.output_dir = out;
  return c;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const auto c = parse_config(
      "# frozen\n"
      "dataset = nonlinear\n"
      "bias = moderate   # trailing\n"
      "schemes = DFW, ipw\n"
      "estimator.DFW = WEIGHTED_MEAN_DIFF\n"
      "replications = 7\n"
      "base_seed = 12\n"
      "kernel_bandwidth = median\n"
      "eval_split = full\n");
  EXPECT_EQ(c.dataset, DatasetKind::kNonlinear);
  EXPECT_EQ(c.bias, "moderate");
  EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::kDfw, Scheme::kIpw}));
  EXPECT_EQ(c.estimator_for(Scheme::kDfw), EffectEstimator::kWeightedMeanDiff);
  EXPECT_EQ(c.estimator_for(Scheme::kIpw), EffectEstimator::kWeightedRegression);
  EXPECT_EQ(c.replications, 7);
  EXPECT_EQ(c.base_seed, 12u);
  EXPECT_EQ(c.resolved_linearity(), Linearity::kNonlinear);
  EXPECT_EQ(c.eval_split, EvalSplit::kFull);
}

TEST(Config, DefaultBindings) {
  const ExperimentConfig c;
  EXPECT_EQ(c.estimator_for(Scheme::kOverlap), EffectEstimator::kWeightedMeanDiff);
  EXPECT_EQ(c.estimator_for(Scheme::kCbps), EffectEstimator::kWeightedRegression);
  EXPECT_EQ(c.replications, 30);
  EXPECT_DOUBLE_EQ(c.split_ratio, 0.8);
}

TEST(Config, Rejections) {
  EXPECT_DFW_ERROR(parse_config("colour = red\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("split_ratio = 1.0\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("replications = 0\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("replications = many\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("dataset = ihdp\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("bias = huge\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("schemes = DFW,XYZ\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("format_version = 9\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(parse_config("just text\n"), ErrorCode::kConfig);
  EXPECT_DFW_ERROR(load_config("/nonexistent/x.cfg"), ErrorCode::kIo);
}

TEST(Config, CanonicalIgnoresOutputAndThreads) {
  auto a = small("/tmp/a");
  auto b = small("/tmp/b");
  b.threads = 3;
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(parse_config(a.canonical()).canonical(), a.canonical());
  b.base_seed = 1;
  EXPECT_NE(fnv1a64(a.canonical()), fnv1a64(b.canonical()));
}

TEST(Split, DeterministicDisjointCover) {
  const auto [tr, te] = train_test_split(101, 0.8, 5);
  EXPECT_EQ(tr.size(), 81u);
  EXPECT_EQ(te.size(), 20u);
  std::set<Eigen::Index> all(tr.begin(), tr.end());
  all.insert(te.begin(), te.end());
  EXPECT_EQ(all.size(), 101u);
  EXPECT_EQ(train_test_split(101, 0.8, 5).first, tr);
  EXPECT_NE(train_test_split(101, 0.8, 6).first, tr);
}

TEST(Harness, ReplicationSeedsAreHashed) {
  EXPECT_EQ(replication_seed(7, 1), derive_seed(7, 1));
  EXPECT_NE(replication_seed(7, 1), replication_seed(7, 2));
}

TEST(Harness, LowPresetReportShape) {
  ExperimentConfig c;
  c.bias = "low";
  const auto r = run_experiment(c, false);
  ASSERT_EQ(r.report.schemes.size(), 4u);
  for (const auto& s : r.report.schemes) {
    ASSERT_TRUE(s.epsilon_ate.has_value());
    EXPECT_EQ(s.epsilon_ate->count, 30);
    EXPECT_GE(s.epsilon_ate->std, 0.0);
  }
  EXPECT_TRUE(std::isfinite(r.report.schemes[0].epsilon_ate->mean));
  EXPECT_GT(r.report.schemes[0].epsilon_ate->mean, 0.0);
  EXPECT_EQ(r.report.seeds.size(), 30u);
}

TEST(Harness, SingleReplicationUnit) {
  auto c = small("", 1);
  c.schemes = {Scheme::kUnit};
  const auto r = run_experiment(c, false);
  ASSERT_EQ(r.logs.size(), 1u);
  const auto& s = r.report.schemes.at(0);
  EXPECT_EQ(s.epsilon_ate->mean, *r.logs[0].runs[0].epsilon_ate);
  EXPECT_EQ(s.epsilon_ate->std, 0.0);
  EXPECT_EQ(s.features[0].ks.lower, s.features[0].ks.upper);
}

TEST(Harness, ByteIdenticalAcrossRunsAndThreads) {
  const auto d1 = temp_dir("det1"), d2 = temp_dir("det2");
  auto a = small(d1.string());
  auto b = small(d2.string());
  b.threads = 3;
  run_experiment(a);
  run_experiment(b);
  for (const char* f : {"report.json", "metrics.csv", "smd.csv", "ecdf.csv", "replications.csv", "balance_log.csv"}) {
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  EXPECT_EQ(slurp(d1 / "report.json").find("time"), std::string::npos);
}

TEST(Harness, AuditRecomputesReport) {
  const auto d = temp_dir("audit");
  run_experiment(small(d.string()));
  const auto ok = audit_report(d);
  EXPECT_TRUE(ok.ok);
  EXPECT_LE(ok.max_abs_diff, 1e-12);

  // Tamper with one logged value.
  auto text = slurp(d / "replications.csv");
  const auto pos = text.find("DFW,WEIGHTED_REGRESSION,");
  ASSERT_NE(pos, std::string::npos);
  text.insert(pos + 24, "1");
  csv::write_text((d / "replications.csv").string(), text);
  EXPECT_FALSE(audit_report(d).ok);
}

TEST(Harness, PersistedCsvInvariants) {
  const auto d = temp_dir("csv");
  run_experiment(small(d.string(), 2));
  std::ifstream smd(d / "smd.csv");
  std::string line;
  std::getline(smd, line);
  std::map<std::string, int> unweighted;
  while (std::getline(smd, line)) {
    const auto f = csv::split(line);
    if (f[1] == "unweighted") ++unweighted[f[0]];
  }
  EXPECT_EQ(unweighted.size(), 6u);

  std::ifstream ecdf(d / "ecdf.csv");
  std::getline(ecdf, line);
  std::map<std::string, double> last;
  while (std::getline(ecdf, line)) {
    const auto f = csv::split(line);
    const auto key = f[0] + "/" + f[1] + "/" + f[2];
    double v = 0;
    ASSERT_TRUE(csv::parse_double(f[4], v));
    if (last.count(key)) ASSERT_GE(v, last[key]) << key;
    last[key] = v;
  }
  EXPECT_EQ(last.size(), 6u * 5u * 2u);
  for (const auto& [k, v] : last) EXPECT_EQ(v, 1.0) << k;
}

TEST(Harness, ErrorsCarryReplicationIndex) {
  ExperimentConfig c;
  c.dataset = DatasetKind::kIhdp;
  c.data_path = "/nonexistent_dir";
  c.replications = 2;
  try {
    run_replications(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingRealization);
    EXPECT_NE(std::string(e.what()).find("replication 1"), std::string::npos);
  }
}

TEST(Harness, NonlinearPresetsScale) {
  EXPECT_DOUBLE_EQ(nonlinear_preset("moderate").alpha, 3.0);
  EXPECT_DOUBLE_EQ(nonlinear_preset("high").beta, 2.0);
  EXPECT_DOUBLE_EQ(nonlinear_preset("low").gamma, 0.25);
  EXPECT_DFW_ERROR(nonlinear_preset("x"), ErrorCode::kConfig);
}

TEST(Harness, BalanceOnly) {
  const auto b = generate_linear(bias_preset("high"));
  const auto reports = balance_only(b, {Scheme::kDfw, Scheme::kIpw});
  EXPECT_EQ(reports.size(), 3u);
  for (const auto& c : reports.at("DFW").covariates) EXPECT_LT(std::abs(c.smd_weighted), 1e-3);
}
