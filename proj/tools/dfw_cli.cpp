// dfw command line: data generation, experiments, CV study, balance
// diagnostics, plots and report audit.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dfw/balance.hpp"
#include "dfw/config.hpp"
#include "dfw/cv_study.hpp"
#include "dfw/harness.hpp"
#include "dfw/ingestion.hpp"
#include "dfw/plots.hpp"
#include "dfw/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<dfw::Scheme> parse_schemes(const std::string& list) {
  std::vector<dfw::Scheme> out;
  for (const auto& s : dfw::csv::split(list, ',')) {
    if (!s.empty()) out.push_back(dfw::parse_scheme(s));
  }
  if (out.empty()) throw dfw::Error(dfw::ErrorCode::kConfig, "no schemes given");
  return out;
}

int generate(const std::string& kind, const std::string& bias, int n, double effect_c, std::uint64_t seed,
             const std::string& out) {
  dfw::DatasetBundle b;
  nlohmann::ordered_json side;
  side["generator"] = kind;
  side["seed"] = seed;
  side["random_version"] = dfw::kRandomVersion;
  if (kind == "linear") {
    auto c = dfw::bias_preset(bias);
    c.n = n;
    c.effect_c = effect_c;
    c.seed = seed;
    b = dfw::generate_linear(c);
    side["bias"] = bias;
    side["n"] = c.n;
    side["bias_weights"] = c.bias_weights;
    side["treatment_noise_sd"] = c.treatment_noise_sd;
    side["outcome_noise_sd"] = c.outcome_noise_sd;
    side["effect_c"] = c.effect_c;
  } else if (kind == "nonlinear") {
    auto c = dfw::nonlinear_preset(bias);
    c.n = n;
    c.seed = seed;
    b = dfw::generate_nonlinear(c);
    side["bias"] = bias;
    side["n"] = c.n;
    side["alpha"] = c.alpha;
    side["beta"] = c.beta;
    side["gamma"] = c.gamma;
    side["propensity_noise_sd"] = c.propensity_noise_sd;
    side["outcome_noise_sd"] = c.outcome_noise_sd;
  } else if (kind == "roles") {
    dfw::RoleGenConfig c;
    c.n = n;
    c.effect_c = effect_c;
    c.seed = seed;
    b = dfw::generate_roles(c);
    side["n"] = c.n;
    side["effect_c"] = c.effect_c;
    nlohmann::ordered_json roles = nlohmann::ordered_json::array();
    for (auto r : *b.feature_roles) roles.push_back(std::string(dfw::to_string(r)));
    side["feature_roles"] = roles;
  } else {
    throw dfw::Error(dfw::ErrorCode::kConfig, "unknown generator '" + kind + "'");
  }
  dfw::csv::write_text(out, dfw::bundle_to_csv(b));
  dfw::csv::write_text(out + ".json", side.dump(2) + "\n");
  std::cout << "wrote " << out << " (" << b.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deconfounding-factor weighting toolkit"};
  app.require_subcommand(1);

  std::string gen_kind = "linear", gen_bias = "high", gen_out = "bundle.csv";
  int gen_n = 1500;
  double gen_c = 5.0;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("generate", "write a synthetic bundle as CSV plus a JSON sidecar");
  gen->add_option("--kind", gen_kind, "linear | nonlinear | roles");
  gen->add_option("--bias", gen_bias, "low | moderate | high");
  gen->add_option("-n", gen_n);
  gen->add_option("--effect", gen_c, "constant effect (linear, roles)");
  gen->add_option("--seed", gen_seed);
  gen->add_option("-o,--out", gen_out);

  std::string exp_config, exp_out;
  int exp_threads = 0;
  auto* exp = app.add_subcommand("experiment", "run replications from a config file");
  exp->add_option("config", exp_config)->required()->check(CLI::ExistingFile);
  exp->add_option("-o,--out", exp_out, "override output_dir");
  exp->add_option("-j,--threads", exp_threads);

  std::string cv_mode = "tuples", cv_out;
  int cv_k = 6;
  auto* cv = app.add_subcommand("cvstudy", "enumerate propensity assignments and compare weight CV");
  cv->add_option("--mode", cv_mode, "tuples | multisets | both");
  cv->add_option("-k", cv_k);
  cv->add_option("-o,--out", cv_out, "directory for cv_differences.csv");

  std::string bal_in, bal_schemes = "DFW,IPW,CBPS,OVERLAP";
  auto* bal = app.add_subcommand("balance", "balance table of a bundle CSV");
  bal->add_option("bundle", bal_in)->required()->check(CLI::ExistingFile);
  bal->add_option("--schemes", bal_schemes);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plots", "render SVG plots from CSVs in a directory");
  plot->add_option("dir", plot_dir)->required()->check(CLI::ExistingDirectory);

  std::string audit_dir;
  double audit_tol = 1e-12;
  auto* audit = app.add_subcommand("audit", "recompute report.json from the replication logs");
  audit->add_option("dir", audit_dir)->required()->check(CLI::ExistingDirectory);
  audit->add_option("--tol", audit_tol);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return generate(gen_kind, gen_bias, gen_n, gen_c, gen_seed, gen_out);

    if (*exp) {
      auto config = dfw::load_config(exp_config);
      if (!exp_out.empty()) config.output_dir = exp_out;
      if (exp_threads > 0) config.threads = exp_threads;
      const auto result = dfw::run_experiment(config);
      std::cout << dfw::metrics_csv(result.report);
      std::cout << "config hash " << dfw::detail::hex64(result.report.config_hash) << ", output in "
                << config.output_dir << "\n";
      return 0;
    }

    if (*cv) {
      std::vector<dfw::EnumerationMode> modes;
      if (cv_mode == "both") modes = {dfw::EnumerationMode::kTuples, dfw::EnumerationMode::kMultisets};
      else modes = {dfw::parse_enumeration_mode(cv_mode)};
      std::string csv_text;
      for (auto m : modes) {
        dfw::CvStudyConfig c;
        c.tuple_size = cv_k;
        c.mode = m;
        const auto r = dfw::run_cv_study(c);
        std::cout << dfw::to_string(m) << ": " << r.dfw_wins << " / " << r.total << " DFW wins ("
                  << r.fraction() * 100.0 << "%), ties " << r.ties << "\n";
        const auto text = dfw::cv_differences_csv(r);
        csv_text += csv_text.empty() ? text : text.substr(text.find('\n') + 1);
      }
      if (!cv_out.empty()) {
        fs::create_directories(cv_out);
        dfw::csv::write_text((fs::path(cv_out) / "cv_differences.csv").string(), csv_text);
      }
      return 0;
    }

    if (*bal) {
      const auto bundle = dfw::read_bundle_csv(bal_in);
      const auto reports = dfw::balance_only(bundle, parse_schemes(bal_schemes));
      std::cout << "scheme,feature,smd_unweighted,smd_weighted,ks\n";
      for (const auto& [name, report] : reports) {
        for (const auto& c : report.covariates) {
          std::cout << name << ',' << c.feature << ',' << dfw::csv::format(c.smd_unweighted) << ','
                    << dfw::csv::format(c.smd_weighted) << ',' << dfw::csv::format(c.ks_weighted) << '\n';
        }
      }
      return 0;
    }

    if (*plot) {
      for (const auto& p : dfw::plots::render_directory(plot_dir)) std::cout << "wrote " << p.string() << "\n";
      return 0;
    }

    if (*audit) {
      const auto r = dfw::audit_report(audit_dir, audit_tol);
      std::cout << (r.ok ? "audit ok" : "audit FAILED") << ", max abs diff " << r.max_abs_diff << "\n";
      for (const auto& m : r.mismatches) std::cout << "  mismatch at " << m << "\n";
      return r.ok ? 0 : 1;
    }
  } catch (const dfw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
