// Command-line front end: correlate, train, sweep-alpha, report.
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adanav/harness.hpp"

namespace {

using adanav::json;

void print_config_table(const json& summary) {
  const json& configs = summary.at("configs");
  std::cout << "\nconfig                    median final return   median samples to "
            << adanav::format_number(summary.at("threshold").get<double>())
            << "\n";
  for (const auto& [label, agg] : configs.items()) {
    const json& stt = agg.at("samples_to_threshold").at("median");
    const std::string samples =
        stt.is_string() ? stt.get<std::string>()
                        : adanav::format_number(stt.get<double>());
    std::printf("%-25s %-21s %s\n", label.c_str(),
                adanav::format_number(
                    agg.at("final_smoothed_return").at("median").get<double>())
                    .c_str(),
                samples.c_str());
  }
  std::cout << std::flush;
}

int finish_suite(const adanav::ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir,
                 const adanav::SuiteOutcome& outcome) {
  json summary;
  try {
    summary = adanav::compute_summary(out_dir, cfg.threshold, cfg.window);
  } catch (const adanav::ConfigError& e) {
    if (outcome.failed.empty()) throw;
    std::cerr << "summary unavailable: " << e.what() << "\n";
  }
  if (!summary.is_null()) {
    if (!outcome.failed.empty()) {
      json failed = json::array();
      for (const adanav::FailedRun& f : outcome.failed)
        failed.push_back({{"label", f.label},
                          {"seed", f.seed},
                          {"error", f.message}});
      summary["failed"] = std::move(failed);
    }
    adanav::write_summary(out_dir, summary);
    std::cout << "wrote " << (out_dir / "summary.json").string() << "\n";
    print_config_table(summary);
  }
  if (!outcome.failed.empty()) {
    for (const adanav::FailedRun& f : outcome.failed)
      std::cerr << "FAILED " << f.label << " seed " << f.seed << ": "
                << f.message << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular RL laboratory for adaptive trajectory-length schedules"};
  app.require_subcommand(1);

  std::vector<std::string> grids{"empty25", "four_walls25"};
  int policies = 100;
  std::string correlate_out = "results";
  bool correlate_force = false;
  CLI::App* correlate = app.add_subcommand(
      "correlate", "Sweep policy entropy against spectral gap and mixing time");
  correlate->add_option("--grids", grids, "Comma-separated builtin grid names")
      ->delimiter(',');
  correlate->add_option("--policies", policies, "Number of beta values in [0,1]")
      ->check(CLI::Range(2, 1000000));
  correlate->add_option("--out", correlate_out, "Output directory");
  correlate->add_flag("--force", correlate_force, "Recompute an existing CSV");

  std::string train_config;
  std::vector<std::uint64_t> train_seeds;
  std::string train_out = "results";
  bool train_force = false;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "Run every configured schedule across the seed list");
  train_cmd->add_option("--config", train_config, "Experiment JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--seeds", train_seeds, "Override the config seed list")
      ->delimiter(',');
  train_cmd->add_option("--out", train_out, "Output directory");
  train_cmd->add_flag("--force", train_force, "Recompute existing run CSVs");

  std::string sweep_config;
  std::vector<double> sweep_alphas;
  std::string sweep_out = "results";
  bool sweep_force = false;
  CLI::App* sweep = app.add_subcommand(
      "sweep-alpha", "Train the exponential schedule at each alpha");
  sweep->add_option("--config", sweep_config, "Experiment JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--alphas", sweep_alphas, "Comma-separated alpha values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_flag("--force", sweep_force, "Recompute existing run CSVs");

  std::string report_in;
  double report_threshold = 0.9;
  int report_window = 100;
  CLI::App* report = app.add_subcommand(
      "report", "Rebuild summary.json from the CSVs in a directory");
  report->add_option("--in", report_in, "Directory holding run CSVs")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--threshold", report_threshold,
                     "Smoothed-return success threshold");
  report->add_option("--window", report_window, "Moving-average window")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const int workers = adanav::resolve_workers();
    if (correlate->parsed()) {
      adanav::run_correlation(grids, policies, correlate_out, correlate_force,
                              workers, std::cout);
      return 0;
    }
    if (train_cmd->parsed()) {
      adanav::ExperimentConfig cfg = adanav::load_experiment(train_config);
      if (!train_seeds.empty()) {
        std::set<std::uint64_t> unique(train_seeds.begin(), train_seeds.end());
        if (unique.size() != train_seeds.size())
          throw adanav::ConfigError("--seeds: duplicates not allowed");
        cfg.seeds = train_seeds;
      }
      const adanav::SuiteOutcome outcome = adanav::run_training_suite(
          cfg, train_out, train_force, workers, std::cout);
      return finish_suite(cfg, train_out, outcome);
    }
    if (sweep->parsed()) {
      const adanav::ExperimentConfig cfg = adanav::alpha_sweep_config(
          adanav::load_experiment(sweep_config), sweep_alphas);
      const adanav::SuiteOutcome outcome = adanav::run_training_suite(
          cfg, sweep_out, sweep_force, workers, std::cout);
      return finish_suite(cfg, sweep_out, outcome);
    }
    if (report->parsed()) {
      const json summary =
          adanav::compute_summary(report_in, report_threshold, report_window);
      adanav::write_summary(report_in, summary);
      std::cout << summary.dump(2) << "\n";
      print_config_table(summary);
      return 0;
    }
  } catch (const adanav::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const adanav::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
