#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adanav/csv.hpp"
#include "adanav/errors.hpp"
#include "adanav/grid.hpp"
#include "adanav/learn.hpp"
#include "adanav/spectral.hpp"
#include "adanav/stats.hpp"

namespace adanav {

using nlohmann::json;

// One scheduled run inside an experiment: a label plus the schedule it
// evaluates, optionally overriding the experiment-wide algorithm.
struct RunSpec {
  std::string label;
  ScheduleSpec schedule;
  std::optional<Algorithm> algorithm;
  std::optional<double> entropy_coeff;
};

struct ExperimentConfig {
  explicit ExperimentConfig(GridSpec g) : grid(std::move(g)) {}

  GridSpec grid;
  Algorithm algorithm = Algorithm::ActorCritic;
  double gamma = 0.99;
  double lr_actor = 0.01;
  double lr_critic = 0.01;
  double entropy_coeff = 0.0;
  double ppo_clip = 0.2;
  int ppo_epochs = 4;
  int episodes = 1;
  int max_steps_per_episode = 1;
  std::vector<std::uint64_t> seeds{0};
  double threshold = 0.9;
  int window = 100;
  std::vector<RunSpec> runs;                  // for `train`
  std::optional<ScheduleSpec> base_schedule;  // for `sweep-alpha`
};

namespace detail {

inline void require_keys(const json& j, const char* where,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key))
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

inline GridSpec parse_grid(const json& j) {
  if (j.is_string()) return builtin_grid(j.get<std::string>());
  if (!j.is_object())
    throw ConfigError("grid: expected a builtin name or an inline object");
  require_keys(j, "grid", {"name", "width", "height", "blocked", "start", "goal"});
  const auto cell = [](const json& c, const char* what) {
    if (!c.is_array() || c.size() != 2)
      throw ConfigError(std::string(what) + ": expected [row, col]");
    return Cell{c.at(0).get<int>(), c.at(1).get<int>()};
  };
  std::vector<Cell> blocked;
  for (const json& b : get_or(j, "blocked", json::array()))
    blocked.push_back(cell(b, "grid.blocked entry"));
  return GridSpec(get_or(j, "width", 0), get_or(j, "height", 0), blocked,
                  cell(j.at("start"), "grid.start"), cell(j.at("goal"), "grid.goal"),
                  get_or<std::string>(j, "name", "inline"));
}

inline ScheduleSpec parse_schedule(const json& j) {
  if (!j.is_object()) throw ConfigError("schedule: expected an object");
  require_keys(j, "schedule",
               {"variant", "t", "t_min", "t_max", "t_i", "eta", "alpha", "t_cap"});
  const std::string variant = get_or<std::string>(j, "variant", "");
  ScheduleSpec s;
  if (variant == "fixed") {
    s.kind = ScheduleKind::Fixed;
  } else if (variant == "random_uniform") {
    s.kind = ScheduleKind::RandomUniform;
  } else if (variant == "ada_linear") {
    s.kind = ScheduleKind::AdaLinear;
  } else if (variant == "ada_exponential") {
    s.kind = ScheduleKind::AdaExponential;
  } else {
    throw ConfigError("schedule.variant: expected one of fixed, random_uniform, "
                      "ada_linear, ada_exponential");
  }
  s.t = get_or(j, "t", s.t);
  s.t_min = get_or(j, "t_min", s.t_min);
  s.t_max = get_or(j, "t_max", s.t_max);
  s.t_i = get_or(j, "t_i", s.t_i);
  s.eta = get_or(j, "eta", s.eta);
  s.alpha = get_or(j, "alpha", s.alpha);
  if (j.contains("t_cap")) {
    s.t_cap = get_or(j, "t_cap", s.t_cap);
  } else if (s.kind == ScheduleKind::Fixed) {
    s.t_cap = s.t;
  } else if (s.kind == ScheduleKind::RandomUniform) {
    s.t_cap = s.t_max;
  } else {
    throw ConfigError("schedule: adaptive variants require t_cap");
  }
  s.validate();
  return s;
}

inline std::vector<std::uint64_t> parse_seeds(const json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("seeds: expected a non-empty array of integers");
  std::vector<std::uint64_t> seeds;
  for (const json& s : j) seeds.push_back(s.get<std::uint64_t>());
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size())
    throw ConfigError("seeds: duplicates not allowed");
  return seeds;
}

inline bool label_is_safe(const std::string& label) {
  if (label.empty()) return false;
  for (const char c : label)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
          c == '.'))
      return false;
  return true;
}

}  // namespace detail

inline ExperimentConfig parse_experiment(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  detail::require_keys(
      j, "config",
      {"grid", "algorithm", "gamma", "lr_actor", "lr_critic", "entropy_coeff",
       "ppo_clip", "ppo_epochs", "episodes", "max_steps_per_episode", "seeds",
       "threshold", "window", "runs", "schedule"});
  if (!j.contains("grid")) throw ConfigError("config: missing 'grid'");
  ExperimentConfig cfg(detail::parse_grid(j.at("grid")));
  cfg.algorithm = algorithm_from_string(
      detail::get_or<std::string>(j, "algorithm", "actor_critic"));
  cfg.gamma = detail::get_or(j, "gamma", cfg.gamma);
  cfg.lr_actor = detail::get_or(j, "lr_actor", cfg.lr_actor);
  cfg.lr_critic = detail::get_or(j, "lr_critic", cfg.lr_critic);
  cfg.entropy_coeff = detail::get_or(j, "entropy_coeff", cfg.entropy_coeff);
  cfg.ppo_clip = detail::get_or(j, "ppo_clip", cfg.ppo_clip);
  cfg.ppo_epochs = detail::get_or(j, "ppo_epochs", cfg.ppo_epochs);
  cfg.episodes = detail::get_or(j, "episodes", cfg.episodes);
  cfg.max_steps_per_episode =
      detail::get_or(j, "max_steps_per_episode", cfg.max_steps_per_episode);
  if (j.contains("seeds")) cfg.seeds = detail::parse_seeds(j.at("seeds"));
  cfg.threshold = detail::get_or(j, "threshold", cfg.threshold);
  cfg.window = detail::get_or(j, "window", cfg.window);
  if (cfg.window < 1) throw ConfigError("config: window must be >= 1");
  if (j.contains("schedule"))
    cfg.base_schedule = detail::parse_schedule(j.at("schedule"));
  if (j.contains("runs")) {
    if (!j.at("runs").is_array() || j.at("runs").empty())
      throw ConfigError("runs: expected a non-empty array");
    std::set<std::string> labels;
    for (const json& r : j.at("runs")) {
      detail::require_keys(r, "run",
                           {"label", "schedule", "algorithm", "entropy_coeff"});
      RunSpec run;
      run.label = detail::get_or<std::string>(r, "label", "");
      if (!detail::label_is_safe(run.label))
        throw ConfigError("run label '" + run.label +
                          "' must be non-empty and use only [A-Za-z0-9_.-]");
      if (!labels.insert(run.label).second)
        throw ConfigError("duplicate run label '" + run.label + "'");
      if (!r.contains("schedule"))
        throw ConfigError("run '" + run.label + "': missing 'schedule'");
      run.schedule = detail::parse_schedule(r.at("schedule"));
      if (r.contains("algorithm"))
        run.algorithm = algorithm_from_string(r.at("algorithm").get<std::string>());
      if (r.contains("entropy_coeff"))
        run.entropy_coeff = r.at("entropy_coeff").get<double>();
      cfg.runs.push_back(std::move(run));
    }
  }
  return cfg;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_experiment(j);
}

inline TrainConfig make_train_config(const ExperimentConfig& cfg,
                                     const RunSpec& run, std::uint64_t seed) {
  TrainConfig tc(cfg.grid);
  tc.algorithm = run.algorithm.value_or(cfg.algorithm);
  tc.schedule = run.schedule;
  tc.gamma = cfg.gamma;
  tc.lr_actor = cfg.lr_actor;
  tc.lr_critic = cfg.lr_critic;
  tc.entropy_coeff = run.entropy_coeff.value_or(cfg.entropy_coeff);
  tc.ppo_clip = cfg.ppo_clip;
  tc.ppo_epochs = cfg.ppo_epochs;
  tc.episodes = cfg.episodes;
  tc.max_steps_per_episode = cfg.max_steps_per_episode;
  tc.seed = seed;
  tc.validate();
  return tc;
}

// Worker count: ADANAV_WORKERS caps the pool, otherwise all hardware threads.
inline int resolve_workers() {
  const char* env = std::getenv("ADANAV_WORKERS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1)
    throw ConfigError("ADANAV_WORKERS must be a positive integer");
  return static_cast<int>(v);
}

inline std::string run_file_name(const std::string& label, std::uint64_t seed) {
  return label + "_seed" + std::to_string(seed) + ".csv";
}

struct FailedRun {
  std::string label;
  std::uint64_t seed = 0;
  std::string message;
};

struct SuiteOutcome {
  int executed = 0;
  int skipped = 0;
  std::vector<FailedRun> failed;
};

// Runs every (run, seed) pair whose CSV is absent; existing files are kept
// as-is unless force is set, so a re-invocation fills in only what is
// missing. A run that aborts leaves no file behind.
inline SuiteOutcome run_training_suite(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir,
                                       bool force, int workers,
                                       std::ostream& log) {
  if (cfg.runs.empty())
    throw ConfigError("config: 'runs' is required for training");
  std::filesystem::create_directories(out_dir);
  struct Job {
    const RunSpec* run;
    std::uint64_t seed;
    std::filesystem::path path;
  };
  std::vector<Job> jobs;
  SuiteOutcome outcome;
  for (const RunSpec& run : cfg.runs)
    for (const std::uint64_t seed : cfg.seeds) {
      const std::filesystem::path path = out_dir / run_file_name(run.label, seed);
      if (!force && std::filesystem::exists(path)) {
        log << "keep " << path.string() << " (exists; use --force to redo)\n";
        ++outcome.skipped;
      } else {
        jobs.push_back({&run, seed, path});
      }
    }
  std::vector<std::optional<FailedRun>> failures(jobs.size());
  parallel_for_index(jobs.size(), workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      const TrainConfig tc = make_train_config(cfg, *job.run, job.seed);
      const TrainResult result = train(tc);
      write_file_atomic(job.path, learning_curve_csv(job.seed, result.episodes));
    } catch (const std::exception& e) {
      failures[i] = FailedRun{job.run->label, job.seed, e.what()};
    }
  });
  for (const auto& f : failures)
    if (f) outcome.failed.push_back(*f);
  outcome.executed = static_cast<int>(jobs.size()) -
                     static_cast<int>(outcome.failed.size());
  for (const Job& job : jobs) log << "run  " << job.path.string() << "\n";
  return outcome;
}

inline json json_samples(double v) {
  if (std::isinf(v)) return json("never");
  return json(v);
}

// Aggregates every learning-curve CSV in the directory. The summary is a
// pure function of the CSV contents plus (threshold, window), so `report`
// regenerates it bit-for-bit.
inline json compute_summary(const std::filesystem::path& dir, double threshold,
                            int window) {
  struct PerSeed {
    std::uint64_t seed;
    int episodes;
    double final_return;
    double to_threshold;
    long long total_samples;
  };
  std::map<std::string, std::vector<PerSeed>> by_label;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename().string().find("_seed") != std::string::npos)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const std::filesystem::path& path : files) {
    const std::string stem = path.stem().string();
    const std::size_t pos = stem.rfind("_seed");
    const std::string label = stem.substr(0, pos);
    const LearningCurve curve = read_learning_curve_csv(path);
    if (curve.episodes.empty())
      throw ConfigError(path.string() + ": no episodes");
    std::vector<double> returns;
    std::vector<long long> cumulative;
    for (const EpisodeRecord& e : curve.episodes) {
      returns.push_back(e.episode_return);
      cumulative.push_back(e.cumulative_samples);
    }
    by_label[label].push_back(
        {curve.seed, static_cast<int>(curve.episodes.size()),
         final_window_mean(returns, window),
         samples_to_threshold(returns, cumulative, window, threshold),
         cumulative.back()});
  }
  if (by_label.empty())
    throw ConfigError("no learning-curve CSVs found in " + dir.string());
  json summary;
  summary["threshold"] = threshold;
  summary["window"] = window;
  json runs = json::array();
  json configs = json::object();
  for (auto& [label, entries] : by_label) {
    std::sort(entries.begin(), entries.end(),
              [](const PerSeed& a, const PerSeed& b) { return a.seed < b.seed; });
    std::vector<double> finals, to_thresh, totals;
    for (const PerSeed& e : entries) {
      json r;
      r["label"] = label;
      r["seed"] = e.seed;
      r["episodes"] = e.episodes;
      r["final_smoothed_return"] = e.final_return;
      r["samples_to_threshold"] = json_samples(e.to_threshold);
      r["total_samples"] = e.total_samples;
      runs.push_back(std::move(r));
      finals.push_back(e.final_return);
      to_thresh.push_back(e.to_threshold);
      totals.push_back(static_cast<double>(e.total_samples));
    }
    json agg;
    agg["num_seeds"] = entries.size();
    agg["final_smoothed_return"] = {{"mean", mean(finals)},
                                    {"median", median(finals)},
                                    {"iqr", interquartile_range(finals)}};
    agg["samples_to_threshold"] = {{"median", json_samples(median(to_thresh))}};
    agg["total_samples"] = {{"median", median(totals)}};
    configs[label] = std::move(agg);
  }
  summary["runs"] = std::move(runs);
  // Labels of the form alpha<number> come from a sweep; surface them in
  // ascending alpha order for direct comparison.
  json alphas = json::array();
  std::vector<std::pair<double, std::string>> parsed;
  for (const auto& [label, entries] : by_label) {
    if (label.rfind("alpha", 0) != 0) continue;
    const std::string rest = label.substr(5);
    try {
      std::size_t pos = 0;
      const double a = std::stod(rest, &pos);
      if (pos == rest.size() && a >= 0.0) parsed.push_back({a, label});
    } catch (const std::exception&) {
    }
  }
  if (parsed.size() == by_label.size() && !parsed.empty()) {
    std::sort(parsed.begin(), parsed.end());
    for (const auto& [a, label] : parsed) {
      json row;
      row["alpha"] = a;
      row["label"] = label;
      row["final_smoothed_return_median"] =
          configs.at(label).at("final_smoothed_return").at("median");
      row["samples_to_threshold_median"] =
          configs.at(label).at("samples_to_threshold").at("median");
      alphas.push_back(std::move(row));
    }
    summary["alphas"] = std::move(alphas);
  }
  summary["configs"] = std::move(configs);
  return summary;
}

inline void write_summary(const std::filesystem::path& dir, const json& summary) {
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
}

// Correlation front end: evaluates the entropy/gap/mixing sweep for each
// named grid and writes one CSV. An existing file is kept unless force.
// Grid names are resolved before the existence check so typos surface even
// when the output is already present.
inline bool run_correlation(const std::vector<std::string>& grid_names,
                            int n_policies, const std::filesystem::path& out_dir,
                            bool force, int workers, std::ostream& log) {
  if (grid_names.empty()) throw ConfigError("correlate: no grids given");
  std::vector<NamedKernel> kernels;
  for (const std::string& name : grid_names) {
    const GridSpec spec = builtin_grid(name);
    kernels.push_back({spec.name(), build_gridworld_kernel(spec)});
  }
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path path = out_dir / "correlation.csv";
  if (!force && std::filesystem::exists(path)) {
    log << "keep " << path.string() << " (exists; use --force to redo)\n";
    return false;
  }
  const std::vector<CorrelationRecord> records =
      correlation_study(kernels, n_policies, workers);
  write_file_atomic(path, correlation_csv(records));
  log << "wrote " << path.string() << " (" << records.size() << " rows)\n";
  return true;
}

// Expands one config into per-alpha exponential-schedule runs labeled
// alpha<value>. The config must supply a base schedule carrying t_i and
// t_cap; its variant and alpha fields are overridden.
inline ExperimentConfig alpha_sweep_config(const ExperimentConfig& cfg,
                                           const std::vector<double>& alphas) {
  if (!cfg.base_schedule)
    throw ConfigError("sweep-alpha: config needs a top-level 'schedule' with "
                      "t_i and t_cap");
  if (alphas.empty()) throw ConfigError("sweep-alpha: no alphas given");
  std::set<double> unique(alphas.begin(), alphas.end());
  if (unique.size() != alphas.size())
    throw ConfigError("sweep-alpha: duplicate alphas");
  ExperimentConfig sweep = cfg;
  sweep.runs.clear();
  for (const double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a))
      throw ConfigError("sweep-alpha: alpha must be finite and >= 0");
    RunSpec run;
    run.label = "alpha" + format_number(a);
    run.schedule = *cfg.base_schedule;
    run.schedule.kind = ScheduleKind::AdaExponential;
    run.schedule.alpha = a;
    run.schedule.validate();
    sweep.runs.push_back(std::move(run));
  }
  return sweep;
}

}  // namespace adanav
