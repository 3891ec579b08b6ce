#pragma once

// Experiment orchestration: seeded parallel trials, parameter sweeps,
// confidence intervals, CSV output and the PAC parameter calculator.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bolt/agents.hpp"
#include "bolt/envs.hpp"
#include "bolt/priors.hpp"

namespace bolt {

inline constexpr const char* kVersion = "0.1.0";

/// Either a built-in environment ("chain" with p_slip) or a JSON file.
struct EnvSource {
  std::string builtin = "chain";
  double p_slip = 0.2;
  std::optional<std::filesystem::path> file;
};

struct ExperimentConfig {
  EnvSource env;
  /// Overrides the file's prior; defaults to Full with unit counts for
  /// built-in environments.
  std::optional<PriorSpec> prior;
  AgentConfig agent;
  int trials = 500;
  int horizon = 1000;
  std::uint64_t master_seed = 1;
  int jobs = 1;
};

struct ExperimentResult {
  std::string param_name;
  double param_value = 0.0;
  std::vector<double> totals;  // by trial index
  double mean = 0.0;
  double ci95 = 0.0;        // 1.96 * sample std / sqrt(n)
  bool ci_defined = false;  // false for a single trial (ci95 reported as 0)
  std::vector<std::pair<std::string, std::string>> metadata;
};

struct Summary {
  double mean;
  double ci95;
  bool ci_defined;
};

/// Mean and 95% half-width from the unbiased sample standard deviation.
Summary summarize(const std::vector<double>& totals);

/// Environment and prior named by the config.
LoadedEnvironment resolve_environment(const ExperimentConfig& config);

/// Runs config.trials episodes; trial k uses streams derived from
/// (master_seed, k) whatever the number of jobs.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const Environment& env,
                                const Belief& prior);

/// One experiment per value of the agent's parameter, same seeds for all.
std::vector<ExperimentResult> run_sweep(const ExperimentConfig& config,
                                        const std::vector<double>& values);

struct TheoreticalParams {
  double epsilon_pac;
  double delta;
  double discount;
  int horizon;       // smallest H with gamma^H / (1 - gamma) <= eps
  int horizon_half;  // same with eps / 2
  double eta_star;   // = horizon unless overridden
  double known_threshold;  // m = 4 eta^2 / (eps (1 - gamma))
  double sample_complexity;           // |S||A| eta^2 / (eps^2 (1 - gamma)^2)
  double sample_complexity_with_log;  // times log(|S||A| / delta)
};

TheoreticalParams compute_theoretical_params(double epsilon_pac, double delta, double discount,
                                             int n_states, int n_actions,
                                             std::optional<double> eta = std::nullopt);

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// param,value,trial,total
std::string trials_csv(const std::vector<ExperimentResult>& results);
/// param,value,mean,ci95
std::string aggregate_csv(const std::vector<ExperimentResult>& results);
/// param,value,mean,ci95[,reference_mean]. Throws std::invalid_argument on
/// empty results.
std::string plot_csv(const std::vector<ExperimentResult>& results,
                     const std::optional<ExperimentResult>& reference);
/// key,value rows of the config echo.
std::string metadata_csv(const ExperimentResult& result);

/// Writes plot_csv to `path` atomically.
void emit_plot_data(const std::vector<ExperimentResult>& results,
                    const std::optional<ExperimentResult>& reference,
                    const std::filesystem::path& path);

struct AggregateRow {
  std::string param;
  double value;
  double mean;
  double ci95;
  std::optional<double> reference_mean;
};

/// Parses aggregate_csv / plot_csv output.
std::vector<AggregateRow> parse_aggregate_csv(const std::string& text);

/// Write to a sibling temporary file, then rename. Throws std::runtime_error
/// naming the path on failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace bolt
