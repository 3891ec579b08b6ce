#include "bolt/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace bolt {

Summary summarize(const std::vector<double>& totals) {
  if (totals.empty()) throw std::invalid_argument("no totals to summarize");
  const double n = static_cast<double>(totals.size());
  double sum = 0.0;
  for (double t : totals) sum += t;
  const double mean = sum / n;
  if (totals.size() == 1) return {mean, 0.0, false};
  double sq = 0.0;
  for (double t : totals) sq += (t - mean) * (t - mean);
  const double sample_std = std::sqrt(sq / (n - 1.0));
  return {mean, 1.96 * sample_std / std::sqrt(n), true};
}

LoadedEnvironment resolve_environment(const ExperimentConfig& config) {
  LoadedEnvironment loaded = [&] {
    if (config.env.file) return load_environment(*config.env.file);
    if (config.env.builtin == "chain") {
      return LoadedEnvironment{make_chain(config.env.p_slip), PriorSpec{}};
    }
    throw std::invalid_argument("unknown built-in environment '" + config.env.builtin + "'");
  }();
  if (config.prior) loaded.prior = *config.prior;
  return loaded;
}

namespace {

std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& config,
                                                          const Environment& env) {
  const auto& a = config.agent;
  return {
      {"version", kVersion},
      {"env", config.env.file ? config.env.file->string() : config.env.builtin},
      {"env_name", env.name},
      {"p_slip", config.env.file ? "" : format_number(config.env.p_slip)},
      {"prior", config.prior ? to_string(config.prior->family) : "given"},
      {"prior_count", config.prior ? format_number(config.prior->initial_count) : "given"},
      {"agent", to_string(a.kind)},
      {"param", a.parameter_name()},
      {"value", format_number(a.parameter_value())},
      {"trials", std::to_string(config.trials)},
      {"horizon", std::to_string(config.horizon)},
      {"gamma", format_number(a.solver.discount)},
      {"vi_eps", format_number(a.solver.stop_eps)},
      {"warm_start", a.warm_start ? "true" : "false"},
      {"seed", std::to_string(config.master_seed)},
  };
}

void record_prior(ExperimentResult& result, const PriorSpec& prior) {
  for (auto& [key, value] : result.metadata) {
    if (key == "prior") value = to_string(prior.family);
    if (key == "prior_count") value = format_number(prior.initial_count);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const Environment& env,
                                const Belief& prior) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  ExperimentResult result;
  result.param_name = config.agent.parameter_name();
  result.param_value = config.agent.parameter_value();
  result.totals.assign(static_cast<std::size_t>(config.trials), 0.0);

  std::atomic<int> next_trial{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int trial = next_trial.fetch_add(1);
      if (trial >= config.trials) return;
      try {
        EpisodeStreams streams{make_stream(config.master_seed, trial, Stream::kEnvironment),
                               make_stream(config.master_seed, trial, Stream::kAgent)};
        result.totals[trial] =
            run_episode(env, config.agent, prior, config.horizon, streams).total_reward;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next_trial.store(config.trials);
        return;
      }
    }
  };
  const int jobs = std::max(1, std::min(config.jobs, config.trials));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const Summary summary = summarize(result.totals);
  result.mean = summary.mean;
  result.ci95 = summary.ci95;
  result.ci_defined = summary.ci_defined;
  result.metadata = describe(config, env);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const LoadedEnvironment loaded = resolve_environment(config);
  const Belief prior = build_prior(loaded.prior, loaded.env.model.n_states(),
                                   loaded.env.model.n_actions(), loaded.env.skeleton);
  ExperimentResult result = run_experiment(config, loaded.env, prior);
  record_prior(result, loaded.prior);
  return result;
}

std::vector<ExperimentResult> run_sweep(const ExperimentConfig& config,
                                        const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  const LoadedEnvironment loaded = resolve_environment(config);
  const Belief prior = build_prior(loaded.prior, loaded.env.model.n_states(),
                                   loaded.env.model.n_actions(), loaded.env.skeleton);
  std::vector<ExperimentResult> results;
  for (double value : values) {
    ExperimentConfig point = config;
    point.agent.set_parameter(value);
    results.push_back(run_experiment(point, loaded.env, prior));
    record_prior(results.back(), loaded.prior);
  }
  return results;
}

TheoreticalParams compute_theoretical_params(double epsilon_pac, double delta, double discount,
                                             int n_states, int n_actions,
                                             std::optional<double> eta) {
  if (!(epsilon_pac > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("gamma in [0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta in (0,1)");
  // Smallest H >= 1 with gamma^H / (1 - gamma) <= target.
  auto horizon_for = [&](double target) {
    if (discount == 0.0) return 1;
    const double h = std::ceil(std::log(target * (1.0 - discount)) / std::log(discount));
    return static_cast<int>(std::max(1.0, h));
  };
  TheoreticalParams p{};
  p.epsilon_pac = epsilon_pac;
  p.delta = delta;
  p.discount = discount;
  p.horizon = horizon_for(epsilon_pac);
  p.horizon_half = horizon_for(epsilon_pac / 2.0);
  p.eta_star = eta.value_or(static_cast<double>(p.horizon));
  const double one_minus = 1.0 - discount;
  p.known_threshold = 4.0 * p.eta_star * p.eta_star / (epsilon_pac * one_minus);
  const double pairs = static_cast<double>(n_states) * n_actions;
  p.sample_complexity = pairs * p.eta_star * p.eta_star /
                        (epsilon_pac * epsilon_pac * one_minus * one_minus);
  p.sample_complexity_with_log = p.sample_complexity * std::log(pairs / delta);
  return p;
}

std::string format_number(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buffer, end);
}

std::string trials_csv(const std::vector<ExperimentResult>& results) {
  std::string out = "param,value,trial,total\n";
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.totals.size(); ++k) {
      out += r.param_name + "," + format_number(r.param_value) + "," + std::to_string(k) + "," +
             format_number(r.totals[k]) + "\n";
    }
  }
  return out;
}

std::string aggregate_csv(const std::vector<ExperimentResult>& results) {
  std::string out = "param,value,mean,ci95\n";
  for (const auto& r : results) {
    out += r.param_name + "," + format_number(r.param_value) + "," + format_number(r.mean) + "," +
           format_number(r.ci95) + "\n";
  }
  return out;
}

std::string plot_csv(const std::vector<ExperimentResult>& results,
                     const std::optional<ExperimentResult>& reference) {
  if (results.empty()) throw std::invalid_argument("no results to emit");
  if (!reference) return aggregate_csv(results);
  std::string out = "param,value,mean,ci95,reference_mean\n";
  for (const auto& r : results) {
    out += r.param_name + "," + format_number(r.param_value) + "," + format_number(r.mean) + "," +
           format_number(r.ci95) + "," + format_number(reference->mean) + "\n";
  }
  return out;
}

std::string metadata_csv(const ExperimentResult& result) {
  std::string out = "key,value\n";
  for (const auto& [key, value] : result.metadata) out += key + "," + value + "\n";
  return out;
}

void emit_plot_data(const std::vector<ExperimentResult>& results,
                    const std::optional<ExperimentResult>& reference,
                    const std::filesystem::path& path) {
  write_file_atomic(path, plot_csv(results, reference));
}

std::vector<AggregateRow> parse_aggregate_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  const bool with_reference = line == "param,value,mean,ci95,reference_mean";
  if (!with_reference && line != "param,value,mean,ci95") {
    throw std::invalid_argument("unexpected CSV header '" + line + "'");
  }
  auto number = [](const std::string& field) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      throw std::invalid_argument("bad number '" + field + "'");
    }
    return v;
  };
  std::vector<AggregateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) fields.push_back(cell);
    if (fields.size() != (with_reference ? 5u : 4u)) {
      throw std::invalid_argument("wrong field count in '" + line + "'");
    }
    AggregateRow row{fields[0], number(fields[1]), number(fields[2]), number(fields[3]),
                     std::nullopt};
    if (with_reference) row.reference_mean = number(fields[4]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into place at " + path.string() + ": " +
                             ec.message());
  }
}

}  // namespace bolt
