// boltrl: experiment runner and oracle checks for tabular Bayesian RL agents.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bolt/harness.hpp"
#include "bolt/oracle.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string env = "chain";
  double p_slip = 0.2;
  std::string prior;  // empty: file's prior, or full for built-ins
  std::optional<double> prior_count;
  std::string agent = "exploit";
  double eta = 0.0;
  double beta = 0.0;
  double eps = 0.0;
  int trials = 500;
  int horizon = 1000;
  double gamma = 0.95;
  double vi_eps = 0.01;
  std::uint64_t seed = 1;
  std::string out;
  int jobs = 1;
  bool cold_start = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--env", o.env, "built-in environment name (chain) or JSON file path");
  cmd->add_option("--p-slip", o.p_slip, "slip probability of the built-in chain");
  cmd->add_option("--prior", o.prior, "full, tied, semi or structured (default: file / full)");
  cmd->add_option("--prior-count", o.prior_count, "initial pseudo-count per class");
  cmd->add_option("--agent", o.agent, "exploit, eps-greedy, beb or bolt");
  cmd->add_option("--eta", o.eta, "BOLT artificial evidence");
  cmd->add_option("--beta", o.beta, "BEB bonus scale");
  cmd->add_option("--eps", o.eps, "exploration rate of eps-greedy");
  cmd->add_option("--trials", o.trials, "number of trials");
  cmd->add_option("--horizon", o.horizon, "steps per trial");
  cmd->add_option("--gamma", o.gamma, "planning discount");
  cmd->add_option("--vi-eps", o.vi_eps, "value iteration stopping threshold");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "per-trial CSV output path");
  cmd->add_option("--jobs", o.jobs, "parallel workers");
  cmd->add_flag("--cold-start", o.cold_start, "solve from V = 0 at every step");
}

bolt::ExperimentConfig to_config(const RunOptions& o) {
  bolt::ExperimentConfig config;
  if (o.env == "chain") {
    config.env.builtin = "chain";
    config.env.p_slip = o.p_slip;
  } else {
    config.env.file = o.env;
  }
  if (!o.prior.empty() || o.prior_count) {
    bolt::PriorSpec spec;
    if (!o.prior.empty()) {
      spec.family = bolt::parse_prior_family(o.prior);
    } else if (config.env.file) {
      spec = bolt::load_environment(*config.env.file).prior;
    }
    if (spec.family == bolt::PriorFamily::kStructured && spec.classes.empty()) {
      if (!config.env.file) throw ConfigError("a structured prior needs an environment file");
      spec.classes = bolt::load_environment(*config.env.file).prior.classes;
    }
    if (o.prior_count) spec.initial_count = *o.prior_count;
    config.prior = spec;
  }
  config.agent.kind = bolt::parse_agent_kind(o.agent);
  config.agent.eta = o.eta;
  config.agent.beta = o.beta;
  config.agent.eps_explore = o.eps;
  config.agent.solver.discount = o.gamma;
  config.agent.solver.stop_eps = o.vi_eps;
  config.agent.warm_start = !o.cold_start;
  config.trials = o.trials;
  config.horizon = o.horizon;
  config.master_seed = o.seed;
  config.jobs = o.jobs;
  if (o.trials < 1) throw ConfigError("--trials must be >= 1");
  if (o.horizon < 1) throw ConfigError("--horizon must be >= 1");
  if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (!(o.gamma >= 0.0 && o.gamma < 1.0)) throw ConfigError("--gamma must lie in [0,1)");
  if (!(o.vi_eps > 0.0)) throw ConfigError("--vi-eps must be positive");
  return config;
}

std::vector<double> parse_values(const std::string& list, const std::string& range) {
  std::vector<double> values;
  if (!list.empty()) {
    std::istringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("bad sweep value '" + item + "'");
      }
    }
  }
  if (!range.empty()) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(range);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) ||
        stop < start) {
      throw ConfigError("--range expects start:stop:step with step > 0");
    }
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      // Rounded so that 0.1-steps print as 0.3 rather than 0.30000000000000004.
      values.push_back(std::round((start + i * step) * 1e9) / 1e9);
    }
  }
  if (values.empty()) throw ConfigError("sweep needs --values or --range");
  return values;
}

void print_result(const bolt::ExperimentResult& r) {
  std::printf("%s=%s mean=%.4f ci95=%.4f%s trials=%zu\n", r.param_name.c_str(),
              bolt::format_number(r.param_value).c_str(), r.mean, r.ci95,
              r.ci_defined ? "" : " (undefined: single trial)", r.totals.size());
}

int cmd_run(const RunOptions& o) {
  const auto config = to_config(o);
  const auto result = bolt::run_experiment(config);
  print_result(result);
  if (!o.out.empty()) {
    bolt::write_file_atomic(o.out, bolt::trials_csv({result}));
    bolt::write_file_atomic(o.out + ".meta.csv", bolt::metadata_csv(result));
  }
  return 0;
}

struct SweepOptions {
  std::string values;
  std::string range;
  std::string aggregate_out;
  std::string plot_out;
  bool reference = false;
};

int cmd_sweep(const RunOptions& o, const SweepOptions& s) {
  const auto config = to_config(o);
  const auto values = parse_values(s.values, s.range);
  const auto results = bolt::run_sweep(config, values);
  for (const auto& r : results) print_result(r);
  std::optional<bolt::ExperimentResult> reference;
  if (s.reference) {
    auto ref_config = config;
    ref_config.agent.kind = bolt::AgentKind::kExploit;
    reference = bolt::run_experiment(ref_config);
    std::printf("reference exploit mean=%.4f ci95=%.4f\n", reference->mean, reference->ci95);
  }
  if (!o.out.empty()) bolt::write_file_atomic(o.out, bolt::trials_csv(results));
  if (!s.aggregate_out.empty()) {
    bolt::write_file_atomic(s.aggregate_out, bolt::aggregate_csv(results));
  }
  if (!s.plot_out.empty()) bolt::emit_plot_data(results, reference, s.plot_out);
  return 0;
}

struct CheckOptions {
  int instances = 200;
  std::uint64_t seed = 1;
  int max_horizon = 3;
};

int cmd_check_optimism(const CheckOptions& c) {
  const auto report = bolt::check_optimism({c.instances, c.seed, c.max_horizon});
  std::printf("instances=%d comparisons=%d violations=%d min_slack=%.3e\n", report.instances,
              report.comparisons, report.violations, report.min_slack);
  return report.violations == 0 ? 0 : kRuntimeError;
}

int cmd_check_induced(const CheckOptions& c) {
  const auto report = bolt::check_induced_inequality({c.instances, c.seed, c.max_horizon});
  std::printf("instances=%d comparisons=%d violations=%d min_slack=%.3e\n", report.instances,
              report.comparisons, report.violations, report.min_slack);
  return report.violations == 0 ? 0 : kRuntimeError;
}

struct ValueOptions {
  int state = 0;
  int horizon = 2;
  std::optional<double> eta;
  double gamma = 1.0;
};

int cmd_oracle_value(const RunOptions& o, const ValueOptions& v) {
  auto config = to_config(o);
  const auto loaded = bolt::resolve_environment(config);
  const auto prior = bolt::build_prior(loaded.prior, loaded.env.model.n_states(),
                                       loaded.env.model.n_actions(), loaded.env.skeleton);
  if (v.state < 0 || v.state >= prior.n_states()) throw ConfigError("--state out of range");
  const double eta = v.eta.value_or(v.horizon);
  const bolt::BeliefState node{v.state, prior};
  const auto& reward = loaded.env.model.reward();
  const double bayes = bolt::bayes_optimal_value(node, v.horizon, reward, v.gamma);
  const double bolt_value = bolt::bolt_finite_value(node, v.horizon, eta, reward, v.gamma);
  std::printf("state=%d horizon=%d gamma=%s bayes_optimal=%.12f bolt(eta=%s)=%.12f slack=%.3e\n",
              v.state, v.horizon, bolt::format_number(v.gamma).c_str(), bayes,
              bolt::format_number(eta).c_str(), bolt_value, bolt_value - bayes);
  return 0;
}

struct EnvOptions {
  double p_slip = 0.2;
  std::string prior = "full";
  double prior_count = 1.0;
  std::string out;
};

int cmd_env(const EnvOptions& e) {
  if (!(e.p_slip >= 0.0 && e.p_slip <= 1.0)) throw ConfigError("--p-slip must lie in [0,1]");
  if (!(e.prior_count > 0.0)) throw ConfigError("--prior-count must be positive");
  const bolt::PriorSpec prior{bolt::parse_prior_family(e.prior), e.prior_count, {}};
  if (prior.family == bolt::PriorFamily::kStructured) {
    throw ConfigError("write the chain with full, tied or semi; structured listings are hand-made");
  }
  const std::string text = bolt::serialize_environment(bolt::make_chain(e.p_slip), prior);
  if (e.out.empty()) {
    std::cout << text;
  } else {
    bolt::write_file_atomic(e.out, text);
  }
  return 0;
}

struct ParamsOptions {
  double epsilon = 0.01;
  double delta = 0.05;
  double gamma = 0.95;
  int states = 5;
  int actions = 2;
  std::optional<double> eta;
};

int cmd_params(const ParamsOptions& p) {
  const auto t =
      bolt::compute_theoretical_params(p.epsilon, p.delta, p.gamma, p.states, p.actions, p.eta);
  std::printf("epsilon=%s delta=%s gamma=%s\n", bolt::format_number(t.epsilon_pac).c_str(),
              bolt::format_number(t.delta).c_str(), bolt::format_number(t.discount).c_str());
  std::printf("H=%d H_half_eps=%d eta=%s m=%.6g\n", t.horizon, t.horizon_half,
              bolt::format_number(t.eta_star).c_str(), t.known_threshold);
  std::printf("sample_complexity=%.6g sample_complexity_with_log=%.6g\n", t.sample_complexity,
              t.sample_complexity_with_log);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular Bayesian RL experiments: EXPLOIT, eps-greedy, BEB and BOLT"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "run one agent configuration");
  add_run_options(run, run_opts);

  RunOptions sweep_opts;
  SweepOptions sweep_extra;
  auto* sweep = app.add_subcommand("sweep", "sweep the agent's parameter");
  add_run_options(sweep, sweep_opts);
  sweep->add_option("--values", sweep_extra.values, "comma-separated parameter values");
  sweep->add_option("--range", sweep_extra.range, "start:stop:step");
  sweep->add_option("--aggregate-out", sweep_extra.aggregate_out, "aggregate CSV path");
  sweep->add_option("--plot-out", sweep_extra.plot_out, "plot-data CSV path");
  sweep->add_flag("--reference", sweep_extra.reference, "also run EXPLOIT as a reference line");

  auto* oracle = app.add_subcommand("oracle", "exact belief-tree computations");
  oracle->require_subcommand(1);
  CheckOptions optimism_opts;
  auto* optimism = oracle->add_subcommand("check-optimism", "random FDM optimism check");
  optimism->add_option("--instances", optimism_opts.instances, "random instances");
  optimism->add_option("--seed", optimism_opts.seed, "generator seed");
  optimism->add_option("--max-horizon", optimism_opts.max_horizon, "largest horizon tried");
  CheckOptions induced_opts;
  induced_opts.instances = 50;
  auto* induced = oracle->add_subcommand("check-induced", "random induced-inequality check");
  induced->add_option("--instances", induced_opts.instances, "random instances");
  induced->add_option("--seed", induced_opts.seed, "generator seed");
  induced->add_option("--max-horizon", induced_opts.max_horizon, "largest horizon tried");
  RunOptions value_env;
  ValueOptions value_opts;
  auto* value = oracle->add_subcommand("value", "Bayes-optimal and BOLT values at a state");
  value->add_option("--env", value_env.env, "chain or JSON file path");
  value->add_option("--p-slip", value_env.p_slip, "slip probability of the built-in chain");
  value->add_option("--prior", value_env.prior, "prior family override");
  value->add_option("--prior-count", value_env.prior_count, "initial pseudo-count per class");
  value->add_option("--state", value_opts.state, "start state");
  value->add_option("--horizon", value_opts.horizon, "steps to go");
  value->add_option("--eta", value_opts.eta, "default: the horizon");
  value->add_option("--gamma", value_opts.gamma, "discount (default: 1)");

  EnvOptions env_opts;
  auto* env = app.add_subcommand("env", "write the built-in chain as an environment file");
  env->add_option("--p-slip", env_opts.p_slip, "slip probability");
  env->add_option("--prior", env_opts.prior, "full, tied or semi");
  env->add_option("--prior-count", env_opts.prior_count, "initial pseudo-count per class");
  env->add_option("--out", env_opts.out, "output path (default: stdout)");

  ParamsOptions params_opts;
  auto* params = app.add_subcommand("params", "theoretical PAC-BAMDP parameters");
  params->add_option("--epsilon", params_opts.epsilon, "accuracy target");
  params->add_option("--delta", params_opts.delta, "failure probability");
  params->add_option("--gamma", params_opts.gamma, "discount in [0, 1)");
  params->add_option("--states", params_opts.states, "number of states");
  params->add_option("--actions", params_opts.actions, "number of actions");
  params->add_option("--eta", params_opts.eta, "artificial evidence (default: H)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_extra);
    if (optimism->parsed()) return cmd_check_optimism(optimism_opts);
    if (induced->parsed()) return cmd_check_induced(induced_opts);
    if (value->parsed()) return cmd_oracle_value(value_env, value_opts);
    if (params->parsed()) return cmd_params(params_opts);
    if (env->parsed()) return cmd_env(env_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bolt::SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bolt::StochasticityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bolt::RangeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bolt::SkeletonMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bolt::IncompleteListing& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bolt::BudgetExceeded& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}
