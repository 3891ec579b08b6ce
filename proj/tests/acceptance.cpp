// Acceptance run: one PASS/FAIL line per criterion, tolerances as agreed for
// the Chain benchmark and the exact oracle checks. Exit status is nonzero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bolt/agents.hpp"
#include "bolt/harness.hpp"
#include "bolt/oracle.hpp"
#include "test_support.hpp"

using namespace bolt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Options {
  int jobs = 1;
  std::filesystem::path out_dir = "acceptance_out";
  std::uint64_t seed = 1;
};

struct Verdict {
  bool pass;
  std::string summary;
};

void report(int id, const std::string& name, const Verdict& v) {
  std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.summary.c_str());
  std::fflush(stdout);
}

void detail(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

ExperimentConfig chain_config(PriorFamily prior, AgentKind kind, double param, int trials,
                              int horizon, const Options& opt) {
  ExperimentConfig c;
  c.env.builtin = "chain";
  c.env.p_slip = 0.2;
  c.prior = PriorSpec{prior, 1.0, {}};
  c.agent.kind = kind;
  c.agent.set_parameter(param);
  c.agent.solver.discount = 0.95;
  c.agent.solver.stop_eps = 0.01;
  c.trials = trials;
  c.horizon = horizon;
  c.master_seed = opt.seed;
  c.jobs = opt.jobs;
  return c;
}

struct Row {
  const char* label;
  AgentKind kind;
  double param;
  double tied;
  double semi;
  double full;
};

// Published means (500 trials, horizon 1000, p = 0.2).
constexpr Row kTable[] = {
    {"EXPLOIT", AgentKind::kExploit, 0.0, 366.1, 354.9, 230.2},
    {"BEB(beta=1)", AgentKind::kBeb, 1.0, 365.9, 362.5, 343.0},
    {"BEB(beta=150)", AgentKind::kBeb, 150.0, 366.5, 297.5, 165.2},
    {"BOLT(eta=7)", AgentKind::kBolt, 7.0, 367.9, 367.0, 289.6},
    {"BOLT(eta=150)", AgentKind::kBolt, 150.0, 366.6, 358.3, 278.7},
};

bool within(double mean, double ci95, double target) {
  return std::abs(mean - target) <= 0.10 * target || std::abs(mean - target) <= ci95;
}

Verdict table_reproduction(const Options& opt, ExperimentResult& exploit_full) {
  bool all_within = true;
  std::vector<double> full_means;
  for (PriorFamily prior : {PriorFamily::kFull, PriorFamily::kTied, PriorFamily::kSemi}) {
    for (const Row& row : kTable) {
      const auto start = Clock::now();
      const auto result =
          run_experiment(chain_config(prior, row.kind, row.param, 500, 1000, opt));
      const double target = prior == PriorFamily::kFull   ? row.full
                            : prior == PriorFamily::kTied ? row.tied
                                                          : row.semi;
      const bool ok = within(result.mean, result.ci95, target);
      const bool scored = prior != PriorFamily::kSemi;
      if (scored) all_within = all_within && ok;
      if (prior == PriorFamily::kFull) full_means.push_back(result.mean);
      if (prior == PriorFamily::kFull && row.kind == AgentKind::kExploit) exploit_full = result;
      detail("%s %-5s %-14s mean=%7.2f ci95=%5.2f published=%6.1f rel=%+6.1f%% %s (%.1fs)",
             scored ? "" : "[info]", to_string(prior).c_str(), row.label, result.mean,
             result.ci95, target, 100.0 * (result.mean - target) / target,
             ok ? "ok" : "OUT", seconds_since(start));
    }
  }
  // BEB(1) > BOLT(7) > BOLT(150) > EXPLOIT > BEB(150)
  const double exploit = full_means[0], beb1 = full_means[1], beb150 = full_means[2],
               bolt7 = full_means[3], bolt150 = full_means[4];
  const bool order = beb1 > bolt7 && bolt7 > bolt150 && bolt150 > exploit && exploit > beb150;
  detail("Full ordering BEB(1) > BOLT(7) > BOLT(150) > EXPLOIT > BEB(150): %s",
         order ? "reproduced" : "not reproduced");
  std::ostringstream msg;
  msg << "rows within tolerance: " << (all_within ? "all" : "not all")
      << "; Full ordering: " << (order ? "reproduced" : "not reproduced");
  return {all_within && order, msg.str()};
}

Verdict sweep_shape(const Options& opt) {
  std::vector<double> values;
  for (int v = 1; v <= 100; ++v) values.push_back(v);
  const auto start = Clock::now();
  const auto reference =
      run_experiment(chain_config(PriorFamily::kFull, AgentKind::kExploit, 0, 300, 150, opt));
  const auto beb =
      run_sweep(chain_config(PriorFamily::kFull, AgentKind::kBeb, 0, 300, 150, opt), values);
  const auto bolt =
      run_sweep(chain_config(PriorFamily::kFull, AgentKind::kBolt, 0, 300, 150, opt), values);
  emit_plot_data(beb, reference, opt.out_dir / "sweep_beb.csv");
  emit_plot_data(bolt, reference, opt.out_dir / "sweep_bolt.csv");
  for (std::size_t i : {0u, 4u, 9u, 24u, 49u, 99u}) {
    detail("param=%3g BEB=%6.2f±%4.2f BOLT=%6.2f±%4.2f", values[i], beb[i].mean, beb[i].ci95,
           bolt[i].mean, bolt[i].ci95);
  }
  const double ref = reference.mean;
  const bool ok = beb.back().mean < ref && bolt.back().mean > ref;
  char msg[200];
  std::snprintf(msg, sizeof msg, "EXPLOIT=%.2f BEB(100)=%.2f BOLT(100)=%.2f (%.0fs)", ref,
                beb.back().mean, bolt.back().mean, seconds_since(start));
  return {ok && seconds_since(start) <= 20 * 60, msg};
}

Verdict optimism() {
  const auto start = Clock::now();
  const auto r = check_optimism({200, 1, 3});
  const double elapsed = seconds_since(start);
  char msg[200];
  std::snprintf(msg, sizeof msg, "%d instances, %d comparisons, %d violations, min slack %.3e (%.2fs)",
                r.instances, r.comparisons, r.violations, r.min_slack, elapsed);
  return {r.instances >= 200 && r.violations == 0 && r.min_slack >= -1e-9 && elapsed <= 120, msg};
}

Verdict reductions() {
  Rng gen(derive_seed(7, 0, Stream::kAgent));
  const Environment chain = make_chain(0.2);
  const SolverConfig solver{};
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    // Alternate random FDM beliefs with random rewards and Chain posteriors
    // (Full, Tied, Semi) reached by a random walk.
    Belief belief = build_full(2, 2, 1.0);
    Tensor3 reward;
    StateId state = 0;
    if (i % 2 == 0) {
      const int n_s = 2 + uniform_index(gen, 4);
      const int n_a = 2 + uniform_index(gen, 2);
      belief = testing::random_fdm(gen, n_s, n_a);
      reward = testing::random_reward(gen, n_s, n_a);
      state = uniform_index(gen, n_s);
    } else {
      const PriorFamily family =
          std::vector{PriorFamily::kFull, PriorFamily::kTied, PriorFamily::kSemi}[i / 2 % 3];
      belief = build_prior({family, 1.0, {}}, 5, 2, chain.skeleton);
      const int steps = uniform_index(gen, 60);
      for (int t = 0; t < steps; ++t) {
        const ActionId a = uniform_index(gen, 2);
        const StateId next = env_step(chain, state, a, gen).next;
        belief = bayes_update(belief, state, a, next);
        state = next;
      }
      reward = chain.model.reward();
    }
    const auto seed = gen();
    Rng r0(seed), r1(seed), r2(seed), r3(seed);
    const auto base = act_exploit(state, belief, reward, solver, r0);
    const auto bolt = act_bolt(state, belief, reward, solver, r1, 0.0);
    const auto beb = act_beb(state, belief, reward, solver, r2, 0.0);
    const auto eps = act_eps_greedy(state, belief, reward, solver, r3, 0.0);
    for (const auto* other : {&bolt, &beb, &eps}) {
      if (other->maximizers != base.maximizers || other->action != base.action) ++mismatches;
    }
  }
  return {mismatches == 0,
          "100 belief states, " + std::to_string(mismatches) + " argmax-set mismatches"};
}

Verdict induced() {
  const auto start = Clock::now();
  const auto r = check_induced_inequality({50, 1, 3});
  const double elapsed = seconds_since(start);
  char msg[200];
  std::snprintf(msg, sizeof msg, "%d instances, %d comparisons, %d violations, min slack %.3e (%.2fs)",
                r.instances, r.comparisons, r.violations, r.min_slack, elapsed);
  return {r.instances >= 50 && r.violations == 0 && elapsed <= 300, msg};
}

Verdict theoretical() {
  const auto p = compute_theoretical_params(0.01, 0.05, 0.95, 5, 2);
  const auto p150 = compute_theoretical_params(0.01, 0.05, 0.95, 5, 2, 150.0);
  const bool ok = p.horizon >= 148 && p.horizon <= 150 &&
                  std::abs(p150.known_threshold - 1.8e8) <= 1e-9 * 1.8e8;
  char msg[200];
  std::snprintf(msg, sizeof msg, "H=%d, m(eta=150)=%.6g", p.horizon, p150.known_threshold);
  return {ok, msg};
}

// Replays one trial per Table configuration, checking every solve.
Verdict solver_checks(const Options& opt) {
  SolverConfig config;
  const auto single = value_iteration(testing::single_state(1.0, 0.95), config);
  bool ok = std::abs(single.values[0] - 20.0) <= 0.2 && single.values[0] <= 20.0;
  detail("single state: V=%.6f after %d sweeps", single.values[0], single.iterations);

  const Environment chain = make_chain(0.2);
  long solves = 0;
  double worst_residual = 0.0;
  double worst_value = 0.0;  // EXPLOIT and BOLT: rewards in [0,1]
  bool beb_bounded = true;
  for (PriorFamily prior : {PriorFamily::kFull, PriorFamily::kTied}) {
    for (const Row& row : kTable) {
      AgentConfig ac;
      ac.kind = row.kind;
      ac.set_parameter(row.param);
      Agent agent(ac, chain.model.reward());
      Belief belief = build_prior({prior, 1.0, {}}, 5, 2, chain.skeleton);
      Rng env_rng = make_stream(opt.seed, 0, Stream::kEnvironment);
      Rng agent_rng = make_stream(opt.seed, 0, Stream::kAgent);
      StateId state = chain.initial_state;
      for (int t = 0; t < 1000; ++t) {
        const PlanningModel model = agent.planning_model(belief);
        const Solution sol = agent.plan(belief);
        ++solves;
        const double residual = bellman_residual(model, sol.values, 0.95);
        worst_residual = std::max(worst_residual, residual);
        const double vmax = *std::max_element(sol.values.begin(), sol.values.end());
        if (row.kind == AgentKind::kBeb) {
          double rmax = 0.0;
          for (std::size_t k = 0; k < model.total_actions(); ++k)
            for (const auto& o : model.outcomes(k)) rmax = std::max(rmax, o.reward);
          beb_bounded = beb_bounded && vmax <= rmax / 0.05 + 1e-9;
        } else {
          worst_value = std::max(worst_value, vmax);
        }
        const auto choice = greedy_choice(model, sol, state, 2, agent_rng);
        const StateId next = env_step(chain, state, choice.action, env_rng).next;
        belief = bayes_update(belief, state, choice.action, next);
        state = next;
      }
    }
  }
  ok = ok && worst_residual < 0.01 && worst_value <= 20.0 && beb_bounded;
  char msg[240];
  std::snprintf(msg, sizeof msg,
                "V=%.4f; %ld solves, max residual %.3e, max V (reward in [0,1]) %.4f, BEB "
                "within its bonus bound: %s",
                single.values[0], solves, worst_residual, worst_value, beb_bounded ? "yes" : "no");
  return {ok, msg};
}

Verdict determinism(const Options& opt, const ExperimentResult& first) {
  const auto path_a = opt.out_dir / "exploit_run_a.csv";
  const auto path_b = opt.out_dir / "exploit_run_b.csv";
  write_file_atomic(path_a, trials_csv({first}));
  // Second run with a different worker count.
  auto config = chain_config(PriorFamily::kFull, AgentKind::kExploit, 0, 500, 1000, opt);
  config.jobs = opt.jobs == 1 ? 2 : 1;
  write_file_atomic(path_b, trials_csv({run_experiment(config)}));
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  };
  const bool same = slurp(path_a) == slurp(path_b);
  return {same, same ? "CSV files byte-identical" : "CSV files differ"};
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  opt.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  CLI::App app{"acceptance criteria"};
  app.add_option("--jobs", opt.jobs, "parallel trial workers");
  app.add_option("--out-dir", opt.out_dir, "directory for CSV artifacts");
  app.add_option("--seed", opt.seed, "master seed");
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(opt.out_dir);

  int failures = 0;
  auto run = [&](int id, const std::string& name, const std::function<Verdict()>& check) {
    Verdict v{false, ""};
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    report(id, name, v);
    failures += !v.pass;
  };

  ExperimentResult exploit_full;
  run(1, "Chain table reproduction", [&] { return table_reproduction(opt, exploit_full); });
  run(2, "parameter sweep shape", [&] { return sweep_shape(opt); });
  run(3, "optimism of the finite-horizon BOLT value", [] { return optimism(); });
  run(4, "zero-parameter reductions", [] { return reductions(); });
  run(5, "induced inequality", [] { return induced(); });
  run(6, "theoretical parameters", [] { return theoretical(); });
  run(7, "solver correctness", [&] { return solver_checks(opt); });
  run(8, "determinism", [&] {
    if (exploit_full.totals.empty()) return Verdict{false, "criterion 1 produced no EXPLOIT run"};
    return determinism(opt, exploit_full);
  });
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
