#include "bolt/agents.hpp"

#include <algorithm>
#include <limits>

namespace bolt {

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kExploit: return "exploit";
    case AgentKind::kEpsGreedy: return "eps-greedy";
    case AgentKind::kBeb: return "beb";
    case AgentKind::kBolt: return "bolt";
  }
  return "unknown";
}

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "exploit") return AgentKind::kExploit;
  if (name == "eps-greedy" || name == "eps_greedy") return AgentKind::kEpsGreedy;
  if (name == "beb") return AgentKind::kBeb;
  if (name == "bolt") return AgentKind::kBolt;
  throw std::invalid_argument("unknown agent '" + name + "'");
}

std::string AgentConfig::parameter_name() const {
  switch (kind) {
    case AgentKind::kExploit: return "none";
    case AgentKind::kEpsGreedy: return "eps";
    case AgentKind::kBeb: return "beta";
    case AgentKind::kBolt: return "eta";
  }
  return "none";
}

double AgentConfig::parameter_value() const {
  switch (kind) {
    case AgentKind::kExploit: return 0.0;
    case AgentKind::kEpsGreedy: return eps_explore;
    case AgentKind::kBeb: return beta;
    case AgentKind::kBolt: return eta;
  }
  return 0.0;
}

void AgentConfig::set_parameter(double value) {
  switch (kind) {
    case AgentKind::kExploit: break;
    case AgentKind::kEpsGreedy: eps_explore = value; break;
    case AgentKind::kBeb: beta = value; break;
    case AgentKind::kBolt: eta = value; break;
  }
}

double beb_bonus(double beta, double pair_mass) { return beta / (1.0 + pair_mass); }

namespace {

void check_parameters(const AgentConfig& config) {
  switch (config.kind) {
    case AgentKind::kExploit: break;
    case AgentKind::kEpsGreedy:
      if (!(config.eps_explore >= 0.0 && config.eps_explore <= 1.0)) {
        throw std::invalid_argument("eps_explore must lie in [0,1]");
      }
      break;
    case AgentKind::kBeb:
      if (!(config.beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
      break;
    case AgentKind::kBolt:
      if (!(config.eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
      break;
  }
}

PlanningModel model_for(const AgentConfig& config, const Belief& belief, const Tensor3& reward) {
  switch (config.kind) {
    case AgentKind::kBolt:
      return build_bolt_mdp(belief, reward, config.eta);
    case AgentKind::kBeb: {
      std::vector<double> bonus(static_cast<std::size_t>(belief.n_states()) * belief.n_actions());
      for (StateId s = 0; s < belief.n_states(); ++s) {
        for (ActionId a = 0; a < belief.n_actions(); ++a) {
          bonus[s * belief.n_actions() + a] = beb_bonus(config.beta, belief.pair_mass(s, a));
        }
      }
      return build_expected_mdp(belief, reward, bonus);
    }
    case AgentKind::kExploit:
    case AgentKind::kEpsGreedy:
      break;
  }
  return build_expected_mdp(belief, reward);
}

ActionChoice decide(const AgentConfig& config, const PlanningModel& model,
                    const Solution& solution, StateId state, int n_actions, Rng& rng) {
  if (config.kind == AgentKind::kEpsGreedy && config.eps_explore > 0.0 &&
      uniform01(rng) < config.eps_explore) {
    ActionChoice choice = summarize_q(model, solution, state, n_actions);
    choice.action = uniform_index(rng, n_actions);
    choice.explored = true;
    return choice;
  }
  return greedy_choice(model, solution, state, n_actions, rng);
}

}  // namespace

ActionChoice summarize_q(const PlanningModel& model, const Solution& solution, StateId state,
                         int n_actions) {
  ActionChoice choice;
  choice.q_row = solution.q.at(state);
  choice.action_values.assign(n_actions, -std::numeric_limits<double>::infinity());
  const std::size_t first = model.first_action(state);
  for (std::size_t k = 0; k < choice.q_row.size(); ++k) {
    const ActionId base = model.action(first + k).base;
    choice.action_values[base] = std::max(choice.action_values[base], choice.q_row[k]);
  }
  const double best = *std::max_element(choice.action_values.begin(), choice.action_values.end());
  for (ActionId a = 0; a < n_actions; ++a) {
    if (choice.action_values[a] == best) choice.maximizers.push_back(a);
  }
  choice.tie_count = static_cast<int>(choice.maximizers.size());
  choice.action = choice.maximizers.front();
  return choice;
}

ActionChoice greedy_choice(const PlanningModel& model, const Solution& solution, StateId state,
                           int n_actions, Rng& rng) {
  ActionChoice choice = summarize_q(model, solution, state, n_actions);
  if (choice.tie_count == 1) return choice;
  // Uniform over maximizing planning actions (augmented pairs for BOLT),
  // then projected to the base action.
  const double best = choice.action_values[choice.maximizers.front()];
  std::vector<ActionId> tied;
  const std::size_t first = model.first_action(state);
  for (std::size_t k = 0; k < choice.q_row.size(); ++k) {
    if (choice.q_row[k] == best) tied.push_back(model.action(first + k).base);
  }
  choice.action = tied[uniform_index(rng, static_cast<int>(tied.size()))];
  return choice;
}

Agent::Agent(AgentConfig config, Tensor3 reward)
    : config_(std::move(config)), reward_(std::move(reward)) {
  check_parameters(config_);
}

PlanningModel Agent::planning_model(const Belief& belief) const {
  return model_for(config_, belief, reward_);
}

Solution Agent::plan(const Belief& belief) { return solve(planning_model(belief)); }

Solution Agent::solve(const PlanningModel& model) {
  SolverConfig solver = config_.solver;
  if (config_.warm_start && last_values_) solver.warm_start = last_values_;
  Solution solution = value_iteration(model, solver);
  if (config_.warm_start) last_values_ = solution.values;
  return solution;
}

ActionChoice Agent::act(StateId state, const Belief& belief, Rng& rng) {
  if (state < 0 || state >= belief.n_states()) throw std::out_of_range("state out of range");
  const PlanningModel model = planning_model(belief);
  const Solution solution = solve(model);
  return decide(config_, model, solution, state, belief.n_actions(), rng);
}

namespace {

ActionChoice act_once(AgentConfig config, StateId state, const Belief& belief,
                      const Tensor3& reward, Rng& rng) {
  config.warm_start = false;
  Agent agent(std::move(config), reward);
  return agent.act(state, belief, rng);
}

}  // namespace

ActionChoice act_exploit(StateId state, const Belief& belief, const Tensor3& reward,
                         const SolverConfig& solver, Rng& rng) {
  return act_once({AgentKind::kExploit, 0, 0, 0, solver, false}, state, belief, reward, rng);
}

ActionChoice act_eps_greedy(StateId state, const Belief& belief, const Tensor3& reward,
                            const SolverConfig& solver, Rng& rng, double eps_explore) {
  return act_once({AgentKind::kEpsGreedy, 0, 0, eps_explore, solver, false}, state, belief,
                  reward, rng);
}

ActionChoice act_beb(StateId state, const Belief& belief, const Tensor3& reward,
                     const SolverConfig& solver, Rng& rng, double beta) {
  return act_once({AgentKind::kBeb, 0, beta, 0, solver, false}, state, belief, reward, rng);
}

ActionChoice act_bolt(StateId state, const Belief& belief, const Tensor3& reward,
                      const SolverConfig& solver, Rng& rng, double eta) {
  return act_once({AgentKind::kBolt, eta, 0, 0, solver, false}, state, belief, reward, rng);
}

EpisodeResult run_episode(const Environment& env, const AgentConfig& config,
                          const Belief& prior, int horizon, EpisodeStreams& streams) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (prior.n_states() != env.model.n_states() || prior.n_actions() != env.model.n_actions()) {
    throw std::invalid_argument("prior dimensions differ from the environment");
  }
  Agent agent(config, env.model.reward());
  EpisodeResult result;
  result.trajectory.reserve(static_cast<std::size_t>(horizon));
  Belief belief = prior;
  StateId state = env.initial_state;
  for (int t = 0; t < horizon; ++t) {
    const ActionChoice choice = agent.act(state, belief, streams.agent);
    const Step step = env_step(env, state, choice.action, streams.env);
    belief = bayes_update(belief, state, choice.action, step.next);
    const double reported = env.report(step.reward);
    result.trajectory.push_back({state, choice.action, step.next, reported});
    result.total_reward += reported;
    state = step.next;
  }
  return result;
}

EpisodeResult run_episode(const Environment& env, const AgentConfig& config,
                          const PriorSpec& prior, int horizon, EpisodeStreams& streams) {
  return run_episode(env, config,
                     build_prior(prior, env.model.n_states(), env.model.n_actions(), env.skeleton),
                     horizon, streams);
}

}  // namespace bolt
