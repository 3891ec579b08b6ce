#pragma once

// Decision makers that replan every step against the current belief:
// EXPLOIT, epsilon-greedy EXPLOIT, BEB and BOLT.

#include <optional>
#include <string>
#include <vector>

#include "bolt/core.hpp"
#include "bolt/envs.hpp"
#include "bolt/priors.hpp"
#include "bolt/rng.hpp"
#include "bolt/solver.hpp"

namespace bolt {

enum class AgentKind { kExploit, kEpsGreedy, kBeb, kBolt };

std::string to_string(AgentKind kind);
/// Accepts exploit, eps-greedy (or eps_greedy), beb, bolt.
AgentKind parse_agent_kind(const std::string& name);

struct AgentConfig {
  AgentKind kind = AgentKind::kExploit;
  double eta = 0.0;          // bolt
  double beta = 0.0;         // beb
  double eps_explore = 0.0;  // eps-greedy
  SolverConfig solver;
  bool warm_start = true;    // reuse the previous step's values

  /// Name and value of the parameter this kind consumes ("none" / 0 for
  /// EXPLOIT).
  std::string parameter_name() const;
  double parameter_value() const;
  void set_parameter(double value);
};

struct ActionChoice {
  ActionId action = 0;
  /// Planning Q values at the state: one per base action, or one per
  /// (action, target) pair for BOLT.
  std::vector<double> q_row;
  /// Best planning value of each base action.
  std::vector<double> action_values;
  /// Base actions attaining the maximum, ascending.
  std::vector<ActionId> maximizers;
  int tie_count = 0;
  bool explored = false;  // eps-greedy random draw
};

/// BEB reward bonus for a pair with total pseudo-count mass `pair_mass`.
double beb_bonus(double beta, double pair_mass);

/// Replanning agent. Holds only its warm-start cache; beliefs are taken by
/// const reference and never changed.
class Agent {
 public:
  Agent(AgentConfig config, Tensor3 reward);

  const AgentConfig& config() const { return config_; }

  /// The MDP this agent solves for `belief`.
  PlanningModel planning_model(const Belief& belief) const;

  /// Solves planning_model(belief), warm-started when enabled.
  Solution plan(const Belief& belief);

  ActionChoice act(StateId state, const Belief& belief, Rng& rng);

  void reset() { last_values_.reset(); }

 private:
  Solution solve(const PlanningModel& model);

  AgentConfig config_;
  Tensor3 reward_;
  std::optional<std::vector<double>> last_values_;
};

/// Fills q_row, action_values and maximizers; action = first maximizer.
ActionChoice summarize_q(const PlanningModel& model, const Solution& solution, StateId state,
                         int n_actions);

/// Greedy choice from one state's Q row; ties uniform over the maximizing
/// planning actions (augmented pairs for BOLT). Draws only when several base
/// actions are tied, so a single maximizing base action consumes no randomness.
ActionChoice greedy_choice(const PlanningModel& model, const Solution& solution, StateId state,
                           int n_actions, Rng& rng);

// Stateless single-decision forms (cold-started solves).
ActionChoice act_exploit(StateId state, const Belief& belief, const Tensor3& reward,
                         const SolverConfig& solver, Rng& rng);
ActionChoice act_eps_greedy(StateId state, const Belief& belief, const Tensor3& reward,
                            const SolverConfig& solver, Rng& rng, double eps_explore);
ActionChoice act_beb(StateId state, const Belief& belief, const Tensor3& reward,
                     const SolverConfig& solver, Rng& rng, double beta);
ActionChoice act_bolt(StateId state, const Belief& belief, const Tensor3& reward,
                      const SolverConfig& solver, Rng& rng, double eta);

struct TransitionRecord {
  StateId state;
  ActionId action;
  StateId next;
  double reward;  // reported scale
};

struct EpisodeResult {
  std::vector<TransitionRecord> trajectory;
  double total_reward = 0.0;  // undiscounted, reported scale
};

/// Per-trial random streams: environment noise and agent tie-breaking /
/// exploration are kept apart so paired runs share environment noise.
struct EpisodeStreams {
  Rng env;
  Rng agent;
};

/// act -> step -> bayes_update, `horizon` times, from env.initial_state.
/// Throws ImpossibleTransition when the environment produces a transition
/// the prior forbids.
EpisodeResult run_episode(const Environment& env, const AgentConfig& config,
                          const Belief& prior, int horizon, EpisodeStreams& streams);
EpisodeResult run_episode(const Environment& env, const AgentConfig& config,
                          const PriorSpec& prior, int horizon, EpisodeStreams& streams);

}  // namespace bolt
