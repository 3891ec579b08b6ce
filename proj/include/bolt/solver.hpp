#pragma once

// Discounted value iteration over tabular planning models. A planning model
// is a list of actions per state, each with a sparse outcome row; this covers
// both plain MDPs and the augmented (action, target-state) space of BOLT.

#include <optional>
#include <span>
#include <vector>

#include "bolt/core.hpp"

namespace bolt {

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct Outcome {
  StateId next;
  double prob;
  double reward;
};

/// Base action plus optional optimistic target state (kNoTarget for plain
/// actions).
struct PlanAction {
  static constexpr StateId kNoTarget = -1;
  ActionId base;
  StateId target;
};

/// Flat storage of per-state action lists with outcome rows. Built state by
/// state, in ascending order, through begin_state / add_action / add_outcome.
class PlanningModel {
 public:
  explicit PlanningModel(int n_states);

  int n_states() const { return n_states_; }

  void begin_state(StateId s);
  void add_action(ActionId base, StateId target = PlanAction::kNoTarget);
  void add_outcome(StateId next, double prob, double reward);

  /// Range [first, last) of global action indices of state s.
  std::size_t first_action(StateId s) const { return state_begin_[s]; }
  std::size_t last_action(StateId s) const { return state_begin_[s + 1]; }
  std::size_t n_actions(StateId s) const { return last_action(s) - first_action(s); }
  std::size_t total_actions() const { return actions_.size(); }

  const PlanAction& action(std::size_t index) const { return actions_[index]; }
  std::span<const Outcome> outcomes(std::size_t action_index) const {
    return {outcomes_.data() + outcome_begin_[action_index],
            outcome_begin_[action_index + 1] - outcome_begin_[action_index]};
  }

  /// Throws std::logic_error if some state was never started or has no action.
  void finish();
  bool finished() const { return finished_; }

 private:
  int n_states_;
  bool finished_ = false;
  StateId current_ = -1;
  std::vector<std::size_t> state_begin_;
  std::vector<PlanAction> actions_;
  std::vector<std::size_t> outcome_begin_;
  std::vector<Outcome> outcomes_;
};

struct SolverConfig {
  double discount = 0.95;
  double stop_eps = 0.01;
  int max_iters = 10000;
  std::optional<std::vector<double>> warm_start;
};

/// Output of a solve. q holds, per state, one entry per planning action in
/// the model's order.
struct Solution {
  std::vector<double> values;
  std::vector<std::vector<double>> q;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residuals;  // max change of each sweep
};

/// Gauss-Seidel sweeps in ascending state order until the largest change of
/// a sweep falls below stop_eps. Starts from warm_start or zero.
Solution value_iteration(const PlanningModel& model, const SolverConfig& config);

/// Same, on a dense MDP; config.discount is used, not mdp.discount().
Solution value_iteration(const TabularMdp& mdp, const SolverConfig& config);

/// Exactly `horizon` synchronous backups starting from V = 0. Accepts
/// discount 1.
Solution finite_horizon(const PlanningModel& model, int horizon, double discount);

/// max_s |B(V)(s) - V(s)| with B the Jacobi Bellman optimality operator.
double bellman_residual(const PlanningModel& model, std::span<const double> values,
                        double discount);

PlanningModel to_planning_model(const TabularMdp& mdp);
PlanningModel to_planning_model(const Tensor3& transition, const Tensor3& reward);

/// Expected-model MDP. `pair_bonus`, when given, is added to every reward of
/// (s, a) and is indexed s * n_actions + a.
PlanningModel build_expected_mdp(const Belief& belief, const Tensor3& reward,
                                 std::span<const double> pair_bonus = {});

/// Augmented MDP over (a, sigma) for every possible successor sigma, with
/// rows from bolt_transition and rewards R(s, a, s').
PlanningModel build_bolt_mdp(const Belief& belief, const Tensor3& reward, double eta);

/// value_iteration on build_expected_mdp(belief, reward).
Solution solve_expected(const Belief& belief, const Tensor3& reward, const SolverConfig& config);

}  // namespace bolt
