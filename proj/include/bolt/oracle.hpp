#pragma once

// Exact finite-horizon Bayes-adaptive computations by belief-tree expansion.
// Exponential in the horizon; meant for small instances used as ground
// truth (optimism of BOLT, the induced inequality of mixed value functions).

#include <cstdint>
#include <functional>
#include <vector>

#include "bolt/core.hpp"

namespace bolt {

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Expansion limits, checked before any node is expanded. The node estimate
/// is (|S||A|)^H.
struct OracleBudget {
  int max_horizon = 5;
  int max_pairs = 12;
  double max_nodes = 248832.0;  // 12^5
};

/// Throws BudgetExceeded if the instance is too large.
void check_budget(int n_states, int n_actions, int horizon, const OracleBudget& budget);

/// Policy over belief-states; `steps_to_go` >= 1 is the remaining horizon.
using BeliefPolicy = std::function<ActionId(StateId, const Belief&, int steps_to_go)>;

/// Optimal H-step Bayesian value: max_a sum_s' E[Pr(s'|s,a)|b] (R + gamma V(s', b')).
double bayes_optimal_value(const BeliefState& node, int horizon, const Tensor3& reward,
                           double discount, const OracleBudget& budget = {},
                           bool memoize = true);

/// Bayesian Q value of action a at the node with `horizon` steps to go.
double bayes_optimal_q(const BeliefState& node, ActionId action, int horizon,
                       const Tensor3& reward, double discount, const OracleBudget& budget = {});

/// Lowest-index maximizer of bayes_optimal_q.
ActionId bayes_optimal_action(const BeliefState& node, int horizon, const Tensor3& reward,
                              double discount, const OracleBudget& budget = {});

/// Bayesian evaluation of a policy over the belief tree.
double bayes_policy_eval(const BeliefPolicy& policy, const BeliefState& node, int horizon,
                         const Tensor3& reward, double discount,
                         const OracleBudget& budget = {});

/// H synchronous backups on the frozen-belief BOLT model; V_H(s).
double bolt_finite_value(const BeliefState& node, int horizon, double eta, const Tensor3& reward,
                         double discount);

/// Greedy policy of the frozen-belief BOLT model, per remaining horizon.
struct BoltFinitePolicy {
  struct Choice {
    ActionId action;
    StateId target;
  };
  // choices[h - 1][s] for h steps to go.
  std::vector<std::vector<Choice>> choices;
  std::vector<double> values;  // V_H

  Choice at(StateId s, int steps_to_go) const { return choices.at(steps_to_go - 1).at(s); }
  BeliefPolicy as_policy() const;
};

BoltFinitePolicy bolt_finite_policy(const Belief& belief, int horizon, double eta,
                                    const Tensor3& reward, double discount);

/// Transition row and rewards used by the mixed value function outside the
/// known set.
struct SubstituteRow {
  std::vector<double> prob;
  std::vector<double> reward;
};
using SubstituteModel = std::function<SubstituteRow(StateId, ActionId, int steps_to_go)>;

/// Frozen BOLT model at belief b_t: (a, sigma) with sigma from the policy.
SubstituteModel bolt_substitute(const Belief& belief_t, const BoltFinitePolicy& policy,
                                double eta, const Tensor3& reward);

/// Mixed value: exact Bayesian branch where the monitored pair mass is >= m,
/// substitute branch otherwise; beliefs are monitored along every branch.
double mixed_value_eval(const BeliefPolicy& policy, const BeliefState& node, int horizon,
                        double known_threshold, const SubstituteModel& substitute,
                        const Tensor3& reward, double discount,
                        const OracleBudget& budget = {});

/// Probability, under the Bayesian measure of following the policy, that a
/// pair outside the known set is generated within the horizon.
double escape_probability(const BeliefPolicy& policy, const BeliefState& node, int horizon,
                          double known_threshold, const OracleBudget& budget = {});

struct InducedInequality {
  double bayes_value;
  double mixed_value;
  double escape_prob;
  double reward_max;  // max of the substitute and true rewards
  double bound;       // mixed - (1 - gamma^H)/(1 - gamma) * reward_max * escape_prob
  double slack() const { return bayes_value - bound; }
};

InducedInequality induced_inequality(const BeliefPolicy& policy, const BeliefState& node,
                                     int horizon, double known_threshold,
                                     const SubstituteModel& substitute, const Tensor3& reward,
                                     double discount, const OracleBudget& budget = {});

/// sum_{i<H} gamma^i, i.e. (1 - gamma^H)/(1 - gamma), equal to H when gamma = 1.
double horizon_weight(double discount, int horizon);

// Randomized property checks over small FDM instances. A comparison is a
// violation when its slack is below -kExactTolerance (floating-point noise of
// the H <= 5 recursions is far smaller).

inline constexpr double kExactTolerance = 1e-9;

struct RandomCheckConfig {
  int instances = 200;
  std::uint64_t seed = 1;
  int max_horizon = 3;
};

struct OptimismReport {
  int instances = 0;
  int comparisons = 0;
  int violations = 0;
  double min_slack = 0.0;  // min over comparisons of V_BOLT - V_Bayes
};

/// |S|, |A| in {2, 3}, rewards U[0,1], H in {1..max_horizon}, eta = H,
/// gamma = 1, random counts; compares every start state.
OptimismReport check_optimism(const RandomCheckConfig& config);

struct InducedReport {
  int instances = 0;
  int comparisons = 0;
  int violations = 0;
  double min_slack = 0.0;
};

/// BOLT's finite-horizon policy with eta = H and its frozen model as the
/// substitute; thresholds m drawn around the instance's pair masses.
InducedReport check_induced_inequality(const RandomCheckConfig& config);

}  // namespace bolt
