#include "bolt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>

#include "bolt/priors.hpp"
#include "bolt/rng.hpp"
#include "bolt/solver.hpp"

namespace bolt {

void check_budget(int n_states, int n_actions, int horizon, const OracleBudget& budget) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  const int pairs = n_states * n_actions;
  const double estimate = std::pow(static_cast<double>(pairs), horizon);
  if (horizon > budget.max_horizon || pairs > budget.max_pairs || estimate > budget.max_nodes) {
    throw BudgetExceeded("belief tree too large: |S||A|=" + std::to_string(pairs) +
                         ", H=" + std::to_string(horizon) + ", about " +
                         std::to_string(static_cast<long long>(estimate)) + " nodes (limits H<=" +
                         std::to_string(budget.max_horizon) + ", |S||A|<=" +
                         std::to_string(budget.max_pairs) + ")");
  }
}

double horizon_weight(double discount, int horizon) {
  if (discount == 1.0) return horizon;
  return (1.0 - std::pow(discount, horizon)) / (1.0 - discount);
}

namespace {

void check_reward(const Belief& belief, const Tensor3& reward) {
  if (reward.n_states() != belief.n_states() || reward.n_actions() != belief.n_actions()) {
    throw std::invalid_argument("reward tensor does not match the belief");
  }
}

void check_discount(double discount) {
  if (!(discount >= 0.0 && discount <= 1.0)) throw std::invalid_argument("discount in [0,1]");
}

// Optimal Bayesian values, memoized on (steps to go, state, counts).
class BayesTree {
 public:
  BayesTree(const Tensor3& reward, double discount, bool memoize)
      : reward_(reward), discount_(discount), memoize_(memoize) {}

  double value(StateId s, const Belief& b, int h) {
    if (h == 0) return 0.0;
    std::string key;
    if (memoize_) {
      key = make_key(s, b, h);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (ActionId a = 0; a < b.n_actions(); ++a) best = std::max(best, q(s, b, a, h));
    if (memoize_) memo_.emplace(std::move(key), best);
    return best;
  }

  double q(StateId s, const Belief& b, ActionId a, int h) {
    const auto row = expected_row(b, s, a);
    double total = 0.0;
    for (const auto& succ : b.classes().successors(s, a)) {
      const double p = row[succ.state];
      if (p <= 0.0) continue;
      const Belief next = b.with_extra_count(succ.cls, 1.0);
      total += p * (reward_(s, a, succ.state) + discount_ * value(succ.state, next, h - 1));
    }
    return total;
  }

 private:
  static std::string make_key(StateId s, const Belief& b, int h) {
    const auto counts = b.counts();
    std::string key(2 * sizeof(int) + counts.size_bytes(), '\0');
    std::memcpy(key.data(), &h, sizeof(int));
    std::memcpy(key.data() + sizeof(int), &s, sizeof(int));
    std::memcpy(key.data() + 2 * sizeof(int), counts.data(), counts.size_bytes());
    return key;
  }

  const Tensor3& reward_;
  double discount_;
  bool memoize_;
  std::unordered_map<std::string, double> memo_;
};

// Shared recursion for policy evaluation, mixed values and escape
// probabilities. `known` decides whether the exact branch applies.
struct PolicyWalker {
  const BeliefPolicy& policy;
  const Tensor3& reward;
  double discount;
  double threshold;                   // pairs with mass >= threshold are known
  const SubstituteModel* substitute;  // null: always exact
  double reward_max = 0.0;

  bool known(const Belief& b, StateId s, ActionId a) const {
    return substitute == nullptr || b.pair_mass(s, a) >= threshold;
  }

  double value(StateId s, const Belief& b, int h) {
    if (h == 0) return 0.0;
    const ActionId a = policy(s, b, h);
    if (a < 0 || a >= b.n_actions()) throw std::out_of_range("policy returned a bad action");
    double total = 0.0;
    if (known(b, s, a)) {
      const auto row = expected_row(b, s, a);
      for (const auto& succ : b.classes().successors(s, a)) {
        const double p = row[succ.state];
        if (p <= 0.0) continue;
        const double r = reward(s, a, succ.state);
        reward_max = std::max(reward_max, r);
        total += p * (r + discount * value(succ.state, b.with_extra_count(succ.cls, 1.0), h - 1));
      }
      return total;
    }
    const SubstituteRow row = (*substitute)(s, a, h);
    for (StateId next = 0; next < b.n_states(); ++next) {
      const double p = row.prob.at(next);
      if (p <= 0.0) continue;
      const double r = row.reward.at(next);
      reward_max = std::max(reward_max, r);
      const ClassId cls = b.classes().at(s, a, next);
      // Monitored belief; transitions the prior rules out leave it unchanged.
      const Belief monitored = cls == kImpossible ? b : b.with_extra_count(cls, 1.0);
      total += p * (r + discount * value(next, monitored, h - 1));
    }
    return total;
  }

  double escape(StateId s, const Belief& b, int h) {
    if (h == 0) return 0.0;
    const ActionId a = policy(s, b, h);
    if (b.pair_mass(s, a) < threshold) return 1.0;
    const auto row = expected_row(b, s, a);
    double total = 0.0;
    for (const auto& succ : b.classes().successors(s, a)) {
      const double p = row[succ.state];
      if (p <= 0.0) continue;
      total += p * escape(succ.state, b.with_extra_count(succ.cls, 1.0), h - 1);
    }
    return total;
  }
};

double backup(const PlanningModel& model, std::size_t k, const std::vector<double>& values,
              double discount) {
  double total = 0.0;
  for (const Outcome& o : model.outcomes(k)) {
    total += o.prob * (o.reward + discount * values[o.next]);
  }
  return total;
}

}  // namespace

double bayes_optimal_value(const BeliefState& node, int horizon, const Tensor3& reward,
                           double discount, const OracleBudget& budget, bool memoize) {
  check_budget(node.belief.n_states(), node.belief.n_actions(), horizon, budget);
  check_reward(node.belief, reward);
  check_discount(discount);
  BayesTree tree(reward, discount, memoize);
  return tree.value(node.state, node.belief, horizon);
}

double bayes_optimal_q(const BeliefState& node, ActionId action, int horizon,
                       const Tensor3& reward, double discount, const OracleBudget& budget) {
  check_budget(node.belief.n_states(), node.belief.n_actions(), horizon, budget);
  check_reward(node.belief, reward);
  check_discount(discount);
  if (horizon < 1) throw std::invalid_argument("Q needs a horizon of at least 1");
  BayesTree tree(reward, discount, true);
  return tree.q(node.state, node.belief, action, horizon);
}

ActionId bayes_optimal_action(const BeliefState& node, int horizon, const Tensor3& reward,
                              double discount, const OracleBudget& budget) {
  check_budget(node.belief.n_states(), node.belief.n_actions(), horizon, budget);
  check_reward(node.belief, reward);
  check_discount(discount);
  if (horizon < 1) throw std::invalid_argument("action needs a horizon of at least 1");
  BayesTree tree(reward, discount, true);
  ActionId best_action = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (ActionId a = 0; a < node.belief.n_actions(); ++a) {
    const double q = tree.q(node.state, node.belief, a, horizon);
    if (q > best) {
      best = q;
      best_action = a;
    }
  }
  return best_action;
}

double bayes_policy_eval(const BeliefPolicy& policy, const BeliefState& node, int horizon,
                         const Tensor3& reward, double discount, const OracleBudget& budget) {
  check_budget(node.belief.n_states(), node.belief.n_actions(), horizon, budget);
  check_reward(node.belief, reward);
  check_discount(discount);
  PolicyWalker walker{policy, reward, discount, 0.0, nullptr};
  return walker.value(node.state, node.belief, horizon);
}

double bolt_finite_value(const BeliefState& node, int horizon, double eta, const Tensor3& reward,
                         double discount) {
  check_discount(discount);
  const PlanningModel model = build_bolt_mdp(node.belief, reward, eta);
  return finite_horizon(model, horizon, discount).values.at(node.state);
}

BoltFinitePolicy bolt_finite_policy(const Belief& belief, int horizon, double eta,
                                    const Tensor3& reward, double discount) {
  check_discount(discount);
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  const PlanningModel model = build_bolt_mdp(belief, reward, eta);
  const auto n = static_cast<std::size_t>(belief.n_states());
  BoltFinitePolicy out;
  out.values.assign(n, 0.0);
  std::vector<double> next(n);
  for (int h = 1; h <= horizon; ++h) {
    std::vector<BoltFinitePolicy::Choice> level(n);
    for (StateId s = 0; s < belief.n_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = model.first_action(s); k < model.last_action(s); ++k) {
        const double q = backup(model, k, out.values, discount);
        if (q > best) {
          best = q;
          level[s] = {model.action(k).base, model.action(k).target};
        }
      }
      next[s] = best;
    }
    out.values.swap(next);
    out.choices.push_back(std::move(level));
  }
  return out;
}

BeliefPolicy BoltFinitePolicy::as_policy() const {
  return [choices = choices](StateId s, const Belief&, int steps_to_go) {
    return choices.at(steps_to_go - 1).at(s).action;
  };
}

SubstituteModel bolt_substitute(const Belief& belief_t, const BoltFinitePolicy& policy,
                                double eta, const Tensor3& reward) {
  return [belief_t, policy, eta, reward](StateId s, ActionId a, int steps_to_go) {
    const auto choice = policy.at(s, steps_to_go);
    if (choice.action != a) {
      throw std::logic_error("substitute queried for an action the BOLT policy does not take");
    }
    SubstituteRow row;
    row.prob = bolt_transition(belief_t, s, a, choice.target, eta);
    const auto r = reward.row(s, a);
    row.reward.assign(r.begin(), r.end());
    return row;
  };
}

double mixed_value_eval(const BeliefPolicy& policy, const BeliefState& node, int horizon,
                        double known_threshold, const SubstituteModel& substitute,
                        const Tensor3& reward, double discount, const OracleBudget& budget) {
  check_budget(node.belief.n_states(), node.belief.n_actions(), horizon, budget);
  check_reward(node.belief, reward);
  check_discount(discount);
  PolicyWalker walker{policy, reward, discount, known_threshold, &substitute};
  return walker.value(node.state, node.belief, horizon);
}

double escape_probability(const BeliefPolicy& policy, const BeliefState& node, int horizon,
                          double known_threshold, const OracleBudget& budget) {
  check_budget(node.belief.n_states(), node.belief.n_actions(), horizon, budget);
  const Tensor3 no_reward(node.belief.n_states(), node.belief.n_actions());
  PolicyWalker walker{policy, no_reward, 1.0, known_threshold, nullptr};
  return walker.escape(node.state, node.belief, horizon);
}

InducedInequality induced_inequality(const BeliefPolicy& policy, const BeliefState& node,
                                     int horizon, double known_threshold,
                                     const SubstituteModel& substitute, const Tensor3& reward,
                                     double discount, const OracleBudget& budget) {
  check_budget(node.belief.n_states(), node.belief.n_actions(), horizon, budget);
  check_reward(node.belief, reward);
  check_discount(discount);
  InducedInequality out{};
  out.bayes_value = bayes_policy_eval(policy, node, horizon, reward, discount, budget);
  PolicyWalker walker{policy, reward, discount, known_threshold, &substitute};
  out.mixed_value = walker.value(node.state, node.belief, horizon);
  out.escape_prob = escape_probability(policy, node, horizon, known_threshold, budget);
  out.reward_max = std::max(walker.reward_max,
                            *std::max_element(reward.data().begin(), reward.data().end()));
  out.bound = out.mixed_value -
              horizon_weight(discount, horizon) * out.reward_max * out.escape_prob;
  return out;
}

namespace {

struct RandomInstance {
  Belief belief;
  Tensor3 reward;
  int horizon;
};

RandomInstance random_fdm_instance(Rng& rng, int max_horizon) {
  const int n_states = 2 + uniform_index(rng, 2);
  const int n_actions = 2 + uniform_index(rng, 2);
  const int horizon = 1 + uniform_index(rng, max_horizon);
  const Belief base = build_full(n_states, n_actions, 1.0);
  std::vector<double> counts(base.counts().begin(), base.counts().end());
  // Half the instances look like posteriors (integer counts), half use
  // arbitrary positive reals.
  const bool integer_counts = uniform_index(rng, 2) == 0;
  for (double& c : counts) {
    c = integer_counts ? 1.0 + uniform_index(rng, 5) : 0.1 + 4.9 * uniform01(rng);
  }
  Tensor3 reward(n_states, n_actions);
  for (StateId s = 0; s < n_states; ++s) {
    for (ActionId a = 0; a < n_actions; ++a) {
      for (double& r : reward.row(s, a)) r = uniform01(rng);
    }
  }
  return {Belief(base.class_map_ptr(), std::move(counts)), std::move(reward), horizon};
}

}  // namespace

OptimismReport check_optimism(const RandomCheckConfig& config) {
  Rng rng(derive_seed(config.seed, 0, Stream::kAgent));
  OptimismReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < config.instances; ++i) {
    const RandomInstance inst = random_fdm_instance(rng, config.max_horizon);
    const double eta = inst.horizon;
    const auto bolt = finite_horizon(build_bolt_mdp(inst.belief, inst.reward, eta), inst.horizon,
                                     1.0);
    BayesTree tree(inst.reward, 1.0, true);
    for (StateId s = 0; s < inst.belief.n_states(); ++s) {
      const double bayes = tree.value(s, inst.belief, inst.horizon);
      const double slack = bolt.values[s] - bayes;
      report.min_slack = std::min(report.min_slack, slack);
      if (slack < -kExactTolerance) ++report.violations;
      ++report.comparisons;
    }
    ++report.instances;
  }
  return report;
}

InducedReport check_induced_inequality(const RandomCheckConfig& config) {
  Rng rng(derive_seed(config.seed, 1, Stream::kAgent));
  constexpr double kDiscounts[] = {0.5, 0.9, 0.95, 1.0};
  InducedReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < config.instances; ++i) {
    const RandomInstance inst = random_fdm_instance(rng, config.max_horizon);
    const double discount = kDiscounts[uniform_index(rng, 4)];
    const double eta = inst.horizon;
    const auto bolt = bolt_finite_policy(inst.belief, inst.horizon, eta, inst.reward, discount);
    const auto policy = bolt.as_policy();
    const auto substitute = bolt_substitute(inst.belief, bolt, eta, inst.reward);

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (StateId s = 0; s < inst.belief.n_states(); ++s) {
      for (ActionId a = 0; a < inst.belief.n_actions(); ++a) {
        lo = std::min(lo, inst.belief.pair_mass(s, a));
        hi = std::max(hi, inst.belief.pair_mass(s, a));
      }
    }
    const double thresholds[] = {0.0, lo + (hi - lo) * uniform01(rng), hi + 1.0,
                                 std::numeric_limits<double>::infinity()};
    for (double m : thresholds) {
      for (StateId s = 0; s < inst.belief.n_states(); ++s) {
        const auto check = induced_inequality(policy, {s, inst.belief}, inst.horizon, m,
                                              substitute, inst.reward, discount);
        report.min_slack = std::min(report.min_slack, check.slack());
        if (check.slack() < -kExactTolerance) ++report.violations;
        ++report.comparisons;
      }
    }
    ++report.instances;
  }
  return report;
}

}  // namespace bolt
