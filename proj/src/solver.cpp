#include "bolt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bolt {

PlanningModel::PlanningModel(int n_states) : n_states_(n_states) {
  if (n_states < 1) throw std::invalid_argument("planning model needs a state");
  state_begin_.reserve(static_cast<std::size_t>(n_states) + 1);
  outcome_begin_.push_back(0);
}

void PlanningModel::begin_state(StateId s) {
  if (finished_) throw std::logic_error("planning model already finished");
  if (s != current_ + 1 || s >= n_states_) {
    throw std::logic_error("states must be added in ascending order");
  }
  current_ = s;
  state_begin_.push_back(actions_.size());
}

void PlanningModel::add_action(ActionId base, StateId target) {
  if (current_ < 0) throw std::logic_error("add_action before begin_state");
  actions_.push_back({base, target});
  outcome_begin_.push_back(outcomes_.size());
}

void PlanningModel::add_outcome(StateId next, double prob, double reward) {
  if (actions_.empty()) throw std::logic_error("add_outcome before add_action");
  if (next < 0 || next >= n_states_) throw std::out_of_range("outcome state out of range");
  outcomes_.push_back({next, prob, reward});
  outcome_begin_.back() = outcomes_.size();
}

void PlanningModel::finish() {
  if (current_ != n_states_ - 1) throw std::logic_error("planning model is missing states");
  state_begin_.push_back(actions_.size());
  for (StateId s = 0; s < n_states_; ++s) {
    if (n_actions(s) == 0) {
      throw std::logic_error("state " + std::to_string(s) + " has no action");
    }
  }
  finished_ = true;
}

namespace {

double backup(const PlanningModel& model, std::size_t action, std::span<const double> values,
              double discount) {
  double total = 0.0;
  for (const Outcome& o : model.outcomes(action)) {
    total += o.prob * (o.reward + discount * values[o.next]);
  }
  return total;
}

void check_finished(const PlanningModel& model) {
  if (!model.finished()) throw std::logic_error("planning model was not finished");
}

}  // namespace

Solution value_iteration(const PlanningModel& model, const SolverConfig& config) {
  if (!(config.discount >= 0.0 && config.discount < 1.0)) {
    throw std::invalid_argument("value iteration needs a discount in [0,1)");
  }
  if (!(config.stop_eps > 0.0)) throw std::invalid_argument("stop_eps must be positive");
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  check_finished(model);

  const auto n = static_cast<std::size_t>(model.n_states());
  Solution out;
  if (config.warm_start) {
    if (config.warm_start->size() != n) throw std::invalid_argument("warm start has wrong size");
    out.values = *config.warm_start;
  } else {
    out.values.assign(n, 0.0);
  }
  out.q.resize(n);
  for (StateId s = 0; s < model.n_states(); ++s) out.q[s].resize(model.n_actions(s));

  double delta = std::numeric_limits<double>::infinity();
  while (out.iterations < config.max_iters) {
    delta = 0.0;
    for (StateId s = 0; s < model.n_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      auto& q_row = out.q[s];
      const std::size_t first = model.first_action(s);
      for (std::size_t i = first; i < model.last_action(s); ++i) {
        const double q = backup(model, i, out.values, config.discount);
        q_row[i - first] = q;
        best = std::max(best, q);
      }
      delta = std::max(delta, std::abs(best - out.values[s]));
      out.values[s] = best;
    }
    ++out.iterations;
    out.residuals.push_back(delta);
    if (delta < config.stop_eps) {
      out.residual = delta;
      return out;
    }
  }
  throw NonConvergence("value iteration hit max_iters=" + std::to_string(config.max_iters) +
                           " with residual " + std::to_string(delta),
                       delta);
}

Solution value_iteration(const TabularMdp& mdp, const SolverConfig& config) {
  return value_iteration(to_planning_model(mdp), config);
}

Solution finite_horizon(const PlanningModel& model, int horizon, double discount) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  if (!(discount >= 0.0 && discount <= 1.0)) throw std::invalid_argument("discount in [0,1]");
  check_finished(model);
  const auto n = static_cast<std::size_t>(model.n_states());
  Solution out;
  out.values.assign(n, 0.0);
  out.q.resize(n);
  for (StateId s = 0; s < model.n_states(); ++s) out.q[s].assign(model.n_actions(s), 0.0);
  std::vector<double> next(n);
  for (int i = 0; i < horizon; ++i) {
    double delta = 0.0;
    for (StateId s = 0; s < model.n_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      const std::size_t first = model.first_action(s);
      for (std::size_t k = first; k < model.last_action(s); ++k) {
        const double q = backup(model, k, out.values, discount);
        out.q[s][k - first] = q;
        best = std::max(best, q);
      }
      next[s] = best;
      delta = std::max(delta, std::abs(best - out.values[s]));
    }
    out.values.swap(next);
    out.residuals.push_back(delta);
    out.residual = delta;
    ++out.iterations;
  }
  return out;
}

double bellman_residual(const PlanningModel& model, std::span<const double> values,
                        double discount) {
  check_finished(model);
  double worst = 0.0;
  for (StateId s = 0; s < model.n_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = model.first_action(s); k < model.last_action(s); ++k) {
      best = std::max(best, backup(model, k, values, discount));
    }
    worst = std::max(worst, std::abs(best - values[s]));
  }
  return worst;
}

PlanningModel to_planning_model(const Tensor3& transition, const Tensor3& reward) {
  PlanningModel model(transition.n_states());
  for (StateId s = 0; s < transition.n_states(); ++s) {
    model.begin_state(s);
    for (ActionId a = 0; a < transition.n_actions(); ++a) {
      model.add_action(a);
      for (StateId next = 0; next < transition.n_states(); ++next) {
        const double p = transition(s, a, next);
        if (p > 0.0) model.add_outcome(next, p, reward(s, a, next));
      }
    }
  }
  model.finish();
  return model;
}

PlanningModel to_planning_model(const TabularMdp& mdp) {
  return to_planning_model(mdp.transition(), mdp.reward());
}

PlanningModel build_expected_mdp(const Belief& belief, const Tensor3& reward,
                                 std::span<const double> pair_bonus) {
  const int n_actions = belief.n_actions();
  if (reward.n_states() != belief.n_states() || reward.n_actions() != n_actions) {
    throw std::invalid_argument("reward tensor does not match the belief");
  }
  if (!pair_bonus.empty() &&
      pair_bonus.size() != static_cast<std::size_t>(belief.n_states()) * n_actions) {
    throw std::invalid_argument("pair bonus has wrong size");
  }
  PlanningModel model(belief.n_states());
  for (StateId s = 0; s < belief.n_states(); ++s) {
    model.begin_state(s);
    for (ActionId a = 0; a < n_actions; ++a) {
      model.add_action(a);
      const double bonus = pair_bonus.empty() ? 0.0 : pair_bonus[s * n_actions + a];
      const auto row = expected_row(belief, s, a);
      for (const auto& succ : belief.classes().successors(s, a)) {
        model.add_outcome(succ.state, row[succ.state], reward(s, a, succ.state) + bonus);
      }
    }
  }
  model.finish();
  return model;
}

PlanningModel build_bolt_mdp(const Belief& belief, const Tensor3& reward, double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  if (reward.n_states() != belief.n_states() || reward.n_actions() != belief.n_actions()) {
    throw std::invalid_argument("reward tensor does not match the belief");
  }
  PlanningModel model(belief.n_states());
  for (StateId s = 0; s < belief.n_states(); ++s) {
    model.begin_state(s);
    for (ActionId a = 0; a < belief.n_actions(); ++a) {
      const auto& successors = belief.classes().successors(s, a);
      for (const auto& target : successors) {
        model.add_action(a, target.state);
        const auto row = belief.boosted_row(s, a, target.cls, eta);
        for (const auto& succ : successors) {
          model.add_outcome(succ.state, row[succ.state], reward(s, a, succ.state));
        }
      }
    }
  }
  model.finish();
  return model;
}

Solution solve_expected(const Belief& belief, const Tensor3& reward, const SolverConfig& config) {
  return value_iteration(build_expected_mdp(belief, reward), config);
}

}  // namespace bolt
