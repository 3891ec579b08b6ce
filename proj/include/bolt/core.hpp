#pragma once

// Tabular MDPs, Dirichlet-style beliefs over transition models and the
// counter-based Bayes update.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bolt {

using StateId = int;
using ActionId = int;
using ClassId = int;

/// Marks an (s, a, s') triple that the prior rules out.
inline constexpr ClassId kImpossible = -1;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An observed or requested transition has no parameter class.
class ImpossibleTransition : public Error {
 public:
  using Error::Error;
};

/// Some state-action row has no probability mass to normalize.
class DegeneratePrior : public Error {
 public:
  using Error::Error;
};

/// Dense |S| x |A| x |S| array, indexed (s, a, s').
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int n_states, int n_actions, double fill = 0.0);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  double& operator()(StateId s, ActionId a, StateId next) {
    return data_[index(s, a, next)];
  }
  double operator()(StateId s, ActionId a, StateId next) const {
    return data_[index(s, a, next)];
  }

  std::span<double> row(StateId s, ActionId a) {
    return {data_.data() + index(s, a, 0), static_cast<std::size_t>(n_states_)};
  }
  std::span<const double> row(StateId s, ActionId a) const {
    return {data_.data() + index(s, a, 0), static_cast<std::size_t>(n_states_)};
  }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t index(StateId s, ActionId a, StateId next) const {
    return (static_cast<std::size_t>(s) * n_actions_ + a) * n_states_ + next;
  }

  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> data_;
};

/// Finite MDP <S, A, T, R> with discount. Rewards are normalized to [0, 1].
class TabularMdp {
 public:
  /// Throws std::invalid_argument if rows are not distributions, rewards
  /// leave [0, 1] or the discount is outside [0, 1).
  TabularMdp(Tensor3 transition, Tensor3 reward, double discount);

  int n_states() const { return transition_.n_states(); }
  int n_actions() const { return transition_.n_actions(); }
  const Tensor3& transition() const { return transition_; }
  const Tensor3& reward() const { return reward_; }
  double discount() const { return discount_; }

  bool operator==(const TabularMdp&) const = default;

 private:
  Tensor3 transition_;
  Tensor3 reward_;
  double discount_;
};

/// Tolerance on row sums of every transition tensor produced or accepted.
inline constexpr double kRowSumTolerance = 1e-9;

/// Checks the TabularMdp invariants on a transition tensor alone.
void validate_transition(const Tensor3& transition, double tolerance = kRowSumTolerance);

/// Immutable map from (s, a, s') to a parameter class. Shared between all
/// beliefs descending from one prior.
class ClassMap {
 public:
  struct Successor {
    StateId state;
    ClassId cls;
  };

  /// `table` is indexed like Tensor3, holding a class id or kImpossible.
  /// Throws DegeneratePrior if some (s, a) has no possible successor.
  ClassMap(int n_states, int n_actions, std::vector<ClassId> table);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int n_classes() const { return n_classes_; }

  ClassId at(StateId s, ActionId a, StateId next) const {
    return table_[(static_cast<std::size_t>(s) * n_actions_ + a) * n_states_ + next];
  }

  /// Possible successors of (s, a) in ascending state order.
  const std::vector<Successor>& successors(StateId s, ActionId a) const {
    return successors_[static_cast<std::size_t>(s) * n_actions_ + a];
  }

  /// Distinct classes reachable from (s, a), ascending.
  const std::vector<ClassId>& pair_classes(StateId s, ActionId a) const {
    return pair_classes_[static_cast<std::size_t>(s) * n_actions_ + a];
  }

  const std::vector<ClassId>& table() const { return table_; }

  bool operator==(const ClassMap& other) const { return table_ == other.table_; }

 private:
  int n_states_;
  int n_actions_;
  int n_classes_ = 0;
  std::vector<ClassId> table_;
  std::vector<std::vector<Successor>> successors_;
  std::vector<std::vector<ClassId>> pair_classes_;
};

/// Posterior over transition models: nonnegative pseudo-counts per class.
/// Value type; the class map is shared and never mutated.
class Belief {
 public:
  Belief(std::shared_ptr<const ClassMap> classes, std::vector<double> counts);

  int n_states() const { return classes_->n_states(); }
  int n_actions() const { return classes_->n_actions(); }
  int n_classes() const { return classes_->n_classes(); }

  const ClassMap& classes() const { return *classes_; }
  const std::shared_ptr<const ClassMap>& class_map_ptr() const { return classes_; }
  std::span<const double> counts() const { return counts_; }
  double count(ClassId cls) const { return counts_.at(static_cast<std::size_t>(cls)); }

  bool is_possible(StateId s, ActionId a, StateId next) const {
    return classes_->at(s, a, next) != kImpossible;
  }

  /// n(s, a): total count over the distinct classes reachable from (s, a).
  double pair_mass(StateId s, ActionId a) const;

  /// Posterior-mean row for (s, a) after adding `extra` pseudo-observations
  /// to class `boosted` (kImpossible for none). Throws DegeneratePrior.
  std::vector<double> boosted_row(StateId s, ActionId a, ClassId boosted, double extra) const;

  /// Returns a copy with `extra` added to one class count.
  Belief with_extra_count(ClassId cls, double extra) const;

  /// Same class map and counts.
  bool operator==(const Belief& other) const;

 private:
  std::shared_ptr<const ClassMap> classes_;
  std::vector<double> counts_;
};

/// Belief-state omega = (s, b).
struct BeliefState {
  StateId state;
  Belief belief;
};

/// Posterior after observing (s, a, next). The input is not modified.
/// Throws ImpossibleTransition if the triple has no class.
Belief bayes_update(const Belief& belief, StateId s, ActionId a, StateId next);

/// Posterior-mean transition tensor. Throws DegeneratePrior.
Tensor3 expected_model(const Belief& belief);

/// Posterior-mean row of a single (s, a).
std::vector<double> expected_row(const Belief& belief, StateId s, ActionId a);

/// Expected row of (s, a) after `eta` artificial observations of
/// (s, a, sigma). Throws ImpossibleTransition if sigma is not a possible
/// successor, std::invalid_argument if eta < 0.
std::vector<double> bolt_transition(const Belief& belief, StateId s, ActionId a, StateId sigma,
                                    double eta);

}  // namespace bolt
