#include "bolt/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bolt {

namespace {

std::string triple_name(StateId s, ActionId a, StateId next) {
  std::ostringstream out;
  out << "(s=" << s << ", a=" << a << ", s'=" << next << ")";
  return out.str();
}

void check_dims(int n_states, int n_actions) {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("need at least one state and one action");
  }
}

}  // namespace

Tensor3::Tensor3(int n_states, int n_actions, double fill)
    : n_states_(n_states), n_actions_(n_actions) {
  check_dims(n_states, n_actions);
  data_.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, fill);
}

void validate_transition(const Tensor3& transition, double tolerance) {
  for (StateId s = 0; s < transition.n_states(); ++s) {
    for (ActionId a = 0; a < transition.n_actions(); ++a) {
      double total = 0.0;
      for (double p : transition.row(s, a)) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw std::invalid_argument("transition probability outside [0,1] at s=" +
                                      std::to_string(s) + ", a=" + std::to_string(a));
        }
        total += p;
      }
      if (std::abs(total - 1.0) > tolerance) {
        throw std::invalid_argument("transition row does not sum to 1 at s=" +
                                    std::to_string(s) + ", a=" + std::to_string(a));
      }
    }
  }
}

TabularMdp::TabularMdp(Tensor3 transition, Tensor3 reward, double discount)
    : transition_(std::move(transition)), reward_(std::move(reward)), discount_(discount) {
  if (reward_.n_states() != transition_.n_states() ||
      reward_.n_actions() != transition_.n_actions()) {
    throw std::invalid_argument("reward and transition tensors differ in shape");
  }
  if (!(discount_ >= 0.0 && discount_ < 1.0)) {
    throw std::invalid_argument("discount must lie in [0,1)");
  }
  validate_transition(transition_);
  for (double r : reward_.data()) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("reward outside [0,1]");
  }
}

ClassMap::ClassMap(int n_states, int n_actions, std::vector<ClassId> table)
    : n_states_(n_states), n_actions_(n_actions), table_(std::move(table)) {
  check_dims(n_states, n_actions);
  const auto pairs = static_cast<std::size_t>(n_states) * n_actions;
  if (table_.size() != pairs * n_states) {
    throw std::invalid_argument("class table has wrong size");
  }
  successors_.resize(pairs);
  pair_classes_.resize(pairs);
  for (StateId s = 0; s < n_states; ++s) {
    for (ActionId a = 0; a < n_actions; ++a) {
      auto& succ = successors_[static_cast<std::size_t>(s) * n_actions + a];
      auto& classes = pair_classes_[static_cast<std::size_t>(s) * n_actions + a];
      for (StateId next = 0; next < n_states; ++next) {
        const ClassId cls = at(s, a, next);
        if (cls == kImpossible) continue;
        if (cls < 0) throw std::invalid_argument("negative class id " + std::to_string(cls));
        succ.push_back({next, cls});
        classes.push_back(cls);
        n_classes_ = std::max(n_classes_, cls + 1);
      }
      if (succ.empty()) {
        throw DegeneratePrior("no possible successor for s=" + std::to_string(s) +
                              ", a=" + std::to_string(a));
      }
      std::sort(classes.begin(), classes.end());
      classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    }
  }
}

Belief::Belief(std::shared_ptr<const ClassMap> classes, std::vector<double> counts)
    : classes_(std::move(classes)), counts_(std::move(counts)) {
  if (!classes_) throw std::invalid_argument("belief needs a class map");
  if (counts_.size() != static_cast<std::size_t>(classes_->n_classes())) {
    throw std::invalid_argument("expected " + std::to_string(classes_->n_classes()) +
                                " class counts, got " + std::to_string(counts_.size()));
  }
  for (double c : counts_) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("pseudo-counts must be finite and nonnegative");
    }
  }
}

double Belief::pair_mass(StateId s, ActionId a) const {
  double mass = 0.0;
  for (ClassId cls : classes_->pair_classes(s, a)) mass += counts_[cls];
  return mass;
}

std::vector<double> Belief::boosted_row(StateId s, ActionId a, ClassId boosted,
                                        double extra) const {
  const auto& succ = classes_->successors(s, a);
  std::vector<double> row(static_cast<std::size_t>(n_states()), 0.0);
  double total = 0.0;
  for (const auto& [next, cls] : succ) {
    const double weight = counts_[cls] + (cls == boosted ? extra : 0.0);
    row[next] = weight;
    total += weight;
  }
  if (!(total > 0.0)) {
    throw DegeneratePrior("zero pseudo-count mass at s=" + std::to_string(s) +
                          ", a=" + std::to_string(a));
  }
  for (const auto& succ_entry : succ) row[succ_entry.state] /= total;
  return row;
}

Belief Belief::with_extra_count(ClassId cls, double extra) const {
  Belief copy = *this;
  copy.counts_.at(static_cast<std::size_t>(cls)) += extra;
  return copy;
}

bool Belief::operator==(const Belief& other) const {
  return counts_ == other.counts_ &&
         (classes_ == other.classes_ || *classes_ == *other.classes_);
}

Belief bayes_update(const Belief& belief, StateId s, ActionId a, StateId next) {
  const ClassId cls = belief.classes().at(s, a, next);
  if (cls == kImpossible) {
    throw ImpossibleTransition("prior forbids observed transition " + triple_name(s, a, next));
  }
  return belief.with_extra_count(cls, 1.0);
}

std::vector<double> expected_row(const Belief& belief, StateId s, ActionId a) {
  return belief.boosted_row(s, a, kImpossible, 0.0);
}

Tensor3 expected_model(const Belief& belief) {
  Tensor3 model(belief.n_states(), belief.n_actions());
  for (StateId s = 0; s < belief.n_states(); ++s) {
    for (ActionId a = 0; a < belief.n_actions(); ++a) {
      const auto row = expected_row(belief, s, a);
      std::copy(row.begin(), row.end(), model.row(s, a).begin());
    }
  }
  return model;
}

std::vector<double> bolt_transition(const Belief& belief, StateId s, ActionId a, StateId sigma,
                                    double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  const ClassId cls = belief.classes().at(s, a, sigma);
  if (cls == kImpossible) {
    throw ImpossibleTransition("optimistic target is not a possible successor " +
                               triple_name(s, a, sigma));
  }
  return belief.boosted_row(s, a, cls, eta);
}

}  // namespace bolt
