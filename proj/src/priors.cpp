#include "bolt/priors.hpp"

#include <algorithm>
#include <memory>

namespace bolt {

namespace {

void check_count(double initial_count) {
  if (!(initial_count > 0.0)) throw std::invalid_argument("initial_count must be positive");
}

void check_skeleton(const EnvSkeleton& sk) {
  const auto pairs = static_cast<std::size_t>(sk.n_states) * sk.n_actions;
  if (sk.n_states < 1 || sk.n_actions < 1 || sk.intended.size() != pairs ||
      sk.slip.size() != pairs) {
    throw SkeletonMismatch("skeleton does not cover every state-action pair");
  }
  for (StateId s = 0; s < sk.n_states; ++s) {
    for (ActionId a = 0; a < sk.n_actions; ++a) {
      const StateId in = sk.intended_of(s, a);
      const StateId out = sk.slip_of(s, a);
      const auto where = " at s=" + std::to_string(s) + ", a=" + std::to_string(a);
      if (in < 0 || in >= sk.n_states || out < 0 || out >= sk.n_states) {
        throw SkeletonMismatch("successor out of range" + where);
      }
      if (in == out) throw SkeletonMismatch("intended and slip successors coincide" + where);
    }
  }
}

// Semi uses 2 * a + outcome; Tied collapses all actions onto classes 0 and 1.
std::vector<ClassAssignment> two_outcome_listing(const EnvSkeleton& sk, bool per_action) {
  check_skeleton(sk);
  std::vector<ClassAssignment> listing;
  for (StateId s = 0; s < sk.n_states; ++s) {
    for (ActionId a = 0; a < sk.n_actions; ++a) {
      const ClassId base = per_action ? 2 * a : 0;
      listing.push_back({s, a, sk.intended_of(s, a), base});
      listing.push_back({s, a, sk.slip_of(s, a), base + 1});
    }
  }
  return listing;
}

}  // namespace

std::string to_string(PriorFamily family) {
  switch (family) {
    case PriorFamily::kFull: return "full";
    case PriorFamily::kTied: return "tied";
    case PriorFamily::kSemi: return "semi";
    case PriorFamily::kStructured: return "structured";
  }
  return "unknown";
}

PriorFamily parse_prior_family(const std::string& name) {
  if (name == "full") return PriorFamily::kFull;
  if (name == "tied") return PriorFamily::kTied;
  if (name == "semi") return PriorFamily::kSemi;
  if (name == "structured") return PriorFamily::kStructured;
  throw std::invalid_argument("unknown prior family '" + name + "'");
}

Belief build_full(int n_states, int n_actions, double initial_count) {
  check_count(initial_count);
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("dimensions must be >= 1");
  std::vector<ClassId> table(static_cast<std::size_t>(n_states) * n_actions * n_states);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = static_cast<ClassId>(i);
  auto classes = std::make_shared<const ClassMap>(n_states, n_actions, std::move(table));
  std::vector<double> counts(static_cast<std::size_t>(classes->n_classes()), initial_count);
  return Belief(std::move(classes), std::move(counts));
}

Belief build_structured(int n_states, int n_actions, const std::vector<ClassAssignment>& listing,
                        double initial_count) {
  check_count(initial_count);
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("dimensions must be >= 1");
  std::vector<ClassId> table(static_cast<std::size_t>(n_states) * n_actions * n_states,
                             kImpossible);
  for (const auto& entry : listing) {
    if (entry.state < 0 || entry.state >= n_states || entry.action < 0 ||
        entry.action >= n_actions || entry.next < 0 || entry.next >= n_states) {
      throw std::invalid_argument("class listing entry out of range");
    }
    if (entry.cls < 0) throw std::invalid_argument("class ids must be nonnegative");
    auto& slot = table[(static_cast<std::size_t>(entry.state) * n_actions + entry.action) *
                           n_states +
                       entry.next];
    if (slot != kImpossible && slot != entry.cls) {
      throw std::invalid_argument("conflicting classes for one transition");
    }
    slot = entry.cls;
  }
  for (StateId s = 0; s < n_states; ++s) {
    for (ActionId a = 0; a < n_actions; ++a) {
      const auto first = table.begin() + (static_cast<std::ptrdiff_t>(s) * n_actions + a) * n_states;
      if (std::all_of(first, first + n_states, [](ClassId c) { return c == kImpossible; })) {
        throw IncompleteListing("class listing has no successor for s=" + std::to_string(s) +
                                ", a=" + std::to_string(a));
      }
    }
  }
  auto classes = std::make_shared<const ClassMap>(n_states, n_actions, std::move(table));
  std::vector<double> counts(static_cast<std::size_t>(classes->n_classes()), initial_count);
  return Belief(std::move(classes), std::move(counts));
}

std::vector<ClassAssignment> tied_listing(const EnvSkeleton& skeleton) {
  return two_outcome_listing(skeleton, false);
}

std::vector<ClassAssignment> semi_listing(const EnvSkeleton& skeleton) {
  return two_outcome_listing(skeleton, true);
}

Belief build_tied(const EnvSkeleton& skeleton, double initial_count) {
  return build_structured(skeleton.n_states, skeleton.n_actions, tied_listing(skeleton),
                          initial_count);
}

Belief build_semi(const EnvSkeleton& skeleton, double initial_count) {
  return build_structured(skeleton.n_states, skeleton.n_actions, semi_listing(skeleton),
                          initial_count);
}

Belief build_prior(const PriorSpec& spec, int n_states, int n_actions,
                   const std::optional<EnvSkeleton>& skeleton) {
  switch (spec.family) {
    case PriorFamily::kFull:
      return build_full(n_states, n_actions, spec.initial_count);
    case PriorFamily::kTied:
    case PriorFamily::kSemi:
      if (!skeleton) {
        throw SkeletonMismatch(to_string(spec.family) + " prior needs an environment skeleton");
      }
      if (skeleton->n_states != n_states || skeleton->n_actions != n_actions) {
        throw SkeletonMismatch("skeleton dimensions differ from the environment");
      }
      return spec.family == PriorFamily::kTied ? build_tied(*skeleton, spec.initial_count)
                                               : build_semi(*skeleton, spec.initial_count);
    case PriorFamily::kStructured:
      return build_structured(n_states, n_actions, spec.classes, spec.initial_count);
  }
  throw std::invalid_argument("unknown prior family");
}

}  // namespace bolt
