#pragma once

// Prior families over transition models: Full (one Dirichlet per state-action),
// Tied and Semi (shared intended/slip parameters) and arbitrary structured
// class listings. Tied and Semi are generated as structured class maps.

#include <optional>
#include <string>
#include <vector>

#include "bolt/core.hpp"

namespace bolt {

class SkeletonMismatch : public Error {
 public:
  using Error::Error;
};

class IncompleteListing : public Error {
 public:
  using Error::Error;
};

/// Two-outcome structure of an environment: each (s, a) either reaches its
/// intended successor or slips to another one. Probabilities are not part
/// of the skeleton.
struct EnvSkeleton {
  int n_states = 0;
  int n_actions = 0;
  std::vector<StateId> intended;  // indexed s * n_actions + a
  std::vector<StateId> slip;

  StateId intended_of(StateId s, ActionId a) const { return intended.at(s * n_actions + a); }
  StateId slip_of(StateId s, ActionId a) const { return slip.at(s * n_actions + a); }

  bool operator==(const EnvSkeleton&) const = default;
};

/// One line of a structured class listing.
struct ClassAssignment {
  StateId state;
  ActionId action;
  StateId next;
  ClassId cls;

  bool operator==(const ClassAssignment&) const = default;
};

enum class PriorFamily { kFull, kTied, kSemi, kStructured };

std::string to_string(PriorFamily family);
/// Throws std::invalid_argument for unknown names.
PriorFamily parse_prior_family(const std::string& name);

struct PriorSpec {
  PriorFamily family = PriorFamily::kFull;
  double initial_count = 1.0;
  std::vector<ClassAssignment> classes;  // kStructured only

  bool operator==(const PriorSpec&) const = default;
};

Belief build_full(int n_states, int n_actions, double initial_count);
Belief build_tied(const EnvSkeleton& skeleton, double initial_count);
Belief build_semi(const EnvSkeleton& skeleton, double initial_count);

/// Triples absent from the listing are impossible. Class ids need not be
/// contiguous; unused ids still get `initial_count`.
Belief build_structured(int n_states, int n_actions, const std::vector<ClassAssignment>& listing,
                        double initial_count);

/// Dispatches on spec.family. Tied/Semi need a skeleton.
Belief build_prior(const PriorSpec& spec, int n_states, int n_actions,
                   const std::optional<EnvSkeleton>& skeleton);

/// Listing form of the Tied / Semi class maps, useful for serialization.
std::vector<ClassAssignment> tied_listing(const EnvSkeleton& skeleton);
std::vector<ClassAssignment> semi_listing(const EnvSkeleton& skeleton);

}  // namespace bolt
