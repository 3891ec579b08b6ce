#pragma once

// True (hidden) environments: the 5-state Chain, a JSON loader for arbitrary
// tabular environments, and the sampling step.

#include <filesystem>
#include <optional>
#include <string>

#include "bolt/core.hpp"
#include "bolt/priors.hpp"
#include "bolt/rng.hpp"

namespace bolt {

class SchemaError : public Error {
 public:
  using Error::Error;
};

class StochasticityError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Affine map raw -> raw * scale + offset into [0, 1], used for planning.
/// Reported rewards are mapped back.
struct RewardScaling {
  double scale = 1.0;
  double offset = 0.0;

  double to_planning(double raw) const { return raw * scale + offset; }
  double to_raw(double planning) const { return (planning - offset) / scale; }

  bool operator==(const RewardScaling&) const = default;
};

struct Environment {
  std::string name;
  TabularMdp model;  // rewards on the planning scale
  StateId initial_state = 0;
  std::optional<EnvSkeleton> skeleton;
  std::optional<RewardScaling> scaling;

  /// Reward as reported in totals (undoes the scaling).
  double report(double planning_reward) const {
    return scaling ? scaling->to_raw(planning_reward) : planning_reward;
  }
};

inline constexpr int kChainStates = 5;
inline constexpr ActionId kChainForward = 0;  // "a"
inline constexpr ActionId kChainReset = 1;    // "b"

/// 5-state Chain: forward moves s_i -> s_{i+1} (s5 loops), reset returns to
/// s1; each step performs the opposite effect with probability p_slip.
/// Rewards follow the realized effect: 1.0 for staying in s5 by the forward
/// effect, 0.2 for the reset effect, 0 otherwise.
Environment make_chain(double p_slip, double discount = 0.95);

struct Step {
  StateId next;
  double reward;  // planning scale
};

/// Inverse-CDF sample of the successor from one uniform draw.
Step env_step(const Environment& env, StateId state, ActionId action, Rng& rng);

struct LoadedEnvironment {
  Environment env;
  PriorSpec prior;
};

inline constexpr int kSchemaVersion = 1;

/// Parses the JSON environment document. `source` names the input in
/// diagnostics.
LoadedEnvironment parse_environment(const std::string& text,
                                    const std::string& source = "<string>");
LoadedEnvironment load_environment(const std::filesystem::path& path);

/// Inverse of parse_environment; numbers are written with round-trip
/// precision.
std::string serialize_environment(const Environment& env, const PriorSpec& prior);

}  // namespace bolt
