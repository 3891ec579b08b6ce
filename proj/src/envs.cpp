#include "bolt/envs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bolt {

using nlohmann::json;

Environment make_chain(double p_slip, double discount) {
  if (!(p_slip >= 0.0 && p_slip <= 1.0)) throw std::invalid_argument("p_slip must be in [0,1]");
  constexpr int n = kChainStates;
  Tensor3 transition(n, 2);
  Tensor3 reward(n, 2);
  EnvSkeleton skeleton{n, 2, std::vector<StateId>(2 * n), std::vector<StateId>(2 * n)};

  auto forward_effect = [](StateId s) { return std::min(s + 1, n - 1); };
  auto reset_effect = [](StateId) { return StateId{0}; };

  for (StateId s = 0; s < n; ++s) {
    const StateId fwd = forward_effect(s);
    const StateId back = reset_effect(s);
    for (ActionId a : {kChainForward, kChainReset}) {
      const StateId intended = a == kChainForward ? fwd : back;
      const StateId slipped = a == kChainForward ? back : fwd;
      transition(s, a, intended) += 1.0 - p_slip;
      transition(s, a, slipped) += p_slip;
      skeleton.intended[s * 2 + a] = intended;
      skeleton.slip[s * 2 + a] = slipped;
      // The two effects always lead to different states, so rewards can be
      // attached to the realized successor.
      reward(s, a, back) = 0.2;
      if (s == n - 1) reward(s, a, fwd) = 1.0;
    }
  }
  return Environment{"chain", TabularMdp(std::move(transition), std::move(reward), discount), 0,
                     std::move(skeleton), std::nullopt};
}

Step env_step(const Environment& env, StateId state, ActionId action, Rng& rng) {
  const auto row = env.model.transition().row(state, action);
  const double u = uniform01(rng);
  double cumulative = 0.0;
  StateId next = -1;
  for (StateId s = 0; s < static_cast<StateId>(row.size()); ++s) {
    if (row[s] <= 0.0) continue;
    next = s;  // last positive entry absorbs rounding in the cumulative sum
    cumulative += row[s];
    if (u < cumulative) break;
  }
  return {next, env.model.reward()(state, action, next)};
}

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Field access with path-qualified diagnostics.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw SchemaError(source_ + ": field '" + path + "': " + what);
  }

  const json& field(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "missing");
    return *it;
  }

  int integer(const json& value, const std::string& path) const {
    if (!value.is_number_integer()) fail(path, "expected an integer");
    return value.get<int>();
  }

  double number(const json& value, const std::string& path) const {
    if (!value.is_number()) fail(path, "expected a number");
    return value.get<double>();
  }

  std::string string(const json& value, const std::string& path) const {
    if (!value.is_string()) fail(path, "expected a string");
    return value.get<std::string>();
  }

  const json& array(const json& value, std::size_t size, const std::string& path) const {
    if (!value.is_array()) fail(path, "expected an array");
    if (value.size() != size) {
      fail(path, "expected " + std::to_string(size) + " entries, got " +
                     std::to_string(value.size()));
    }
    return value;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string at(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

 private:
  std::string source_;
};

// Reads a [n_states][n_actions][n_states] array. Missing rows name the pair.
Tensor3 read_tensor(const Reader& in, const json& value, int n_states, int n_actions,
                    const std::string& path) {
  Tensor3 out(n_states, n_actions);
  if (!value.is_array()) in.fail(path, "expected an array");
  for (StateId s = 0; s < n_states; ++s) {
    if (static_cast<std::size_t>(s) >= value.size()) {
      in.fail(Reader::at(path, s), "missing rows for state " + std::to_string(s));
    }
    const auto& per_state = value[s];
    if (!per_state.is_array()) in.fail(Reader::at(path, s), "expected an array");
    for (ActionId a = 0; a < n_actions; ++a) {
      const auto row_path = Reader::at(Reader::at(path, s), a);
      if (static_cast<std::size_t>(a) >= per_state.size()) {
        in.fail(row_path, "missing row for (s=" + std::to_string(s) + ", a=" +
                              std::to_string(a) + ")");
      }
      const auto& row = in.array(per_state[a], n_states, row_path);
      for (StateId next = 0; next < n_states; ++next) {
        out(s, a, next) = in.number(row[next], Reader::at(row_path, next));
      }
    }
    if (per_state.size() != static_cast<std::size_t>(n_actions)) {
      in.fail(Reader::at(path, s), "expected " + std::to_string(n_actions) + " rows");
    }
  }
  if (value.size() != static_cast<std::size_t>(n_states)) {
    in.fail(path, "expected " + std::to_string(n_states) + " states");
  }
  return out;
}

std::vector<StateId> read_successors(const Reader& in, const json& value, int n_states,
                                     int n_actions, const std::string& path) {
  std::vector<StateId> out;
  in.array(value, n_states, path);
  for (StateId s = 0; s < n_states; ++s) {
    const auto& per_state = in.array(value[s], n_actions, Reader::at(path, s));
    for (ActionId a = 0; a < n_actions; ++a) {
      const auto p = Reader::at(Reader::at(path, s), a);
      const int next = in.integer(per_state[a], p);
      if (next < 0 || next >= n_states) in.fail(p, "state index out of range");
      out.push_back(next);
    }
  }
  return out;
}

void check_stochastic(Tensor3& transition, const std::string& source) {
  constexpr double kFileTolerance = 1e-6;
  for (StateId s = 0; s < transition.n_states(); ++s) {
    for (ActionId a = 0; a < transition.n_actions(); ++a) {
      auto row = transition.row(s, a);
      double total = 0.0;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw StochasticityError(source + ": probability outside [0,1] in row (s=" +
                                   std::to_string(s) + ", a=" + std::to_string(a) + ")");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kFileTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << source << ": row (s=" << s << ", a=" << a << ") sums to " << total;
        throw StochasticityError(msg.str());
      }
      // Within file tolerance but not within the model tolerance: renormalize.
      if (std::abs(total - 1.0) > kRowSumTolerance) {
        for (double& p : row) p /= total;
      }
    }
  }
}

}  // namespace

LoadedEnvironment parse_environment(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(source + ": malformed JSON at " + line_col(text, e.byte) + ": " + e.what());
  }
  const Reader in(source);
  if (!doc.is_object()) in.fail("", "document must be an object");

  const int version = in.integer(in.field(doc, "schema_version", ""), "schema_version");
  if (version != kSchemaVersion) {
    in.fail("schema_version", "unsupported version " + std::to_string(version));
  }
  const std::string name = in.string(in.field(doc, "name", ""), "name");
  const int n_states = in.integer(in.field(doc, "n_states", ""), "n_states");
  const int n_actions = in.integer(in.field(doc, "n_actions", ""), "n_actions");
  if (n_states < 1) in.fail("n_states", "must be >= 1");
  if (n_actions < 1) in.fail("n_actions", "must be >= 1");
  const int initial = in.integer(in.field(doc, "initial_state", ""), "initial_state");
  if (initial < 0 || initial >= n_states) in.fail("initial_state", "state index out of range");
  double discount = 0.95;
  if (doc.contains("discount")) {
    discount = in.number(doc["discount"], "discount");
    if (!(discount >= 0.0 && discount < 1.0)) in.fail("discount", "must lie in [0,1)");
  }

  Tensor3 transition =
      read_tensor(in, in.field(doc, "transitions", ""), n_states, n_actions, "transitions");
  Tensor3 reward = read_tensor(in, in.field(doc, "rewards", ""), n_states, n_actions, "rewards");
  check_stochastic(transition, source);

  std::optional<RewardScaling> scaling;
  if (doc.contains("reward_scaling")) {
    const auto& block = doc["reward_scaling"];
    RewardScaling rs;
    rs.scale = in.number(in.field(block, "scale", "reward_scaling"), "reward_scaling.scale");
    rs.offset = in.number(in.field(block, "offset", "reward_scaling"), "reward_scaling.offset");
    if (!(rs.scale > 0.0)) in.fail("reward_scaling.scale", "must be positive");
    scaling = rs;
    for (StateId s = 0; s < n_states; ++s) {
      for (ActionId a = 0; a < n_actions; ++a) {
        for (double& r : reward.row(s, a)) r = rs.to_planning(r);
      }
    }
  }
  for (StateId s = 0; s < n_states; ++s) {
    for (ActionId a = 0; a < n_actions; ++a) {
      for (StateId next = 0; next < n_states; ++next) {
        const double r = reward(s, a, next);
        // Slack for the affine map's rounding at the interval ends.
        const double slack = scaling ? 1e-12 : 0.0;
        if (!(r >= -slack && r <= 1.0 + slack)) {
          std::ostringstream msg;
          msg << source << ": reward " << r << " at (s=" << s << ", a=" << a << ", s'=" << next
              << ") is outside [0,1]"
              << (scaling ? " after reward_scaling" : "; add a reward_scaling block");
          throw RangeError(msg.str());
        }
        reward(s, a, next) = std::clamp(r, 0.0, 1.0);
      }
    }
  }

  std::optional<EnvSkeleton> skeleton;
  if (doc.contains("skeleton")) {
    const auto& block = doc["skeleton"];
    EnvSkeleton sk;
    sk.n_states = n_states;
    sk.n_actions = n_actions;
    sk.intended = read_successors(in, in.field(block, "intended", "skeleton"), n_states,
                                  n_actions, "skeleton.intended");
    sk.slip = read_successors(in, in.field(block, "slip", "skeleton"), n_states, n_actions,
                              "skeleton.slip");
    skeleton = std::move(sk);
  }

  PriorSpec prior;
  const auto& prior_block = in.field(doc, "prior", "");
  try {
    prior.family = parse_prior_family(in.string(in.field(prior_block, "family", "prior"),
                                                "prior.family"));
  } catch (const std::invalid_argument& e) {
    in.fail("prior.family", e.what());
  }
  if (prior_block.contains("initial_count")) {
    prior.initial_count = in.number(prior_block["initial_count"], "prior.initial_count");
    if (!(prior.initial_count > 0.0)) in.fail("prior.initial_count", "must be positive");
  }
  if (prior.family == PriorFamily::kStructured) {
    const auto& classes = in.field(prior_block, "classes", "prior");
    if (!classes.is_array()) in.fail("prior.classes", "expected an array");
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const auto p = Reader::at("prior.classes", i);
      const auto& entry = in.array(classes[i], 4, p);
      ClassAssignment ca{in.integer(entry[0], Reader::at(p, 0)),
                         in.integer(entry[1], Reader::at(p, 1)),
                         in.integer(entry[2], Reader::at(p, 2)),
                         in.integer(entry[3], Reader::at(p, 3))};
      if (ca.state < 0 || ca.state >= n_states || ca.action < 0 || ca.action >= n_actions ||
          ca.next < 0 || ca.next >= n_states || ca.cls < 0) {
        in.fail(p, "index out of range");
      }
      prior.classes.push_back(ca);
    }
  }
  if ((prior.family == PriorFamily::kTied || prior.family == PriorFamily::kSemi) && !skeleton) {
    in.fail("skeleton", "required by prior family '" + to_string(prior.family) + "'");
  }

  Environment env{name, TabularMdp(std::move(transition), std::move(reward), discount), initial,
                  std::move(skeleton), scaling};
  return {std::move(env), std::move(prior)};
}

LoadedEnvironment load_environment(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw SchemaError("cannot open environment file " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_environment(buffer.str(), path.string());
}

namespace {

// Indented JSON with arrays of scalars kept on one line, so a transition row
// reads as a row.
void write_compact(const nlohmann::ordered_json& value, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  if (value.is_object() && !value.empty()) {
    out += "{\n";
    std::size_t i = 0;
    for (const auto& [key, item] : value.items()) {
      out += pad + nlohmann::ordered_json(key).dump() + ": ";
      write_compact(item, indent + 2, out);
      out += ++i < value.size() ? ",\n" : "\n";
    }
    out += close_pad + "}";
    return;
  }
  const bool flat = std::none_of(value.begin(), value.end(), [](const auto& item) {
    return item.is_structured();
  });
  if (value.is_array() && !value.empty() && !flat) {
    out += "[\n";
    for (std::size_t i = 0; i < value.size(); ++i) {
      out += pad;
      write_compact(value[i], indent + 2, out);
      out += i + 1 < value.size() ? ",\n" : "\n";
    }
    out += close_pad + "]";
    return;
  }
  if (!value.is_array()) {
    out += value.dump();
    return;
  }
  out += "[";
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (i > 0) out += ", ";
    out += value[i].dump();
  }
  out += "]";
}

}  // namespace

std::string serialize_environment(const Environment& env, const PriorSpec& prior) {
  using json = nlohmann::ordered_json;
  const auto& mdp = env.model;
  auto tensor = [&](const Tensor3& t, bool raw_rewards) {
    json out = json::array();
    for (StateId s = 0; s < mdp.n_states(); ++s) {
      json per_state = json::array();
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        json row = json::array();
        for (double v : t.row(s, a)) row.push_back(raw_rewards ? env.report(v) : v);
        per_state.push_back(std::move(row));
      }
      out.push_back(std::move(per_state));
    }
    return out;
  };
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = env.name;
  doc["n_states"] = mdp.n_states();
  doc["n_actions"] = mdp.n_actions();
  doc["initial_state"] = env.initial_state;
  doc["discount"] = mdp.discount();
  doc["transitions"] = tensor(mdp.transition(), false);
  doc["rewards"] = tensor(mdp.reward(), true);
  if (env.scaling) {
    doc["reward_scaling"] = {{"scale", env.scaling->scale}, {"offset", env.scaling->offset}};
  }
  if (env.skeleton) {
    auto grid = [&](const std::vector<StateId>& flat) {
      json out = json::array();
      for (StateId s = 0; s < env.skeleton->n_states; ++s) {
        json row = json::array();
        for (ActionId a = 0; a < env.skeleton->n_actions; ++a) {
          row.push_back(flat[s * env.skeleton->n_actions + a]);
        }
        out.push_back(std::move(row));
      }
      return out;
    };
    doc["skeleton"] = {{"intended", grid(env.skeleton->intended)},
                       {"slip", grid(env.skeleton->slip)}};
  }
  json prior_block = {{"family", to_string(prior.family)},
                      {"initial_count", prior.initial_count}};
  if (prior.family == PriorFamily::kStructured) {
    json classes = json::array();
    for (const auto& c : prior.classes) classes.push_back({c.state, c.action, c.next, c.cls});
    prior_block["classes"] = std::move(classes);
  }
  doc["prior"] = std::move(prior_block);
  std::string out;
  write_compact(doc, 0, out);
  return out + "\n";
}

}  // namespace bolt
