#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "bolt/envs.hpp"
#include "doctest.h"

using namespace bolt;

namespace {

const char* const kTwoState = R"({
  "schema_version": 1,
  "name": "two-state",
  "n_states": 2,
  "n_actions": 1,
  "initial_state": 0,
  "transitions": [[[0.3, 0.7]], [[0.0, 1.0]]],
  "rewards": [[[0.0, 1.0]], [[0.0, 0.5]]],
  "prior": {"family": "full", "initial_count": 1}
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

template <class E>
std::string error_of(const std::string& text) {
  try {
    parse_environment(text, "test.json");
  } catch (const E& e) {
    return e.what();
  }
  FAIL("expected an error");
  return {};
}

}  // namespace

TEST_CASE("make_chain dynamics") {
  SUBCASE("p = 0 is deterministic") {
    const auto env = make_chain(0.0);
    const auto& t = env.model.transition();
    CHECK(t(4, kChainForward, 4) == 1.0);
    CHECK(env.model.reward()(4, kChainForward, 4) == 1.0);
    CHECK(t(2, kChainForward, 3) == 1.0);
    CHECK(t(2, kChainReset, 0) == 1.0);
  }
  SUBCASE("p = 0.2") {
    const auto env = make_chain(0.2);
    const auto& t = env.model.transition();
    const auto& r = env.model.reward();
    CHECK(t(0, kChainForward, 1) == 0.8);
    CHECK(t(0, kChainForward, 0) == doctest::Approx(0.2));
    CHECK(r(0, kChainForward, 0) == 0.2);
    CHECK(r(0, kChainForward, 1) == 0.0);
    CHECK(t(4, kChainReset, 4) == doctest::Approx(0.2));
    CHECK(r(4, kChainReset, 4) == 1.0);  // slipped reset realizes the forward effect
    CHECK(r(3, kChainReset, 0) == 0.2);
    CHECK(env.initial_state == 0);
    for (StateId s = 0; s < 5; ++s) {
      for (ActionId a = 0; a < 2; ++a) {
        double total = 0.0;
        for (double p : t.row(s, a)) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(env.skeleton->intended_of(s, a) != env.skeleton->slip_of(s, a));
      }
    }
  }
  CHECK_THROWS_AS(make_chain(1.5), std::invalid_argument);
}

TEST_CASE("env_step samples the row") {
  SUBCASE("deterministic row") {
    const auto env = make_chain(0.0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(env_step(env, 1, kChainForward, rng).next == 2);
  }
  SUBCASE("frequencies match, rewards are looked up exactly") {
    const auto env = make_chain(0.2);
    Rng rng(4);
    int forward = 0;
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) {
      const Step step = env_step(env, 0, kChainForward, rng);
      forward += step.next == 1;
      CHECK(step.reward == env.model.reward()(0, kChainForward, step.next));
    }
    CHECK(std::abs(forward / double(kDraws) - 0.8) < 0.005);
  }
  SUBCASE("chi-square on a four-outcome row") {
    Tensor3 t(4, 1);
    const std::array<double, 4> p{0.1, 0.2, 0.3, 0.4};
    for (StateId s = 0; s < 4; ++s)
      for (StateId n = 0; n < 4; ++n) t(s, 0, n) = p[n];
    const Environment env{"four", TabularMdp(t, Tensor3(4, 1), 0.9), 0, {}, {}};
    Rng rng(9);
    std::array<int, 4> counts{};
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) ++counts[env_step(env, 0, 0, rng).next];
    double chi2 = 0.0;
    for (int n = 0; n < 4; ++n) {
      const double expected = p[n] * kDraws;
      chi2 += (counts[n] - expected) * (counts[n] - expected) / expected;
    }
    CHECK(chi2 < 16.266);  // 3 degrees of freedom, significance 0.001
  }
}

TEST_CASE("loader parses entries exactly") {
  const auto loaded = parse_environment(kTwoState);
  CHECK(loaded.env.name == "two-state");
  CHECK(loaded.env.model.transition()(0, 0, 0) == 0.3);
  CHECK(loaded.env.model.transition()(0, 0, 1) == 0.7);
  CHECK(loaded.env.model.reward()(1, 0, 1) == 0.5);
  CHECK(loaded.env.model.discount() == 0.95);
  CHECK(loaded.prior.family == PriorFamily::kFull);
  CHECK(!loaded.env.skeleton);
}

TEST_CASE("loader round-trips the chain") {
  const auto chain = make_chain(0.2);
  const PriorSpec tied{PriorFamily::kTied, 1.0, {}};
  const auto loaded = parse_environment(serialize_environment(chain, tied));
  CHECK(loaded.env.model == chain.model);
  CHECK(loaded.env.skeleton == chain.skeleton);
  CHECK(loaded.prior == tied);
  CHECK(serialize_environment(loaded.env, loaded.prior) == serialize_environment(chain, tied));
}

TEST_CASE("loader round-trips a structured prior and a reward scaling") {
  auto text = replace(kTwoState, R"("prior": {"family": "full", "initial_count": 1})",
                      R"("prior": {"family": "structured", "initial_count": 0.5,
                         "classes": [[0, 0, 0, 3], [0, 0, 1, 1], [1, 0, 1, 1]]},
                       "reward_scaling": {"scale": 0.5, "offset": 0.5})");
  text = replace(text, R"("rewards": [[[0.0, 1.0]], [[0.0, 0.5]]])",
                 R"("rewards": [[[-1.0, 1.0]], [[0.0, 0.5]]])");
  const auto loaded = parse_environment(text);
  CHECK(loaded.prior.classes.size() == 3);
  CHECK(loaded.prior.classes[0] == ClassAssignment{0, 0, 0, 3});
  CHECK(loaded.env.model.reward()(0, 0, 0) == 0.0);
  CHECK(loaded.env.model.reward()(0, 0, 1) == 1.0);
  CHECK(loaded.env.report(loaded.env.model.reward()(0, 0, 0)) == -1.0);
  const auto again = parse_environment(serialize_environment(loaded.env, loaded.prior));
  CHECK(again.env.model == loaded.env.model);
  CHECK(again.prior == loaded.prior);
}

TEST_CASE("loader diagnostics") {
  SUBCASE("malformed JSON reports line and column") {
    const auto msg = error_of<SchemaError>("{\n  \"name\": ,\n}");
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("test.json") != std::string::npos);
  }
  SUBCASE("missing transition row names (s,a)") {
    const auto msg = error_of<SchemaError>(
        replace(kTwoState, "[[0.0, 1.0]]],\n  \"rewards\"", "[]],\n  \"rewards\""));
    CHECK(msg.find("(s=1, a=0)") != std::string::npos);
  }
  SUBCASE("wrong field type names the field path") {
    const auto msg = error_of<SchemaError>(replace(kTwoState, "[[0.3, 0.7]]", "[[0.3, \"x\"]]"));
    CHECK(msg.find("transitions[0][0][1]") != std::string::npos);
  }
  SUBCASE("missing required field") {
    const auto msg = error_of<SchemaError>(replace(kTwoState, "\"schema_version\": 1,", ""));
    CHECK(msg.find("schema_version") != std::string::npos);
  }
  SUBCASE("unsupported version") {
    CHECK_THROWS_AS(parse_environment(replace(kTwoState, "\"schema_version\": 1", "\"schema_version\": 2")),
                    SchemaError);
  }
  SUBCASE("row sums beyond 1e-6") {
    const auto msg = error_of<StochasticityError>(replace(kTwoState, "[[0.3, 0.7]]", "[[0.3, 0.71]]"));
    CHECK(msg.find("(s=0, a=0)") != std::string::npos);
  }
  SUBCASE("row sums within 1e-6 are renormalized") {
    const auto loaded = parse_environment(replace(kTwoState, "[[0.3, 0.7]]", "[[0.3, 0.7000001]]"));
    const auto& t = loaded.env.model.transition();
    CHECK(std::abs(t(0, 0, 0) + t(0, 0, 1) - 1.0) < 1e-12);
  }
  SUBCASE("rewards outside [0,1] need scaling") {
    const auto msg = error_of<RangeError>(replace(kTwoState, "[[0.0, 0.5]]", "[[0.0, -0.5]]"));
    CHECK(msg.find("reward_scaling") != std::string::npos);
  }
  SUBCASE("tied prior without skeleton") {
    CHECK_THROWS_AS(parse_environment(replace(kTwoState, "\"full\"", "\"tied\"")), SchemaError);
  }
  SUBCASE("unknown prior family") {
    CHECK_THROWS_AS(parse_environment(replace(kTwoState, "\"full\"", "\"crp\"")), SchemaError);
  }
  SUBCASE("initial state out of range") {
    CHECK_THROWS_AS(
        parse_environment(replace(kTwoState, "\"initial_state\": 0", "\"initial_state\": 2")),
        SchemaError);
  }
}

TEST_CASE("load_environment reads files and names missing ones") {
  const auto dir = std::filesystem::temp_directory_path() / "bolt_envs_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "two.json";
  std::ofstream(path) << kTwoState;
  CHECK(load_environment(path).env.model.transition()(0, 0, 1) == 0.7);
  try {
    load_environment(dir / "absent.json");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("absent.json") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
