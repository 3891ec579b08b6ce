#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bolt/harness.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bolt;

namespace {

ExperimentConfig small_chain(AgentKind kind, int trials = 8, int horizon = 200) {
  ExperimentConfig c;
  c.agent.kind = kind;
  c.trials = trials;
  c.horizon = horizon;
  c.master_seed = 17;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "bolt_harness_test") {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("summarize") {
  const Summary s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.ci95 == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));
  CHECK(s.ci_defined);
  const Summary one = summarize({7.0});
  CHECK(one.mean == 7.0);
  CHECK(one.ci95 == 0.0);
  CHECK(!one.ci_defined);
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("property: the 95% interval covers the true mean about 95% of the time") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> normal(3.0, 2.0);
  int covered = 0;
  constexpr int kRepetitions = 1000;
  for (int rep = 0; rep < kRepetitions; ++rep) {
    std::vector<double> xs(100);
    for (double& x : xs) x = normal(rng);
    const Summary s = summarize(xs);
    covered += std::abs(s.mean - 3.0) <= s.ci95;
  }
  CHECK(covered >= 925);
  CHECK(covered <= 975);
}

TEST_CASE("single deterministic trial") {
  ExperimentConfig c;
  c.env.builtin = "chain";
  c.env.p_slip = 0.0;
  c.trials = 1;
  c.horizon = 50;
  const Environment env{"loop", bolt::testing::single_state(1.0, 0.95), 0, {}, {}};
  const auto result = run_experiment(c, env, build_full(1, 1, 1.0));
  CHECK(result.totals == std::vector<double>{50.0});
  CHECK(result.mean == 50.0);
  CHECK(result.ci95 == 0.0);
  CHECK(!result.ci_defined);
}

TEST_CASE("results do not depend on the number of jobs") {
  auto c = small_chain(AgentKind::kBolt);
  c.agent.eta = 7.0;
  const auto serial = run_experiment(c);
  c.jobs = 3;
  const auto parallel = run_experiment(c);
  CHECK(serial.totals == parallel.totals);
  CHECK(trials_csv({serial}) == trials_csv({parallel}));
}

TEST_CASE("same seed, same CSV; other seed, other totals") {
  const auto c = small_chain(AgentKind::kExploit);
  CHECK(trials_csv({run_experiment(c)}) == trials_csv({run_experiment(c)}));
  auto other = c;
  other.master_seed = 18;
  CHECK(run_experiment(other).totals != run_experiment(c).totals);
}

TEST_CASE("sweeps") {
  SUBCASE("one value equals run_experiment") {
    auto c = small_chain(AgentKind::kBeb);
    const auto sweep = run_sweep(c, {2.0});
    c.agent.beta = 2.0;
    CHECK(sweep.at(0).totals == run_experiment(c).totals);
    CHECK(sweep.at(0).param_name == "beta");
  }
  SUBCASE("zero-parameter points share EXPLOIT's environment noise") {
    const auto exploit = run_experiment(small_chain(AgentKind::kExploit));
    const auto bolt = run_sweep(small_chain(AgentKind::kBolt), {0.0, 5.0});
    const auto beb = run_sweep(small_chain(AgentKind::kBeb), {0.0});
    CHECK(bolt[0].totals == exploit.totals);
    CHECK(beb[0].totals == exploit.totals);
    CHECK(bolt[1].totals != exploit.totals);
  }
  CHECK_THROWS_AS(run_sweep(small_chain(AgentKind::kBolt), {}), std::invalid_argument);
}

TEST_CASE("config validation and environment resolution") {
  auto c = small_chain(AgentKind::kExploit);
  c.trials = 0;
  CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
  c = small_chain(AgentKind::kExploit);
  c.env.builtin = "maze";
  CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
  c = small_chain(AgentKind::kExploit);
  c.prior = PriorSpec{PriorFamily::kTied, 2.0, {}};
  const auto loaded = resolve_environment(c);
  CHECK(loaded.prior.family == PriorFamily::kTied);
  CHECK(loaded.env.name == "chain");
}

TEST_CASE("theoretical parameters") {
  const auto p = compute_theoretical_params(0.01, 0.05, 0.95, 5, 2);
  CHECK(p.horizon == 149);
  CHECK(p.eta_star == 149.0);
  CHECK(std::pow(0.95, p.horizon) / 0.05 <= 0.01);
  CHECK(std::pow(0.95, p.horizon - 1) / 0.05 > 0.01);
  CHECK(p.horizon_half == 162);
  CHECK(p.known_threshold == doctest::Approx(4.0 * 149 * 149 / (0.01 * 0.05)));
  const auto with_eta = compute_theoretical_params(0.01, 0.05, 0.95, 5, 2, 150.0);
  CHECK(with_eta.known_threshold == doctest::Approx(1.8e8).epsilon(1e-12));
  CHECK(with_eta.sample_complexity == doctest::Approx(10 * 150.0 * 150 / (1e-4 * 0.0025)));
  CHECK(with_eta.sample_complexity_with_log ==
        doctest::Approx(with_eta.sample_complexity * std::log(10 / 0.05)));
  CHECK(compute_theoretical_params(0.01, 0.05, 0.0, 5, 2).horizon == 1);
  CHECK(compute_theoretical_params(100.0, 0.05, 0.5, 5, 2).horizon == 1);
  CHECK_THROWS_AS(compute_theoretical_params(0.0, 0.05, 0.95, 5, 2), std::invalid_argument);
  CHECK_THROWS_AS(compute_theoretical_params(0.01, 0.05, 1.0, 5, 2), std::invalid_argument);
}

TEST_CASE("CSV formats") {
  ExperimentResult r;
  r.param_name = "eta";
  r.param_value = 0.1;
  r.totals = {1.5, 2.25};
  r.mean = 1.875;
  r.ci95 = 0.5;
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(150) == "150");
  CHECK(trials_csv({r}) == "param,value,trial,total\neta,0.1,0,1.5\neta,0.1,1,2.25\n");
  CHECK(aggregate_csv({r}) == "param,value,mean,ci95\neta,0.1,1.875,0.5\n");
  ExperimentResult ref = r;
  ref.mean = 1.0;
  CHECK(plot_csv({r}, ref) == "param,value,mean,ci95,reference_mean\neta,0.1,1.875,0.5,1\n");
  CHECK_THROWS_AS(plot_csv({}, std::nullopt), std::invalid_argument);
}

TEST_CASE("plot data round-trips through the parser") {
  TempDir dir;
  auto c = small_chain(AgentKind::kBolt, 4, 100);
  const auto results = run_sweep(c, {1.0, 2.5, 10.0});
  const auto reference = run_experiment(small_chain(AgentKind::kExploit, 4, 100));
  const auto path = dir.path / "plot.csv";
  emit_plot_data(results, reference, path);
  CHECK(!std::filesystem::exists(dir.path / "plot.csv.tmp"));
  const auto rows = parse_aggregate_csv(slurp(path));
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].param == "eta");
    CHECK(rows[i].value == results[i].param_value);
    CHECK(rows[i].mean == results[i].mean);
    CHECK(rows[i].ci95 == results[i].ci95);
    CHECK(rows[i].reference_mean == reference.mean);
  }
  CHECK_THROWS_AS(emit_plot_data({}, std::nullopt, dir.path / "empty.csv"), std::invalid_argument);
  CHECK(!std::filesystem::exists(dir.path / "empty.csv"));
}

TEST_CASE("aggregate parser rejects bad input") {
  CHECK_THROWS_AS(parse_aggregate_csv(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_aggregate_csv("a,b\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_aggregate_csv("param,value,mean,ci95\neta,x,1,1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_aggregate_csv("param,value,mean,ci95\neta,1,1\n"), std::invalid_argument);
}

TEST_CASE("atomic writes surface the path on failure") {
  const std::filesystem::path bad = "/nonexistent-dir/out.csv";
  try {
    write_file_atomic(bad, "x");
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/out.csv") != std::string::npos);
  }
}

TEST_CASE("metadata echoes the configuration") {
  auto c = small_chain(AgentKind::kBeb, 2, 10);
  c.agent.beta = 3.0;
  const auto result = run_experiment(c);
  const auto meta = metadata_csv(result);
  CHECK(meta.rfind("key,value\n", 0) == 0);
  CHECK(meta.find(std::string("version,") + kVersion) != std::string::npos);
  CHECK(meta.find("seed,17\n") != std::string::npos);
  CHECK(meta.find("agent,beb\n") != std::string::npos);
  CHECK(meta.find("value,3\n") != std::string::npos);
}
