#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "cqkd/cqkd.hpp"
#include "cqkd/scenario.hpp"

using namespace cqkd;
namespace fs = std::filesystem;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_scenario(text, "s.yaml");
  } catch (const config_error& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal =
    "name: demo\n"
    "protocol:\n"
    "  rounds: 2000\n"
    "  seed: 3\n"
    "attack:\n"
    "  name: identity\n";

}  // namespace

TEST(Registry, ListsTheNamedAttacks) {
  std::set<std::string> names;
  for (const auto& a : attack_registry()) names.insert(a.name);
  EXPECT_EQ(names, (std::set<std::string>{"identity", "pns", "usd-b92", "tagging", "constrained-random", "general"}));
  EXPECT_NE(std::string(find_attack("pns").detail).find("|0,0>E|1,1>"), std::string::npos);
}

TEST(Registry, UnknownNameSuggestsClosest) {
  try {
    find_attack("taging");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_NE(std::string(e.what()).find("did you mean 'tagging'"), std::string::npos);
  }
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
}

TEST(ParseScenario, ReadsNestedSections) {
  const Scenario s = parse_scenario(
      "name: x\n"
      "protocol:\n"
      "  variant: bb84\n"
      "  n_max: 2\n"
      "  transmission: 0.25\n"
      "  source: {p0: 0.5, p1: 0.3, p2: 0.2}\n"
      "attack:\n"
      "  name: pns\n"
      "expect:\n"
      "  received: '@bb84_received'\n"
      "  errors: {analytic: 0, tolerance: 0.5, sigmas: 2}\n");
  EXPECT_EQ(s.config.variant, Variant::bb84);
  EXPECT_EQ(s.config.n_max, 2);
  EXPECT_DOUBLE_EQ(s.config.source.p2, 0.2);
  EXPECT_EQ(s.attack.name, "pns");
  ASSERT_EQ(s.expectations.size(), 2u);
  EXPECT_EQ(s.expectations[0].formula, "@bb84_received");
  EXPECT_EQ(s.expectations[1].tolerance, 0.5);
  EXPECT_EQ(s.expectations[1].sigmas, 2.0);
}

TEST(ParseScenario, ErrorsCarryLineAndField) {
  std::string e = parse_error("name: x\nprotocol:\n  rounds: 10\n  transmision: 0.5\n");
  EXPECT_NE(e.find("s.yaml:4"), std::string::npos) << e;
  EXPECT_NE(e.find("protocol.transmision"), std::string::npos) << e;
  EXPECT_NE(e.find("unknown field"), std::string::npos) << e;

  e = parse_error("name: x\nprotocol:\n  rounds: lots\n");
  EXPECT_NE(e.find("s.yaml:3"), std::string::npos) << e;
  EXPECT_NE(e.find("protocol.rounds"), std::string::npos) << e;

  e = parse_error("name: x\nprotocol:\n  variant: bb85\n");
  EXPECT_NE(e.find("unknown variant"), std::string::npos) << e;

  e = parse_error("name: x\nattack:\n  name: pnss\n");
  EXPECT_NE(e.find("s.yaml:3"), std::string::npos) << e;
  EXPECT_NE(e.find("did you mean 'pns'"), std::string::npos) << e;

  e = parse_error("name: x\nprotocol:\n  source: {p0: 0.5, p1: 0.6}\n");
  EXPECT_NE(e.find("source statistics"), std::string::npos) << e;

  e = parse_error("name: [x\n");
  EXPECT_NE(e.find("s.yaml:"), std::string::npos) << e;

  EXPECT_NE(parse_error("protocol: {}\n").find("missing scenario name"), std::string::npos);
  EXPECT_NE(parse_error("name: x\nexpect:\n  errors: {tolerance: 1}\n").find("missing analytic"),
            std::string::npos);
}

TEST(RunScenario, UnknownMetricIsAConfigError) {
  Scenario s = parse_scenario(std::string(kMinimal) + "expect:\n  no_such_metric: 0\n");
  EXPECT_THROW(run_scenario(s), config_error);
  s = parse_scenario(std::string(kMinimal) + "expect:\n  errors: '@nope'\n");
  EXPECT_THROW(run_scenario(s), config_error);
}

TEST(RunScenario, OverridesSeedRoundsAndJobs) {
  const Scenario s = parse_scenario(kMinimal);
  RunOptions o;
  o.seed = 99;
  o.rounds = 321;
  o.jobs = 3;
  const ScenarioResult r = run_scenario(s, o);
  EXPECT_EQ(r.report.seed, 99u);
  EXPECT_EQ(r.report.rounds, 321u);
  EXPECT_EQ(r.scenario.config.jobs, 3u);
}

TEST(Compare, PassWithinToleranceOrSigmaBand) {
  Expectation e{"x", "", 0.5, 0.0, 3.0};
  const Metric m{"x", 0.0, true, 10000};
  // sigma = 0.005
  EXPECT_TRUE(compare(e, 0.5, 0.514, m).pass);
  EXPECT_FALSE(compare(e, 0.5, 0.516, m).pass);
  EXPECT_NEAR(compare(e, 0.5, 0.51, m).deviation_sigmas, 2.0, 1e-9);
  // exact quantities have no sigma: only the tolerance counts
  e.tolerance = 1e-9;
  EXPECT_TRUE(compare(e, 1.0, 1.0 - 1e-10, std::nullopt).pass);
  EXPECT_FALSE(compare(e, 1.0, 1.0 - 1e-8, std::nullopt).pass);
  // a zero analytic count has zero sigma, so any count fails without tolerance
  Expectation z{"errors", "", 0.0, 0.0, 3.0};
  EXPECT_TRUE(compare(z, 0.0, 0.0, Metric{"errors", 0.0, false, 100}).pass);
  EXPECT_FALSE(compare(z, 0.0, 1.0, Metric{"errors", 1.0, false, 100}).pass);
  // counts use sqrt(N p (1 - p))
  const ComparisonRow c = compare(e, 1199.0, 1136.0, Metric{"received", 1136.0, false, 1000000});
  EXPECT_NEAR(c.sigma, std::sqrt(1199.0 * (1.0 - 1199.0 / 1e6)), 1e-9);
  EXPECT_TRUE(c.pass);
}

TEST(BuildAttack, ResolvesMatrixPathsAgainstScenario) {
  const Scenario s = load_scenario(fs::path(CQKD_SCENARIO_DIR) / "general-phase-flip.yaml");
  const AttackSpec a = build_attack(s);
  EXPECT_EQ(a.name, "general");
  EXPECT_EQ(a.probe.dim, 1u);
  Scenario missing = s;
  missing.attack.return_matrix = "matrices/absent.txt";
  EXPECT_THROW(build_attack(missing), config_error);
}

TEST(BundledScenarios, AllExpectationsHold) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(CQKD_SCENARIO_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    ++count;
    RunOptions o;
    o.jobs = 4;
    const ScenarioResult r = run_scenario(load_scenario(entry.path()), o);
    EXPECT_EQ(r.scenario.name, entry.path().stem().string());
    EXPECT_FALSE(r.rows.empty()) << r.scenario.name;
    for (const auto& row : r.rows)
      EXPECT_TRUE(row.pass) << r.scenario.name << ": " << row.metric << " analytic " << row.analytic
                            << " empirical " << row.empirical;
  }
  EXPECT_GE(count, 15u);
}

TEST(VerifySuites, AllChecksPass) {
  std::vector<CheckRow> rows = verify_fock(fs::path(CQKD_DATA_DIR) / "expansion_corpus.txt");
  for (auto& r : verify_lemma(5, 60)) rows.push_back(r);
  for (auto& r : verify_thresholds()) rows.push_back(r);
  EXPECT_GE(rows.size(), 10u);
  for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.suite << ": " << r.name << " (" << r.detail << ")";
  EXPECT_THROW(verify_fock("/nonexistent/corpus.txt"), config_error);
}
