#include "acbench/experiments.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <set>

#include <gtest/gtest.h>

namespace acbench {
namespace {

ExperimentConfig quick(std::vector<std::string> suites, std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.suites = std::move(suites);
  c.options.seed = seed;
  c.options.trials = 2000;
  c.options.fuzz = 200;
  return c;
}

TEST(ExperimentConfigTest, ParsesKnownKeys) {
  const auto c = experiment_config_from_json(
      nlohmann::json::parse(R"({"suites": ["entropy", "bounds"], "seed": 4, "trials": 10, "tolerance": 0})"));
  EXPECT_EQ(c.suites.size(), 2u);
  EXPECT_EQ(c.options.seed, 4u);
  EXPECT_EQ(c.options.trials, 10u);
  EXPECT_EQ(c.options.tolerance, 0.0);
}

TEST(ExperimentConfigTest, RejectsMalformed) {
  for (const char* text : {R"({"sede": 1})", R"({"suite": "nope"})", R"({"suite": "entropy", "suites": []})",
                           R"({"trials": 0})", R"({"tolerance": -1})", R"({"seed": "x"})", "[1, 2]"})
    EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(text)), ConfigError) << text;
  EXPECT_THROW(suite_checks("nope"), ConfigError);
}

TEST(RegistryTest, IdsAreUniqueAndSuitesKnown) {
  std::set<std::string> ids;
  const auto& names = suite_names();
  for (const auto& c : check_registry()) {
    EXPECT_TRUE(ids.insert(c.id).second) << c.id;
    if (c.suite() == "broken-fixture") continue;
    EXPECT_NE(std::find(names.begin(), names.end(), c.suite()), names.end()) << c.id;
  }
  for (int crit = 1; crit <= 13; ++crit)
    EXPECT_TRUE(std::any_of(check_registry().begin(), check_registry().end(),
                            [&](const Check& c) { return c.criterion == crit; }))
        << crit;
}

TEST(RunExperimentTest, EmptySuiteListPasses) {
  const Report r = run_experiment(quick({}));
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.pass());
}

TEST(RunExperimentTest, SameSeedSameHashDifferentSeedDifferentHash) {
  const auto a = run_experiment(quick({"entropy", "bounds"}, 3));
  const auto b = run_experiment(quick({"entropy", "bounds"}, 3));
  const auto c = run_experiment(quick({"entropy", "bounds"}, 4));
  EXPECT_TRUE(a.pass());
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.determinism_hash(), b.determinism_hash());
  EXPECT_NE(a.determinism_hash(), c.determinism_hash());
}

TEST(RunExperimentTest, RepeatedSuitesAreDeduplicated) {
  const auto once = run_experiment(quick({"bounds"}));
  const auto twice = run_experiment(quick({"bounds", "bounds"}));
  EXPECT_EQ(once.records.size(), twice.records.size());
}

TEST(RunExperimentTest, WorkerCountDoesNotChangeTheReport) {
  setenv("ACBENCH_WORKERS", "1", 1);
  const auto a = run_experiment(quick({"entropy", "hash-audit"}, 9));
  setenv("ACBENCH_WORKERS", "4", 1);
  const auto b = run_experiment(quick({"entropy", "hash-audit"}, 9));
  unsetenv("ACBENCH_WORKERS");
  EXPECT_EQ(a.determinism_hash(), b.determinism_hash());
}

TEST(RunExperimentTest, BrokenFixtureFailsItsSuite) {
  const auto r = run_experiment(quick({"broken-fixture"}));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_FALSE(r.pass());
  EXPECT_EQ(r.failures(), 1u);
}

TEST(ReportTest, RecordRelations) {
  EXPECT_TRUE(make_record("a", "m", 0.1, 0.3, "<=", 0.3, 0.0, Provenance::kExact).pass);
  EXPECT_FALSE(make_record("a", "m", 0.1, 0.3, "<=", 0.2, 0.0, Provenance::kExact).pass);
  EXPECT_TRUE(make_record("a", "m", 0.1, 0.3, ">=", 0.1, 0.0, Provenance::kExact).pass);
  EXPECT_FALSE(make_record("a", "m", 0.1, 0.3, "==", 0.1, 0.0, Provenance::kExact).pass);
  EXPECT_THROW(make_record("a", "m", 0.1, "<", 0.1, 0.0, Provenance::kExact), RejectedInput);
}

TEST(ReportTest, CsvQuotesAndInfinities) {
  Report r;
  r.records.push_back(make_record("x:0,1", "say \"hi\"", 1.0, "<=", 2.0, 0.0, Provenance::kExact));
  r.records.push_back(make_record("y", "inf", std::numeric_limits<double>::infinity(), ">=", 1.0, 0.0,
                                  Provenance::kExact));
  const auto csv = r.to_csv();
  EXPECT_EQ(csv.rfind("id,metric,lo,hi,relation,bound,pass,provenance,trials,width,seeds\n", 0), 0u);
  EXPECT_NE(csv.find("\"x:0,1\",\"say \"\"hi\"\"\""), std::string::npos);
  EXPECT_NE(csv.find("y,inf,inf,inf"), std::string::npos);
  EXPECT_EQ(r.to_json()["records"][1]["value"]["lo"], "inf");
}

TEST(ReportTest, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

}  // namespace
}  // namespace acbench
