#include "faillite/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

namespace faillite {
namespace {

FailoverTimeline timeline(const std::string& id, std::optional<double> mttr_ms, double acc_backup,
                          BackupKind kind = BackupKind::Cold) {
  FailoverTimeline t;
  t.app_id = id;
  t.failure_time = from_ms(1000);
  t.detection_time = from_ms(1100);
  if (mttr_ms) t.recovery_time = t.failure_time + from_ms(*mttr_ms);
  t.backup = mttr_ms ? kind : BackupKind::None;
  t.acc_primary = 1.0;
  t.acc_backup = acc_backup;
  return t;
}

RunMetrics run(const std::string& policy, double rate, double mttr, double red) {
  RunMetrics m;
  m.policy = policy;
  m.affected = 10;
  m.recovery_rate = rate;
  m.mean_mttr_ms = mttr;
  m.acc_reduction = red;
  return m;
}

TEST(ComputeMetrics, RatesMeansAndReduction) {
  const auto m = compute_metrics({timeline("a", 110.0, 1.0, BackupKind::Warm), timeline("b", 550.0, 0.9),
                                  timeline("c", std::nullopt, 0.0), timeline("d", 340.0, 0.95)});
  EXPECT_EQ(m.affected, 4u);
  EXPECT_EQ(m.recovered, 3u);
  EXPECT_DOUBLE_EQ(m.recovery_rate, 75.0);
  EXPECT_DOUBLE_EQ(m.mean_mttr_ms, (110.0 + 550.0 + 340.0) / 3.0);
  EXPECT_NEAR(m.acc_reduction, (0.0 + 10.0 + 5.0) / 3.0, 1e-12);
  EXPECT_FALSE(m.undefined);
  ASSERT_EQ(m.rows.size(), 4u);
  EXPECT_EQ(m.rows[0].backup, "warm");
  EXPECT_FALSE(m.rows[2].mttr_ms.has_value());
  EXPECT_EQ(m.rows[2].acc_backup, 0.0);
}

TEST(ComputeMetrics, FullSizeRecoveryHasNoReduction) {
  const auto m = compute_metrics({timeline("a", 800.0, 1.0), timeline("b", 900.0, 1.0)});
  EXPECT_EQ(m.acc_reduction, 0.0);
}

TEST(ComputeMetrics, NoAffectedAppsIsUndefined) {
  const auto m = compute_metrics({});
  EXPECT_TRUE(m.undefined);
  EXPECT_EQ(m.affected, 0u);
}

TEST(ComputeMetrics, RelabelingDoesNotChangeRates) {
  std::vector<FailoverTimeline> ts;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    ts.push_back(timeline("app" + std::to_string(i), rng() % 3 ? std::optional<double>(100.0 + rng() % 900) : std::nullopt,
                          0.8 + (rng() % 20) / 100.0));
  }
  const auto base = compute_metrics(ts);
  std::shuffle(ts.begin(), ts.end(), rng);
  for (auto& t : ts) t.app_id = "x" + t.app_id;
  const auto relabeled = compute_metrics(ts);
  EXPECT_EQ(base.recovery_rate, relabeled.recovery_rate);
  EXPECT_NEAR(base.mean_mttr_ms, relabeled.mean_mttr_ms, 1e-9);
  EXPECT_NEAR(base.acc_reduction, relabeled.acc_reduction, 1e-9);
}

TEST(Aggregate, SingleRunMeanIsValue) {
  const auto s = aggregate({run("faillite", 90.0, 300.0, 1.0)});
  EXPECT_EQ(s.runs, 1u);
  EXPECT_EQ(s.recovery_rate.mean, 90.0);
  EXPECT_EQ(s.recovery_rate.min, 90.0);
  EXPECT_EQ(s.mean_mttr_ms.max, 300.0);
}

TEST(Aggregate, MeanAndExtremaOverSixRuns) {
  std::vector<RunMetrics> runs;
  for (int i = 0; i < 6; ++i) runs.push_back(run("full-warm", 80.0 + i, 100.0 * (i + 1), 0.0));
  const auto s = aggregate(runs);
  EXPECT_EQ(s.runs, 6u);
  EXPECT_DOUBLE_EQ(s.recovery_rate.mean, 82.5);
  EXPECT_EQ(s.recovery_rate.min, 80.0);
  EXPECT_EQ(s.recovery_rate.max, 85.0);
  EXPECT_DOUBLE_EQ(s.mean_mttr_ms.mean, 350.0);
}

TEST(Aggregate, UndefinedRunsCountedButExcluded) {
  auto empty = run("faillite", 0.0, 0.0, 0.0);
  empty.undefined = true;
  const auto s = aggregate({run("faillite", 100.0, 200.0, 0.0), empty});
  EXPECT_EQ(s.runs, 2u);
  EXPECT_EQ(s.undefined_runs, 1u);
  EXPECT_EQ(s.recovery_rate.mean, 100.0);
}

TEST(Aggregate, RejectsMixedPoliciesAndEmptyInput) {
  EXPECT_THROW(aggregate({run("faillite", 1, 1, 1), run("full-cold", 1, 1, 1)}), std::invalid_argument);
  EXPECT_THROW(aggregate({}), std::invalid_argument);
  const auto by = aggregate_by_policy({run("b", 1, 1, 1), run("a", 3, 1, 1), run("b", 3, 1, 1)});
  ASSERT_EQ(by.size(), 2u);
  EXPECT_EQ(by[0].policy, "b");
  EXPECT_EQ(by[0].recovery_rate.mean, 2.0);
}

TEST(MetricsOutput, JsonCarriesSchemaAndHash) {
  auto m = compute_metrics({timeline("a", 110.0, 1.0)});
  m.policy = "faillite";
  m.scenario_hash = "abc123";
  m.seed = 7;
  const auto j = to_json(m);
  EXPECT_EQ(j.at("schema_version"), kMetricsSchemaVersion);
  EXPECT_EQ(j.at("scenario_hash"), "abc123");
  EXPECT_EQ(j.at("seed"), 7);
  EXPECT_EQ(to_json(aggregate({m})).at("schema_version"), kMetricsSchemaVersion);
}

TEST(MetricsOutput, CsvRowsAndSummary) {
  const auto m = compute_metrics({timeline("a", 110.0, 1.0), timeline("b", std::nullopt, 0.0)});
  std::ostringstream rows;
  write_rows_csv(rows, m);
  const std::string text = rows.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(text.find("a,"), std::string::npos);

  std::ostringstream summary;
  write_summary_csv_header(summary, {"headroom"});
  write_summary_csv_row(summary, {"0.1"}, aggregate({run("faillite", 100, 200, 1)}));
  const std::string s = summary.str();
  EXPECT_EQ(s.rfind("headroom,policy,", 0), 0u);
  EXPECT_NE(s.find("\n0.1,faillite,1,0,"), std::string::npos);
}

}  // namespace
}  // namespace faillite
