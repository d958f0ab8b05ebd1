#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faillite/timeline.hpp"

namespace faillite {

constexpr int kMetricsSchemaVersion = 1;

struct AppRow {
  std::string app_id;
  bool critical = false;
  bool recovered = false;
  std::optional<double> mttr_ms;
  double acc_primary = 1.0;
  double acc_backup = 0.0;
  std::string backup;  // none, warm or cold
};

struct RunMetrics {
  std::string policy;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::size_t affected = 0;
  std::size_t recovered = 0;
  double recovery_rate = 0.0;  // percent of affected
  double mean_mttr_ms = 0.0;   // over recovered
  double acc_reduction = 0.0;  // percent, over recovered
  bool undefined = false;      // no affected apps
  std::vector<AppRow> rows;
};

RunMetrics compute_metrics(const std::vector<FailoverTimeline>& timelines);

struct Stat {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MetricsSummary {
  std::string policy;
  std::size_t runs = 0;
  std::size_t undefined_runs = 0;
  Stat recovery_rate;
  Stat mean_mttr_ms;
  Stat acc_reduction;
};

// Mean and extrema over runs of one policy; undefined runs are counted but
// excluded. Throws std::invalid_argument on mixed policies or no runs.
MetricsSummary aggregate(const std::vector<RunMetrics>& runs);
// One summary per policy, in first-seen order.
std::vector<MetricsSummary> aggregate_by_policy(const std::vector<RunMetrics>& runs);

nlohmann::json to_json(const RunMetrics& m);
nlohmann::json to_json(const MetricsSummary& s);
void write_rows_csv(std::ostream& out, const RunMetrics& m);
void write_summary_csv_header(std::ostream& out, const std::vector<std::string>& key_columns);
void write_summary_csv_row(std::ostream& out, const std::vector<std::string>& keys, const MetricsSummary& s);

}  // namespace faillite
