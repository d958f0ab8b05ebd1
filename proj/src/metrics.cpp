#include "faillite/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace faillite {

std::string to_string(BackupKind k) {
  switch (k) {
    case BackupKind::None:
      return "none";
    case BackupKind::Warm:
      return "warm";
    case BackupKind::Cold:
      return "cold";
  }
  return "none";
}

RunMetrics compute_metrics(const std::vector<FailoverTimeline>& timelines) {
  RunMetrics m;
  m.affected = timelines.size();
  double mttr_sum = 0.0;
  double red_sum = 0.0;
  for (const auto& t : timelines) {
    AppRow row;
    row.app_id = t.app_id;
    row.critical = t.critical;
    row.recovered = t.recovered();
    row.mttr_ms = t.mttr_ms();
    row.acc_primary = t.acc_primary;
    row.acc_backup = t.recovered() ? t.acc_backup : 0.0;
    row.backup = to_string(t.backup);
    if (row.recovered) {
      ++m.recovered;
      mttr_sum += *row.mttr_ms;
      red_sum += (1.0 - row.acc_backup / row.acc_primary) * 100.0;
    }
    m.rows.push_back(std::move(row));
  }
  if (m.affected == 0) {
    m.undefined = true;
    return m;
  }
  m.recovery_rate = 100.0 * static_cast<double>(m.recovered) / static_cast<double>(m.affected);
  if (m.recovered > 0) {
    m.mean_mttr_ms = mttr_sum / static_cast<double>(m.recovered);
    m.acc_reduction = red_sum / static_cast<double>(m.recovered);
  }
  return m;
}

namespace {

void accumulate(Stat& s, double v, std::size_t n) {
  if (n == 0) {
    s = {v, v, v};
    return;
  }
  s.mean += v;
  s.min = std::min(s.min, v);
  s.max = std::max(s.max, v);
}

}  // namespace

MetricsSummary aggregate(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  MetricsSummary s;
  s.policy = runs.front().policy;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.policy != s.policy) {
      throw std::invalid_argument("aggregate: runs mix policies '" + s.policy + "' and '" + r.policy +
                                  "'; group by policy first");
    }
    ++s.runs;
    if (r.undefined) {
      ++s.undefined_runs;
      continue;
    }
    accumulate(s.recovery_rate, r.recovery_rate, n);
    accumulate(s.mean_mttr_ms, r.mean_mttr_ms, n);
    accumulate(s.acc_reduction, r.acc_reduction, n);
    ++n;
  }
  if (n > 0) {
    s.recovery_rate.mean /= static_cast<double>(n);
    s.mean_mttr_ms.mean /= static_cast<double>(n);
    s.acc_reduction.mean /= static_cast<double>(n);
  }
  return s;
}

std::vector<MetricsSummary> aggregate_by_policy(const std::vector<RunMetrics>& runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunMetrics>> groups;
  for (const auto& r : runs) {
    if (!groups.count(r.policy)) order.push_back(r.policy);
    groups[r.policy].push_back(r);
  }
  std::vector<MetricsSummary> out;
  for (const auto& p : order) out.push_back(aggregate(groups[p]));
  return out;
}

nlohmann::json to_json(const RunMetrics& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : m.rows) {
    rows.push_back({{"app_id", r.app_id},
                    {"critical", r.critical},
                    {"recovered", r.recovered},
                    {"mttr_ms", r.mttr_ms ? nlohmann::json(*r.mttr_ms) : nlohmann::json(nullptr)},
                    {"acc_primary", r.acc_primary},
                    {"acc_backup", r.acc_backup},
                    {"backup", r.backup}});
  }
  return {{"schema_version", kMetricsSchemaVersion},
          {"policy", m.policy},
          {"scenario_hash", m.scenario_hash},
          {"seed", m.seed},
          {"accuracy_base", "normalized per family"},
          {"affected", m.affected},
          {"recovered", m.recovered},
          {"undefined", m.undefined},
          {"recovery_rate_pct", m.recovery_rate},
          {"mean_mttr_ms", m.mean_mttr_ms},
          {"acc_reduction_pct", m.acc_reduction},
          {"apps", rows}};
}

nlohmann::json to_json(const MetricsSummary& s) {
  auto stat = [](const Stat& x) { return nlohmann::json{{"mean", x.mean}, {"min", x.min}, {"max", x.max}}; };
  return {{"schema_version", kMetricsSchemaVersion},
          {"policy", s.policy},
          {"runs", s.runs},
          {"undefined_runs", s.undefined_runs},
          {"recovery_rate_pct", stat(s.recovery_rate)},
          {"mean_mttr_ms", stat(s.mean_mttr_ms)},
          {"acc_reduction_pct", stat(s.acc_reduction)}};
}

void write_rows_csv(std::ostream& out, const RunMetrics& m) {
  out << "app_id,critical,recovered,mttr_ms,acc_primary,acc_backup,backup\n";
  out << std::setprecision(10);
  for (const auto& r : m.rows) {
    out << r.app_id << ',' << (r.critical ? 1 : 0) << ',' << (r.recovered ? 1 : 0) << ',';
    if (r.mttr_ms) out << *r.mttr_ms;
    out << ',' << r.acc_primary << ',' << r.acc_backup << ',' << r.backup << '\n';
  }
}

void write_summary_csv_header(std::ostream& out, const std::vector<std::string>& key_columns) {
  for (const auto& k : key_columns) out << k << ',';
  out << "policy,runs,undefined_runs,recovery_rate_mean,recovery_rate_min,recovery_rate_max,"
         "mttr_ms_mean,mttr_ms_min,mttr_ms_max,acc_reduction_mean,acc_reduction_min,acc_reduction_max\n";
}

void write_summary_csv_row(std::ostream& out, const std::vector<std::string>& keys, const MetricsSummary& s) {
  std::ostringstream line;
  line << std::setprecision(10);
  for (const auto& k : keys) line << k << ',';
  line << s.policy << ',' << s.runs << ',' << s.undefined_runs;
  for (const Stat* x : {&s.recovery_rate, &s.mean_mttr_ms, &s.acc_reduction}) {
    line << ',' << x->mean << ',' << x->min << ',' << x->max;
  }
  out << line.str() << '\n';
}

}  // namespace faillite
