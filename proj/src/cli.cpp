#include "faillite/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "faillite/experiment.hpp"

namespace faillite {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string scenario;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  std::string out;
  std::string policy;
  std::optional<double> alpha;
  std::optional<double> k_fraction;
  std::optional<double> headroom;
  std::optional<int> failed_sites;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_policy = true) {
  cmd->add_option("--scenario", f.scenario, "Scenario file (JSON)")->required();
  cmd->add_option("--config", f.config, "Model catalog file; replaces the scenario's catalog");
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--repeats", f.repeats, "Runs per point, seeds seed..seed+repeats-1");
  cmd->add_option("--out", f.out, "Output directory for logs and metrics");
  if (with_policy) {
    cmd->add_option("--policy", f.policy, "faillite, full-warm, full-cold, full-warm-k, a comma list, or all");
  }
  cmd->add_option("--alpha", f.alpha, "Fraction of free capacity kept for cold loads");
  cmd->add_option("--k-fraction", f.k_fraction, "Fraction of apps in the critical set");
  cmd->add_option("--headroom", f.headroom, "Fraction of capacity left free after primaries");
  cmd->add_option("--failed-sites", f.failed_sites, "Replace failures with this many random site failures");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<PolicyKind> parse_policies(const std::string& s) {
  if (s.empty()) return {};
  if (s == "all") return all_policies();
  std::vector<PolicyKind> out;
  for (const auto& p : split_list(s)) out.push_back(parse_policy(p));
  return out;
}

LoadedScenario prepare(const CommonFlags& f) {
  Scenario s = load_scenario(f.scenario);
  if (!f.config.empty()) s.catalog_path = f.config;
  if (f.seed) s.seed = *f.seed;
  if (f.repeats) {
    if (*f.repeats < 1) throw ConfigError("--repeats must be at least 1");
    s.repeats = *f.repeats;
  }
  if (f.alpha) s.settings.alpha = *f.alpha;
  if (f.k_fraction) s.settings.k_fraction = *f.k_fraction;
  if (f.headroom) s.settings.headroom = *f.headroom;
  if (f.failed_sites) set_failed_sites(s, *f.failed_sites);
  if (!(s.settings.alpha >= 0.0 && s.settings.alpha < 1.0)) throw ConfigError("alpha must be in [0, 1)");
  if (!(s.settings.k_fraction >= 0.0 && s.settings.k_fraction <= 1.0)) throw ConfigError("k_fraction must be in [0, 1]");
  return load_inputs(std::move(s));
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << content;
}

int cmd_run(const CommonFlags& f, std::ostream& out) {
  LoadedScenario in = prepare(f);
  std::vector<PolicyKind> policies = parse_policies(f.policy);
  if (policies.empty()) policies = {in.scenario.settings.policy};
  const std::string hash = in.hash();
  if (!f.out.empty()) fs::create_directories(f.out);

  nlohmann::json runs = nlohmann::json::array();
  nlohmann::json summaries = nlohmann::json::array();
  for (PolicyKind p : policies) {
    LoadedScenario run = in;
    run.scenario.settings.policy = p;
    std::vector<RunMetrics> metrics;
    for (auto& r : run_repeats(run)) {
      const RunMetrics& m = r.metrics;
      out << to_string(p) << " seed=" << m.seed << " affected=" << m.affected << " recovered=" << m.recovered;
      if (m.undefined) {
        out << " (no affected apps; metrics undefined)\n";
      } else {
        out << " recovery=" << fmt(m.recovery_rate) << "% mttr=" << fmt(m.mean_mttr_ms, 1)
            << "ms acc_reduction=" << fmt(m.acc_reduction) << "%\n";
      }
      if (!f.out.empty()) {
        const std::string stem = to_string(p) + "_seed" + std::to_string(m.seed);
        std::string log;
        for (const auto& line : r.log) log += line + "\n";
        write_file(fs::path(f.out) / ("run_" + stem + ".jsonl"), log);
        std::ostringstream csv;
        write_rows_csv(csv, m);
        write_file(fs::path(f.out) / ("apps_" + stem + ".csv"), csv.str());
      }
      runs.push_back(to_json(m));
      metrics.push_back(m);
    }
    const MetricsSummary s = aggregate(metrics);
    summaries.push_back(to_json(s));
    if (metrics.size() > 1) {
      out << to_string(p) << " mean over " << s.runs << " runs: recovery=" << fmt(s.recovery_rate.mean)
          << "% mttr=" << fmt(s.mean_mttr_ms.mean, 1) << "ms acc_reduction=" << fmt(s.acc_reduction.mean) << "%\n";
    }
  }
  if (!f.out.empty()) {
    nlohmann::json doc = {{"schema_version", kMetricsSchemaVersion},
                          {"scenario", in.scenario.name},
                          {"scenario_hash", hash},
                          {"runs", runs},
                          {"summary", summaries}};
    write_file(fs::path(f.out) / "metrics.json", doc.dump(2) + "\n");
  }
  return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& axis_name, const std::string& values, std::ostream& out) {
  LoadedScenario in = prepare(f);
  const SweepAxis axis = parse_axis(axis_name);
  std::vector<PolicyKind> policies = parse_policies(f.policy.empty() ? "all" : f.policy);
  const auto rows = sweep(in, axis, split_list(values), policies);

  std::ostringstream csv;
  write_summary_csv_header(csv, {"scenario_hash", to_string(axis)});
  const std::string hash = in.hash();
  out << std::left << std::setw(14) << to_string(axis) << std::setw(13) << "policy" << std::setw(12) << "recovery%"
      << std::setw(12) << "mttr_ms" << "acc_red%\n";
  for (const auto& r : rows) {
    write_summary_csv_row(csv, {hash, r.value}, r.summary);
    out << std::left << std::setw(14) << r.value << std::setw(13) << r.summary.policy << std::setw(12)
        << fmt(r.summary.recovery_rate.mean) << std::setw(12) << fmt(r.summary.mean_mttr_ms.mean, 1)
        << fmt(r.summary.acc_reduction.mean) << "\n";
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    write_file(fs::path(f.out) / ("sweep_" + to_string(axis) + ".csv"), csv.str());
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json runs = nlohmann::json::array();
      for (const auto& m : r.runs) runs.push_back(to_json(m));
      doc.push_back({{"value", r.value}, {"summary", to_json(r.summary)}, {"runs", runs}});
    }
    write_file(fs::path(f.out) / ("sweep_" + to_string(axis) + ".json"),
               nlohmann::json{{"schema_version", kMetricsSchemaVersion}, {"scenario_hash", hash},
                              {"axis", to_string(axis)}, {"points", doc}}
                       .dump(2) +
                   "\n");
  }
  return 0;
}

int cmd_bench(const std::string& sizes, std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
  std::ostringstream csv;
  csv << "apps,servers,variants,seconds,recovered\n";
  out << std::left << std::setw(8) << "apps" << std::setw(9) << "servers" << std::setw(10) << "variants"
      << std::setw(12) << "seconds" << "recovered\n";
  for (const auto& triple : split_list(sizes)) {
    std::size_t a = 0, s = 0, v = 0;
    char x1 = 0, x2 = 0;
    std::istringstream in(triple);
    if (!(in >> a >> x1 >> s >> x2 >> v) || x1 != 'x' || x2 != 'x' || !in.eof()) {
      throw ConfigError("size '" + triple + "' must look like APPSxSERVERSxVARIANTS");
    }
    const BenchPoint p = bench_heuristic(a, s, v, seed);
    csv << p.apps << ',' << p.servers << ',' << p.variants << ',' << p.seconds << ',' << p.recovered << '\n';
    out << std::left << std::setw(8) << p.apps << std::setw(9) << p.servers << std::setw(10) << p.variants
        << std::setw(12) << fmt(p.seconds, 6) << p.recovered << "\n";
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "bench_heuristic.csv", csv.str());
  }
  return 0;
}

int cmd_validate(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  LoadedScenario in = prepare(f);
  if (!f.policy.empty()) {
    const auto pols = parse_policies(f.policy);
    if (pols.size() != 1) throw ConfigError("validate takes a single policy");
    in.scenario.settings.policy = pols.front();
  }
  const auto problems = validate_scenario(in);
  if (problems.empty()) {
    out << "ok: " << in.cluster->servers().size() << " servers, " << in.cluster->apps().size()
        << " apps, scenario hash " << in.hash() << "\n";
    return 0;
  }
  for (const auto& p : problems) err << "invalid: " << p << "\n";
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Failover simulator for edge model serving"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, validate_flags;
  auto* run = app.add_subcommand("run", "Run a scenario and write logs and metrics");
  add_common(run, run_flags);

  auto* sw = app.add_subcommand("sweep", "Sweep one parameter across policies");
  add_common(sw, sweep_flags);
  std::string axis, values;
  sw->add_option("--axis", axis, "headroom, k_fraction, alpha, policy or failed_sites")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();

  auto* bench = app.add_subcommand("bench-heuristic", "Time the failover heuristic on synthetic instances");
  std::string sizes = "10x4x4,1000x500x4,3000x500x4";
  std::uint64_t bench_seed = 1;
  std::string bench_out;
  bench->add_option("--sizes", sizes, "Comma-separated APPSxSERVERSxVARIANTS triples");
  bench->add_option("--seed", bench_seed, "Generator seed");
  bench->add_option("--out", bench_out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Check scenario, catalog and cluster files");
  add_common(validate, validate_flags);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_flags, out);
    if (*sw) return cmd_sweep(sweep_flags, axis, values, out);
    if (*bench) return cmd_bench(sizes, bench_seed, bench_out, out);
    if (*validate) return cmd_validate(validate_flags, out, err);
  } catch (const InternalFault& e) {
    err << "internal fault: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace faillite
