// Acceptance checks. Usage: acceptance N, with N in 1..9. Prints one
// PASS/FAIL line and exits non-zero on failure.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "faillite/cli.hpp"
#include "faillite/detector.hpp"
#include "faillite/experiment.hpp"
#include "support/oracles.hpp"
#include "support/policy_check.hpp"

namespace faillite {
namespace {

namespace fs = std::filesystem;

const std::string kData = FAILLITE_DATA_DIR;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", v);
  return buf;
}

std::string ms(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1fms", v);
  return buf;
}

Verdict exact_solver() {
  Verdict v;
  std::mt19937_64 rng(20240601);
  const auto start = std::chrono::steady_clock::now();
  int mismatches = 0, feasible = 0;
  for (int n = 0; n < 200; ++n) {
    const WarmPlacementProblem p = testing::random_warm_problem(rng);
    const auto oracle = testing::brute_force_warm(p);
    const PlacementPlan plan = solve_warm(p);
    if (oracle.has_value() != plan.feasible || (oracle && (*oracle != plan.objective || !plan.exact))) ++mismatches;
    feasible += oracle.has_value() ? 1 : 0;
  }
  const double secs = seconds_since(start);
  v.detail << "200 instances (" << feasible << " feasible), " << mismatches << " mismatches, " << secs << " s";
  v.require(mismatches == 0, "objective equals brute force");
  v.require(secs < 5.0, "runtime < 5 s");
  return v;
}

Verdict plan_validity() {
  Verdict v;
  for (PolicyKind k : all_policies()) {
    std::mt19937_64 rng(7 + static_cast<int>(k));
    std::size_t violations = 0;
    std::string first;
    for (int n = 0; n < 1000; ++n) {
      const auto found = testing::policy_violations(k, rng);
      if (!found.empty() && first.empty()) first = found.front();
      violations += found.size();
    }
    v.detail << to_string(k) << "=" << violations << " ";
    v.require(violations == 0, to_string(k) + ": " + first);
  }
  return v;
}

std::map<PolicyKind, MetricsSummary> run_all(const LoadedScenario& in) {
  std::map<PolicyKind, MetricsSummary> out;
  for (PolicyKind k : all_policies()) {
    LoadedScenario run = in;
    run.scenario.settings.policy = k;
    std::vector<RunMetrics> m;
    for (auto& r : run_repeats(run)) m.push_back(r.metrics);
    out[k] = aggregate(m);
  }
  return out;
}

Verdict testbed() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const LoadedScenario in = load_inputs(load_scenario(kData + "/testbed6.json"));
  const auto s = run_all(in);
  const double secs = seconds_since(start);
  const auto& fl = s.at(PolicyKind::FailLite);
  const auto& fw = s.at(PolicyKind::FullWarm);
  const auto& fc = s.at(PolicyKind::FullCold);
  const auto& fwk = s.at(PolicyKind::FullWarmK);
  v.detail << fl.runs << " seeds; recovery faillite " << pct(fl.recovery_rate.mean) << " full-warm "
           << pct(fw.recovery_rate.mean) << " full-cold " << pct(fc.recovery_rate.mean) << "; mttr faillite "
           << ms(fl.mean_mttr_ms.mean) << " full-warm-k " << ms(fwk.mean_mttr_ms.mean) << "; acc reduction "
           << pct(fl.acc_reduction.mean) << "; " << secs << " s";
  v.require(fl.runs == 6, "6 seeds");
  v.require(fl.recovery_rate.min == 100.0, "faillite recovery 100% in every run");
  v.require(fw.recovery_rate.mean >= 75.0 && fw.recovery_rate.mean <= 95.0, "full-warm in [75, 95]");
  v.require(fc.recovery_rate.mean >= 85.0 && fc.recovery_rate.mean <= 100.0, "full-cold in [85, 100]");
  v.require(fl.mean_mttr_ms.mean <= 0.6 * fwk.mean_mttr_ms.mean, "faillite mttr <= 0.6x full-warm-k");
  v.require(fl.acc_reduction.mean <= 1.5, "accuracy reduction <= 1.5%");
  v.require(secs < 30.0, "runtime < 30 s");
  return v;
}

Verdict headroom_sweep() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const LoadedScenario in = load_inputs(load_scenario(kData + "/large100_headroom.json"));
  const auto rows = sweep(in, SweepAxis::Headroom, {"0.1", "0.2", "0.3", "0.4", "0.5"}, {PolicyKind::FailLite});
  for (const auto& r : rows) {
    v.detail << "h=" << r.value << " " << pct(r.summary.recovery_rate.mean) << " ";
    v.require(r.summary.recovery_rate.min == 100.0, "faillite recovery 100% at headroom " + r.value);
  }
  const auto at10 = sweep(in, SweepAxis::Headroom, {"0.1"},
                          {PolicyKind::FailLite, PolicyKind::FullWarm, PolicyKind::FullWarmK, PolicyKind::FullCold});
  const double acc = at10[0].summary.acc_reduction.mean;
  const double fw = at10[1].summary.recovery_rate.mean;
  const double fwk = at10[2].summary.recovery_rate.mean;
  const double fc = at10[3].summary.recovery_rate.mean;
  const double secs = seconds_since(start);
  v.detail << "| at 10%: acc reduction " << pct(acc) << ", full-warm " << pct(fw) << " full-warm-k " << pct(fwk)
           << " full-cold " << pct(fc) << "; " << secs << " s";
  v.require(acc <= 6.0, "accuracy reduction <= 6% at 10%");
  v.require(fw < fwk && fwk < fc, "full-warm < full-warm-k < full-cold");
  v.require(std::abs(fw - 50.5) <= 10.0, "full-warm within 10 points of 50.5");
  v.require(std::abs(fwk - 66.0) <= 10.0, "full-warm-k within 10 points of 66");
  v.require(std::abs(fc - 79.8) <= 10.0, "full-cold within 10 points of 79.8");
  v.require(secs < 300.0, "runtime < 5 min");
  return v;
}

// Two servers in two sites with one convnext app on the first.
struct SmallCase {
  std::shared_ptr<const Catalog> catalog = std::make_shared<const Catalog>(reference_catalog());
  std::unique_ptr<ClusterState> state = std::make_unique<ClusterState>(catalog.get());

  explicit SmallCase(const std::string& primary) {
    for (const char* id : {"A", "B"}) {
      Server s;
      s.server_id = id;
      s.site_id = std::string("site-") + id;
      s.capacity = {16384.0, 1.0};
      state->add_server(s);
    }
    Application a;
    a.app_id = "cam";
    a.family_id = "convnext";
    a.primary_variant = *catalog->family("convnext").index_of(primary);
    a.primary_server = 0;
    state->add_app(a);
    state->load(0, 0, a.primary_variant, Tier::Primary);
  }

  FailoverTimeline run(PolicyKind policy, double k_fraction) const {
    SimSettings s;
    s.policy = policy;
    s.k_fraction = k_fraction;
    s.alpha = 0.0;
    s.headroom.reset();
    Injection inj;
    inj.time = from_ms(1000);
    inj.targets = {"A"};
    s.injections = {inj};
    return simulate(*state, s, 1).timelines.at(0);
  }
};

Verdict mttr_decomposition() {
  Verdict v;
  const SimSettings defaults;
  const double notify = to_ms(defaults.notify_latency);

  const FailoverTimeline warm = SmallCase("convnext_large").run(PolicyKind::FailLite, 1.0);
  const double warm_mttr = warm.mttr_ms().value_or(-1.0);
  const double detection = to_ms(warm.detection_time.value_or(0) - warm.failure_time);
  v.detail << "warm " << ms(warm_mttr) << " (detection " << ms(detection) << " + notify " << ms(notify) << ")";
  v.require(warm.backup == BackupKind::Warm, "warm backup used");
  v.require(warm_mttr == detection + notify, "warm mttr == detection + notify");
  v.require(warm_mttr >= 30.0 && warm_mttr <= 150.0, "warm mttr in [30, 150] ms");

  // Every warm failover in the reference scenario decomposes exactly.
  const LoadedScenario in = load_inputs(load_scenario(kData + "/testbed6.json"));
  std::size_t warm_count = 0, off = 0;
  for (const auto& r : run_repeats(in)) {
    for (const auto& t : r.timelines) {
      if (t.backup != BackupKind::Warm || !t.recovered()) continue;
      ++warm_count;
      const bool exact = *t.recovery_time - *t.detection_time == in.scenario.settings.notify_latency;
      if (!exact || *t.mttr_ms() < 30.0 || *t.mttr_ms() > 150.0) ++off;
    }
  }
  v.detail << "; testbed warm failovers " << warm_count << " off " << off;
  v.require(warm_count > 0 && off == 0, "testbed warm mttr == detection + notify in [30, 150]");

  const FailoverTimeline cold = SmallCase("convnext_tiny").run(PolicyKind::FullCold, 0.0);
  const double cold_mttr = cold.mttr_ms().value_or(-1.0);
  v.detail << "; cold 158 MiB " << ms(cold_mttr);
  v.require(cold_mttr >= 1000.0 && cold_mttr <= 1600.0, "cold 158 MiB mttr in [1000, 1600] ms");

  const SmallCase large("convnext_large");
  const double progressive = large.run(PolicyKind::FailLite, 0.0).mttr_ms().value_or(-1.0);
  const double direct = large.run(PolicyKind::FullCold, 0.0).mttr_ms().value_or(-1.0);
  const double cut = 100.0 * (1.0 - progressive / direct);
  v.detail << "; progressive " << ms(progressive) << " vs direct " << ms(direct) << " (-" << pct(cut) << ")";
  v.require(progressive > 0.0 && cut >= 60.0, "progressive cuts mttr by >= 60%");
  return v;
}

Verdict site_sweep() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const LoadedScenario in = load_inputs(load_scenario(kData + "/large100_sites.json"));
  const auto rows = sweep(in, SweepAxis::FailedSites, {"1", "2", "3", "4", "5", "6", "7"},
                          {PolicyKind::FailLite, PolicyKind::FullCold});
  double fl5 = 0.0, fc5 = 0.0;
  for (std::size_t r = 0; r < rows.size(); r += 2) {
    const int sites = std::stoi(rows[r].value);
    const double fl = rows[r].summary.recovery_rate.mean;
    const double fc = rows[r + 1].summary.recovery_rate.mean;
    v.detail << sites << ":" << pct(fl) << "/" << pct(fc) << " ";
    if (sites <= 5) v.require(rows[r].summary.recovery_rate.min == 100.0, "faillite 100% at " + rows[r].value + " sites");
    if (sites == 5) {
      fl5 = fl;
      fc5 = fc;
    }
  }
  const double secs = seconds_since(start);
  v.detail << "(faillite/full-cold); gain at 5 sites " << fl5 - fc5 << " points; " << secs << " s";
  v.require(fl5 - fc5 >= 30.0, "gain >= 30 points at 5 sites");
  v.require(secs < 300.0, "runtime < 5 min");
  return v;
}

// Declaration time of a server crashing at `crash` with heartbeats every
// period and checks at phase + n * interval.
Micros declared_at(const DetectorConfig& cfg, Micros crash) {
  HeartbeatDetector d(cfg);
  d.register_server("s", 0);
  Micros next_hb = cfg.period;
  for (Micros t = cfg.check_phase; t < crash + 10 * cfg.check_interval; t += cfg.check_interval) {
    for (; next_hb <= t && next_hb < crash; next_hb += cfg.period) d.record_heartbeat("s", next_hb);
    if (!d.check(t).empty()) return t;
  }
  return -1;
}

Verdict detector() {
  Verdict v;
  const DetectorConfig base;
  const Micros bound = 2 * base.period + base.check_interval;
  const Micros lattice = std::lcm(base.period, base.check_interval);
  Micros worst = 0;
  std::size_t cases = 0, violations = 0;
  for (Micros phase = 0; phase < base.check_interval; phase += 1000) {
    DetectorConfig cfg = base;
    cfg.check_phase = phase;
    const Micros step = phase % 10'000 == 0 ? 1 : 100;
    for (Micros crash = from_ms(500); crash < from_ms(500) + lattice; crash += step) {
      const Micros at = declared_at(cfg, crash);
      ++cases;
      if (at < crash || at - crash > bound) ++violations;
      worst = std::max(worst, at - crash);
    }
  }
  v.detail << cases << " crash/phase points, worst " << ms(to_ms(worst)) << " (bound " << ms(to_ms(bound)) << ")";
  v.require(violations == 0, "latency <= 2T + check interval");

  // Healthy servers with jittered heartbeats never get declared.
  HeartbeatDetector d(base);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<Micros> jitter(0, base.period / 2);
  const int servers = 10;
  const int beats = 100'000;
  for (int k = 0; k < servers; ++k) d.register_server("s" + std::to_string(k), 0);
  std::size_t false_positives = 0, sent = 0;
  Micros next_check = base.check_phase;
  for (int n = 1; n <= beats; ++n) {
    const Micros slot = n * base.period;
    while (next_check < slot) {
      false_positives += d.check(next_check).size();
      next_check += base.check_interval;
    }
    for (int k = 0; k < servers; ++k) {
      d.record_heartbeat("s" + std::to_string(k), slot + jitter(rng));
      ++sent;
    }
  }
  v.detail << "; " << sent << " healthy heartbeats, " << false_positives << " false positives";
  v.require(sent >= 1'000'000 && false_positives == 0, "zero false positives");
  return v;
}

Verdict scalability() {
  Verdict v;
  const BenchPoint p = bench_heuristic(3000, 500, 4, 1);
  v.detail << "3000 apps x 500 servers x 4 variants in " << p.seconds << " s, recovered " << p.recovered;
  v.require(p.seconds < 4.0, "< 4 s");
  return v;
}

std::map<std::string, std::string> run_to_dir(const std::vector<std::string>& args, const fs::path& dir) {
  std::vector<std::string> full = {"faillite"};
  full.insert(full.end(), args.begin(), args.end());
  full.insert(full.end(), {"--out", dir.string()});
  std::ostringstream out, err;
  std::map<std::string, std::string> files;
  if (run_cli(full, out, err) != 0) return files;
  files["stdout"] = out.str();
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

Verdict determinism() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / "faillite_acceptance_determinism";
  const std::vector<std::vector<std::string>> cases = {
      {"run", "--scenario", kData + "/testbed6.json", "--policy", "all"},
      {"run", "--scenario", kData + "/large100_sites.json", "--policy", "faillite,full-cold", "--repeats", "1"},
      {"sweep", "--scenario", kData + "/testbed6.json", "--axis", "alpha", "--values", "0.1,0.4", "--repeats", "2"},
  };
  for (std::size_t c = 0; c < cases.size(); ++c) {
    fs::remove_all(root);
    const auto a = run_to_dir(cases[c], root / "a");
    const auto b = run_to_dir(cases[c], root / "b");
    v.detail << cases[c][0] << " " << fs::path(cases[c][2]).filename().string() << ": " << a.size() << " outputs; ";
    v.require(!a.empty(), "run succeeds");
    v.require(a == b, "byte-identical outputs");
  }
  fs::remove_all(root);
  return v;
}

}  // namespace
}  // namespace faillite

int main(int argc, char** argv) {
  using namespace faillite;
  const std::map<int, std::pair<const char*, std::function<Verdict()>>> criteria = {
      {1, {"exact warm solver matches brute force", exact_solver}},
      {2, {"plans satisfy every constraint", plan_validity}},
      {3, {"reference testbed scenario", testbed}},
      {4, {"headroom sweep on 100 servers", headroom_sweep}},
      {5, {"mttr decomposition", mttr_decomposition}},
      {6, {"site failure sweep", site_sweep}},
      {7, {"detector latency and false positives", detector}},
      {8, {"heuristic scalability", scalability}},
      {9, {"determinism", determinism}},
  };
  const int n = argc > 1 ? std::atoi(argv[1]) : 0;
  const auto it = criteria.find(n);
  if (it == criteria.end()) {
    std::fprintf(stderr, "usage: acceptance N (1..9)\n");
    return 2;
  }
  Verdict v;
  try {
    v = it->second.second();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << "exception: " << e.what();
  }
  std::printf("criterion %d (%s): %s - %s\n", n, it->second.first, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
  return v.pass ? 0 : 1;
}
