#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "faillite/baselines.hpp"
#include "faillite/cluster.hpp"
#include "faillite/detector.hpp"
#include "faillite/metrics.hpp"
#include "faillite/timeline.hpp"

namespace faillite {

// Raised when the event loop detects a broken invariant.
class InternalFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class EventKind { Heartbeat, DetectorCheck, InjectFailure, InjectSiteFailure, LoadComplete, TrafficSwitch, NotifyClient, Restore };

std::string to_string(EventKind k);

struct Event {
  Micros time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Heartbeat;
  std::size_t target = 0;  // server, site, app or load index depending on kind
  std::size_t server = 0;
  std::size_t variant = 0;
  std::uint64_t generation = 0;

  // Min-heap order on (time, seq).
  friend bool operator>(const Event& a, const Event& b) {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

struct Injection {
  enum class Kind { ServerFailure, SiteFailure, ServerRestore, SiteRestore };
  Kind kind = Kind::ServerFailure;
  Micros time = 0;
  // Explicit targets, or a selector: pick = "random" or "rotate" with count.
  std::vector<std::string> targets;
  std::string pick;
  int count = 1;
};

struct SimSettings {
  PolicyKind policy = PolicyKind::FailLite;
  double k_fraction = 0.5;
  bool critical_from_cluster = false;  // use the cluster file's critical flags instead of k_fraction
  double alpha = 0.1;
  std::optional<double> headroom = 0.2;  // nullopt keeps the cluster as loaded
  bool site_independence = false;
  int replicas_per_app = 1;
  double network_latency_ms = 0.0;
  Micros notify_latency = from_ms(10);
  DetectorConfig detector;
  Micros heartbeat_jitter = 0;  // uniform in [0, jitter] added to each beat
  Micros horizon = from_ms(30'000);
  bool partial_k = false;
  std::size_t exact_budget = 1'000'000;
  std::uint64_t node_limit = 20'000'000;
  bool check_invariants = true;
  std::vector<Injection> injections;
};

struct RunResult {
  std::vector<FailoverTimeline> timelines;
  RunMetrics metrics;
  ProactiveResult proactive;
  std::vector<std::string> log;  // one JSON object per line
  std::size_t events = 0;
};

// Deterministic choice of K: apps ordered by a hash of their id, the first
// ceil(k_fraction * N) are critical.
std::vector<bool> select_critical(const ClusterState& state, double k_fraction);

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull);

// Runs one experiment on a copy of `cluster`. The headroom control, warm
// planning and injections all happen inside the run.
RunResult simulate(const ClusterState& cluster, const SimSettings& settings, std::uint64_t seed,
                   const std::string& scenario_hash = "");

}  // namespace faillite
