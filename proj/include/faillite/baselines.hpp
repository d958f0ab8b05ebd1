#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "faillite/cluster.hpp"
#include "faillite/proactive.hpp"
#include "faillite/progressive.hpp"

namespace faillite {

enum class PolicyKind { FailLite, FullWarm, FullCold, FullWarmK };

std::string to_string(PolicyKind k);
PolicyKind parse_policy(const std::string& name);
const std::vector<PolicyKind>& all_policies();

// Everything a planner may look at. `available` marks servers the controller
// believes alive; `critical` marks membership in K.
struct PlanningContext {
  const ClusterState* state = nullptr;
  std::vector<bool> critical;
  std::vector<bool> available;
  double alpha = 0.1;
  bool site_independence = false;
  int replicas_per_app = 1;
  double network_latency_ms = 0.0;
  bool partial_k = false;
  std::size_t exact_budget = 1'000'000;
  std::uint64_t node_limit = 20'000'000;
};

struct WarmAssignment {
  std::size_t app = 0;  // cluster app index
  std::size_t variant = 0;
  std::size_t server = 0;

  friend bool operator==(const WarmAssignment&, const WarmAssignment&) = default;
};

struct ProactiveResult {
  std::vector<WarmAssignment> warm;
  double objective = 0.0;
  bool feasible = true;
  bool exact = true;
  std::vector<std::string> infeasible;
};

struct ColdAssignment {
  std::size_t app = 0;  // cluster app index
  std::size_t selected = 0;
  std::size_t server = 0;
  std::vector<LoadStep> schedule;  // server indices are cluster indices
};

struct ReactiveResult {
  double delta = 0.0;
  std::vector<ColdAssignment> loads;
  std::vector<std::size_t> unrecovered;
};

class FailoverPolicy {
 public:
  virtual ~FailoverPolicy() = default;
  virtual PolicyKind kind() const = 0;
  // Warm backups placed in steady state.
  virtual ProactiveResult plan_proactive(const PlanningContext& ctx) const = 0;
  // Cold loads for affected apps that have no live warm backup.
  virtual ReactiveResult plan_reactive(const PlanningContext& ctx, const std::vector<std::size_t>& affected,
                                       std::mt19937_64& rng) const = 0;
};

std::unique_ptr<FailoverPolicy> make_policy(PolicyKind kind);

// Planner view of the cluster restricted to `apps` (cluster indices).
WarmPlacementProblem make_warm_problem(const PlanningContext& ctx, const std::vector<std::size_t>& apps);
FailoverRequest make_failover_request(const PlanningContext& ctx, const std::vector<std::size_t>& apps);

// Order used by the full-size planners: K first, then descending rate times
// full-size accuracy, then app id.
std::vector<std::size_t> baseline_order(const ClusterState& state, const std::vector<bool>& critical,
                                        std::vector<std::size_t> apps);

// Full-size warm backups for every app, worst-fit, K first; unplaceable apps
// are skipped.
ProactiveResult plan_full_warm(const PlanningContext& ctx);
// Full-size warm backups for K only.
ProactiveResult plan_full_warm_k(const PlanningContext& ctx);
// Full-size cold loads at failure time: affected K apps first, then the rest
// in seeded-random order, worst-fit until nothing else fits.
ReactiveResult plan_full_cold(const PlanningContext& ctx, const std::vector<std::size_t>& affected,
                              std::mt19937_64& rng);

}  // namespace faillite
