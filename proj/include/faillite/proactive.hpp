#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faillite/placement.hpp"

namespace faillite {

class CapacityPlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WarmPlacementProblem {
  std::vector<PlacementApp> apps;  // the critical set K
  std::vector<CandidateServer> servers;
  double alpha = 0.1;
  bool site_independence = false;
  int replicas_per_app = 1;
  double network_latency_ms = 0.0;
  // Drop apps that cannot be placed instead of failing the whole plan.
  bool partial_k = false;
  // Exact search runs while sum(|variants|) * |servers| stays within budget.
  std::size_t exact_budget = 1'000'000;
  // Search nodes before the incumbent is returned unproven.
  std::uint64_t node_limit = 20'000'000;
  bool fallback_enabled = true;
};

struct PlacementPlan {
  std::vector<PlanEntry> warm;
  double objective = 0.0;
  bool feasible = true;
  bool exact = true;  // false when produced by the fallback or cut off
  std::vector<std::string> infeasible;  // reasons, one per failing app or constraint
  std::vector<std::size_t> dropped;     // apps skipped under partial_k
};

// Maximizes sum(a_ij * q_i) over warm backups for K subject to per-server
// capacity, the global (1 - alpha) budget, primary/site exclusion, one backup
// per app and latency SLOs. Branch-and-bound with a multiple-choice knapsack
// LP bound; ties prefer smaller total memory.
PlacementPlan solve_warm(const WarmPlacementProblem& problem);

// Heuristic path used when the instance is over the exact budget.
PlacementPlan solve_warm_heuristic(const WarmPlacementProblem& problem);

// Excludes every server in the primary's site for each app and requires
// replicas to land in distinct sites.
WarmPlacementProblem extend_site_independence(WarmPlacementProblem problem);

enum class ValidationMode {
  Warm,  // every constraint, plus site independence when set
  Cold,  // capacity, exclusion and SLO; at most one entry per app, no reserve
};

std::vector<Violation> validate_plan(const PlacementPlan& plan, const WarmPlacementProblem& problem,
                                     ValidationMode mode = ValidationMode::Warm);

// Objective of a set of entries: sum of accuracy * rate.
double plan_objective(const std::vector<PlanEntry>& entries, const std::vector<PlacementApp>& apps);

}  // namespace faillite
