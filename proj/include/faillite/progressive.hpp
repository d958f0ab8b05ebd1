#pragma once

#include <optional>
#include <vector>

#include "faillite/placement.hpp"

namespace faillite {

// Affected apps without a live warm backup, and the servers they may use.
struct FailoverRequest {
  std::vector<PlacementApp> apps;
  std::vector<CandidateServer> servers;
  double network_latency_ms = 0.0;
  // Require the smallest and selected variants to be co-resident while the
  // upgrade loads (progressive loading). Off for warm-placement fallback.
  bool co_residency = true;
};

enum class LoadStepKind { Initial, Upgrade };

struct LoadStep {
  std::size_t variant = 0;
  std::size_t server = 0;
  LoadStepKind kind = LoadStepKind::Initial;

  friend bool operator==(const LoadStep&, const LoadStep&) = default;
};

struct FailoverDecision {
  double delta = 0.0;
  std::vector<std::optional<std::size_t>> selection;  // per request app
  std::vector<std::optional<std::size_t>> placement;  // per request app
  std::vector<std::vector<LoadStep>> schedule;        // filled by progressive_schedule
  std::vector<std::size_t> order;                     // placement order (app indices)

  bool recovered(std::size_t app) const { return placement[app].has_value(); }
  std::vector<std::size_t> unrecovered() const;
};

// Free memory over available servers divided by the full-size memory demand of
// the affected apps; +infinity when nothing is affected.
double demand_ratio(const FailoverRequest& request);

// Variant whose memory is closest to delta * full; full size when delta >= 1.
// Ties go to the more accurate variant.
std::size_t match_variant(const std::vector<VariantOption>& variants, double delta);

// Demand-ratio matching, worst-fit placement walking variants downward, then
// an upgrade pass on each chosen server.
FailoverDecision plan_failover(const FailoverRequest& request);

// Builds per-app load schedules: the smallest variant first, then the selected
// one. Upgrades on a server run one at a time in placement order; a selection
// that cannot be co-resident with its smallest variant is downgraded.
FailoverDecision progressive_schedule(FailoverDecision decision, const FailoverRequest& request);

}  // namespace faillite
