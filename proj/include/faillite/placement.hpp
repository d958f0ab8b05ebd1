#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faillite/cluster.hpp"
#include "faillite/units.hpp"

namespace faillite {

// Instance types shared by the warm solver and the failover heuristic. They
// are plain values so planners stay pure functions of their inputs.

struct VariantOption {
  std::string variant_id;
  double accuracy = 0.0;  // normalized
  Resources demand;
  std::map<std::string, double> latency_ms;  // per server class
};

struct CandidateServer {
  std::string server_id;
  std::string site_id;
  std::string server_class = "a2";
  Resources free;
  bool alive = true;
};

struct PlacementApp {
  std::string app_id;
  double rate = 1.0;
  double slo_ms = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> primary_server;
  std::string primary_site;
  // Ascending memory; the last entry is the full-size model.
  std::vector<VariantOption> variants;
  // Servers and sites this app may not use (primary exclusion and site independence).
  std::vector<std::size_t> excluded_servers;
  std::vector<std::string> excluded_sites;

  const VariantOption& full() const { return variants.back(); }
};

// Variant service latency on the server's class plus client network latency;
// infinity when the variant was never profiled for that class.
double placement_latency_ms(const VariantOption& v, const CandidateServer& s, double network_latency_ms);

// Profiled on the server's class and within the app's SLO.
bool meets_slo(const PlacementApp& app, const VariantOption& v, const CandidateServer& s, double network_latency_ms);

// Alive, not the app's primary, and not in its excluded servers or sites.
bool server_allowed(const PlacementApp& app, std::size_t server_index, const CandidateServer& s);

// Builds the planner's view of one app. The candidate variants are the
// family's variants up to and including the app's primary variant.
PlacementApp make_placement_app(const ClusterState& state, std::size_t app);

// One entry per cluster server (dead ones flagged) with current free capacity.
std::vector<CandidateServer> make_candidate_servers(const ClusterState& state);

struct PlanEntry {
  std::size_t app = 0;      // index into the problem's apps
  std::size_t variant = 0;  // index into that app's variants
  std::size_t server = 0;   // index into the problem's servers

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

struct Violation {
  std::string constraint;  // capacity, reserve-budget, primary-exclusion, replica-count, latency-slo, site-independence
  std::string app;
  std::string server;
  std::string detail;
};

}  // namespace faillite
