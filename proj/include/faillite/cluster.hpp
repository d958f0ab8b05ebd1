#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faillite/catalog.hpp"
#include "faillite/units.hpp"

namespace faillite {

constexpr int kClusterSchemaVersion = 1;

// Primary and Warm entries are steady residents; Serving is a backup that has
// taken over traffic; Loading is an in-flight load that already holds memory.
enum class Tier { Primary, Warm, Serving, Loading };

std::string to_string(Tier t);

struct Residency {
  std::size_t app = 0;
  std::size_t variant = 0;
  Tier tier = Tier::Primary;

  friend bool operator==(const Residency&, const Residency&) = default;
};

struct Server {
  std::string server_id;
  std::string site_id;
  std::string server_class = "a2";
  Resources capacity;
  Resources used;     // sum of loaded demands
  Resources blocked;  // capacity withheld by the headroom control
  std::vector<Residency> loaded;

  Resources free() const { return capacity - used - blocked; }
};

struct Application {
  std::string app_id;
  std::string family_id;
  std::size_t primary_variant = 0;  // index into the family's variants
  std::optional<std::size_t> primary_server;
  bool critical = false;
  double rate = 1.0;
  double slo_ms = 1e9;
};

class ClusterState {
 public:
  ClusterState() = default;
  explicit ClusterState(const Catalog* catalog) : catalog_(catalog) {}

  const Catalog& catalog() const { return *catalog_; }

  std::size_t add_server(Server s);
  std::size_t add_app(Application a);

  const std::vector<Server>& servers() const { return servers_; }
  const Server& server(std::size_t k) const { return servers_.at(k); }
  const std::vector<Application>& apps() const { return apps_; }
  const Application& app(std::size_t i) const { return apps_.at(i); }
  Application& mutable_app(std::size_t i) { return apps_.at(i); }
  const std::map<std::string, std::vector<std::size_t>>& sites() const { return sites_; }

  std::optional<std::size_t> find_server(const std::string& id) const;
  std::optional<std::size_t> find_app(const std::string& id) const;

  bool alive(std::size_t k) const { return alive_.at(k); }
  std::vector<std::size_t> alive_servers() const;

  const ModelFamily& family_of(std::size_t app) const;
  const ModelVariant& variant_of(std::size_t app, std::size_t variant) const;
  const ModelVariant& primary_variant_of(std::size_t app) const;

  // Loads a model onto a live server. Throws SetupError when it does not fit
  // or would duplicate a non-loading entry of the same app.
  void load(std::size_t server, std::size_t app, std::size_t variant, Tier tier);
  // Releases a specific entry; returns false if not resident.
  bool unload(std::size_t server, std::size_t app, std::size_t variant);
  bool set_tier(std::size_t server, std::size_t app, std::size_t variant, Tier tier);
  const Residency* find_residency(std::size_t server, std::size_t app, Tier tier) const;

  // Crash: everything resident is lost. Blocked capacity is kept.
  void kill(std::size_t server);
  void revive(std::size_t server);

  void set_blocked(std::size_t server, Resources blocked);

  Resources total_capacity() const;
  Resources total_free(bool alive_only = true) const;
  Resources total_used() const;

  // free + used + blocked == capacity for every server and both resources.
  bool accounting_consistent() const;

 private:
  const Catalog* catalog_ = nullptr;
  std::vector<Server> servers_;
  std::vector<Application> apps_;
  std::vector<bool> alive_;
  std::map<std::string, std::vector<std::size_t>> sites_;
  std::map<std::string, std::size_t> server_index_;
  std::map<std::string, std::size_t> app_index_;
};

// Worst-fit by free memory, in app order, for every app without a primary
// server. Ties go to the server with fewer residents, then the lower index.
// When `target_util` is given the resulting memory utilization must land
// within five points of it.
void place_primaries(ClusterState& state, std::optional<double> target_util = std::nullopt);

// (1 - alpha) * free capacity summed over live servers.
Resources usable_capacity(const ClusterState& state, double alpha);

// Scales each server's free capacity so the aggregate free capacity equals
// headroom * aggregate capacity, per resource.
void apply_headroom(ClusterState& state, double headroom);

// Parses the cluster file (strict). Apps referencing "largest" or "auto" are
// resolved; primaries with "auto" are placed by place_primaries.
ClusterState cluster_from_json(const nlohmann::json& doc, const Catalog& catalog);
ClusterState load_cluster(const std::string& path, const Catalog& catalog);
nlohmann::json cluster_to_json(const ClusterState& state);

}  // namespace faillite
