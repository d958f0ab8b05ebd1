#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faillite/catalog.hpp"
#include "faillite/cluster.hpp"
#include "faillite/simengine.hpp"

namespace faillite {

constexpr int kScenarioSchemaVersion = 1;

struct Scenario {
  std::string name;
  std::optional<std::string> catalog_path;  // built-in catalog when unset
  std::optional<std::string> cluster_path;
  nlohmann::json cluster_inline;            // used when cluster_path is unset
  SimSettings settings;
  std::uint64_t seed = 1;
  int repeats = 1;
};

// Strict parse; relative paths resolve against base_dir.
Scenario scenario_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

Injection injection_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Injection& inj);

// Scenario plus the catalog and cluster it references.
struct LoadedScenario {
  Scenario scenario;
  std::shared_ptr<const Catalog> catalog;
  std::shared_ptr<const ClusterState> cluster;

  // FNV-1a over the canonical scenario, catalog and cluster documents.
  std::string hash() const;
};

LoadedScenario load_inputs(Scenario s);

// Replaces every failure injection with one site failure of `count` random
// sites at the time of the first failure injection.
void set_failed_sites(Scenario& s, int count);

}  // namespace faillite
