#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "faillite/baselines.hpp"
#include "faillite/cluster.hpp"

namespace faillite::testing {

struct RandomCluster {
  std::shared_ptr<const Catalog> catalog;
  std::unique_ptr<ClusterState> state;
};

// Small random catalog and cluster with primaries placed and headroom applied.
RandomCluster random_cluster(std::mt19937_64& rng);

// Plans warm backups and then cold loads after a random server or site
// failure for one policy, and returns every violation found.
std::vector<std::string> policy_violations(PolicyKind kind, std::mt19937_64& rng);

}  // namespace faillite::testing
