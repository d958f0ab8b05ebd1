#include "faillite/progressive.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "faillite/proactive.hpp"
#include "support/oracles.hpp"

namespace faillite {
namespace {

VariantOption opt(const std::string& id, double acc, double mib) {
  VariantOption v;
  v.variant_id = id;
  v.accuracy = acc;
  v.demand = {mib, 0.0};
  v.latency_ms["a2"] = 10.0;
  return v;
}

CandidateServer srv(const std::string& id, double mib, bool alive = true) {
  CandidateServer s;
  s.server_id = id;
  s.site_id = "site-" + id;
  s.free = {mib, 1.0};
  s.alive = alive;
  return s;
}

PlacementApp app(const std::string& id, std::vector<VariantOption> variants) {
  PlacementApp a;
  a.app_id = id;
  a.primary_server = 0;
  a.variants = std::move(variants);
  return a;
}

// Request with a dead primary at index 0 followed by `free` servers.
FailoverRequest request(std::vector<double> free, std::vector<PlacementApp> apps) {
  FailoverRequest r;
  r.servers.push_back(srv("dead", 0, false));
  for (std::size_t k = 0; k < free.size(); ++k) r.servers.push_back(srv("s" + std::to_string(k + 1), free[k]));
  r.apps = std::move(apps);
  return r;
}

// Replays the schedule on each server: every initial load is resident first,
// then upgrades run one at a time in placement order, holding both variants
// until the switch. Returns the worst overshoot in MiB (<= 0 when it fits).
double replay_overshoot(const FailoverDecision& d, const FailoverRequest& r) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.servers.size(); ++k) {
    double resident = 0.0;
    std::vector<std::size_t> here;
    for (std::size_t i : d.order) {
      if (d.placement[i] == k) here.push_back(i);
    }
    for (std::size_t i : here) resident += r.apps[i].variants[d.schedule[i].front().variant].demand.mem_mib;
    worst = std::max(worst, resident - r.servers[k].free.mem_mib);
    for (std::size_t i : here) {
      if (d.schedule[i].size() < 2) continue;
      const double big = r.apps[i].variants[d.schedule[i][1].variant].demand.mem_mib;
      worst = std::max(worst, resident + big - r.servers[k].free.mem_mib);
      resident += big - r.apps[i].variants[0].demand.mem_mib;
    }
  }
  return worst;
}

TEST(DemandRatio, Arithmetic) {
  auto r = request({600, 400}, {app("x", {opt("a", 0.5, 300), opt("b", 1, 500)}), app("y", {opt("c", 1, 300)})});
  EXPECT_DOUBLE_EQ(demand_ratio(r), 1.25);
  r.servers[1].free.mem_mib = 200;
  r.servers[2].free.mem_mib = 200;
  EXPECT_DOUBLE_EQ(demand_ratio(r), 0.5);
  r.apps.clear();
  EXPECT_EQ(demand_ratio(r), std::numeric_limits<double>::infinity());
}

TEST(DemandRatio, IgnoresDeadServers) {
  auto r = request({500}, {app("x", {opt("a", 1, 1000)})});
  r.servers[0].free.mem_mib = 10'000;
  EXPECT_DOUBLE_EQ(demand_ratio(r), 0.5);
}

TEST(MatchVariant, Examples) {
  const std::vector<VariantOption> half = {opt("h", 0.9, 50), opt("f", 1.0, 100)};
  EXPECT_EQ(match_variant(half, 1.0), 1u);
  EXPECT_EQ(match_variant(half, 7.0), 1u);
  EXPECT_EQ(match_variant(half, 0.5), 0u);
  const std::vector<VariantOption> three = {opt("a", 0.7, 10), opt("b", 0.8, 30), opt("c", 1.0, 100)};
  EXPECT_EQ(match_variant(three, 0.3), 1u);
  EXPECT_EQ(match_variant(three, 0.0), 0u);
}

TEST(MatchVariant, TiesGoToHigherAccuracy) {
  const std::vector<VariantOption> vs = {opt("a", 0.7, 30), opt("b", 1.0, 100)};
  EXPECT_EQ(match_variant(vs, 0.65), 1u);
}

TEST(PlanFailover, AmpleCapacityPicksFullOnEmptiestServer) {
  const auto r = request({500, 900, 700}, {app("x", {opt("s", 0.8, 100), opt("f", 1, 300)})});
  const auto d = progressive_schedule(plan_failover(r), r);
  EXPECT_EQ(d.placement[0], 2u);
  EXPECT_EQ(d.selection[0], 1u);
  EXPECT_EQ(d.schedule[0], (std::vector<LoadStep>{{0, 2, LoadStepKind::Initial}, {1, 2, LoadStepKind::Upgrade}}));
}

TEST(PlanFailover, TightCapacityFallsBackToSmallest) {
  const auto r = request({150}, {app("x", {opt("s", 0.8, 100), opt("m", 0.9, 200), opt("f", 1, 300)})});
  const auto d = progressive_schedule(plan_failover(r), r);
  EXPECT_EQ(d.selection[0], 0u);
  EXPECT_EQ(d.schedule[0], (std::vector<LoadStep>{{0, 1, LoadStepKind::Initial}}));
}

TEST(PlanFailover, UnplaceableAppIsUnrecovered) {
  const auto r = request({50}, {app("x", {opt("s", 1, 100)})});
  const auto d = plan_failover(r);
  EXPECT_FALSE(d.recovered(0));
  EXPECT_EQ(d.unrecovered(), std::vector<std::size_t>{0});
}

TEST(PlanFailover, NeverUsesThePrimaryOrDeadServers) {
  auto r = request({1000}, {app("x", {opt("s", 1, 100)})});
  r.apps[0].primary_server = 1;
  EXPECT_FALSE(plan_failover(r).recovered(0));
}

TEST(PlanFailover, HalfCapacityToyMatchesOracle) {
  const std::vector<VariantOption> fam = {opt("s", 0.8, 30), opt("f", 1.0, 100)};
  const auto r = request({100}, {app("x", fam), app("y", fam)});
  ASSERT_DOUBLE_EQ(demand_ratio(r), 0.5);
  const auto d = progressive_schedule(plan_failover(r), r);
  const auto best = testing::brute_force_failover(r);
  EXPECT_EQ(best.max_recovered, 2u);
  EXPECT_EQ(d.unrecovered().size(), 0u);
  double obj = 0.0;
  for (std::size_t i = 0; i < 2; ++i) obj += r.apps[i].variants[*d.selection[i]].accuracy;
  EXPECT_DOUBLE_EQ(obj, best.max_objective);
}

TEST(PlanFailover, UpgradePromotesWhenRoomAllows) {
  const std::vector<VariantOption> fam = {opt("s", 0.8, 30), opt("f", 1.0, 100)};
  const auto r = request({500}, {app("x", fam), app("y", fam)});
  const auto d = progressive_schedule(plan_failover(r), r);
  EXPECT_EQ(d.selection[0], 1u);
  EXPECT_EQ(d.selection[1], 1u);
  EXPECT_LE(replay_overshoot(d, r), 1e-9);
}

TEST(PlanFailover, WorstFitTrace) {
  // Full-size demand 600 against 600 free gives delta 1: each app takes its
  // full variant on the emptiest server at its turn.
  const auto r = request({250, 350}, {app("x", {opt("s", 0.5, 50), opt("f", 1, 300)}),
                                      app("y", {opt("s", 0.5, 20), opt("f", 1, 200)})});
  const auto d = plan_failover(r);
  EXPECT_EQ(d.order, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(d.placement[0], 2u);
  EXPECT_EQ(d.selection[0], 1u);
  EXPECT_EQ(d.placement[1], 1u);
  EXPECT_EQ(d.selection[1], 1u);
}

TEST(ProgressiveSchedule, LargeVariantNeedsCoResidency) {
  const std::vector<VariantOption> fam = {opt("small", 0.8, 158), opt("large", 1.0, 806)};
  auto r = request({806}, {app("x", fam)});
  auto d = progressive_schedule(plan_failover(r), r);
  EXPECT_EQ(d.selection[0], 0u);
  r.servers[1].free.mem_mib = 158 + 806;
  d = progressive_schedule(plan_failover(r), r);
  EXPECT_EQ(d.selection[0], 1u);
  EXPECT_EQ(d.schedule[0].size(), 2u);
  EXPECT_LE(replay_overshoot(d, r), 1e-9);
}

TEST(ProgressiveSchedule, DowngradesWhenSequenceDoesNotFit) {
  const std::vector<VariantOption> fam = {opt("s", 0.8, 30), opt("f", 1.0, 100)};
  const auto r = request({130}, {app("x", fam), app("y", fam)});
  FailoverDecision d;
  d.selection = {1, 0};
  d.placement = {1, 1};
  d.order = {0, 1};
  d = progressive_schedule(d, r);
  EXPECT_EQ(d.selection[0], 0u);
  EXPECT_LE(replay_overshoot(d, r), 1e-9);
}

TEST(PlanFailoverProperty, FeasibleAndBoundedByOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const auto r = testing::random_failover_request(rng);
    const auto d = progressive_schedule(plan_failover(r), r);
    const auto best = testing::brute_force_failover(r);

    WarmPlacementProblem as_problem;
    as_problem.apps = r.apps;
    as_problem.servers = r.servers;
    as_problem.network_latency_ms = r.network_latency_ms;
    PlacementPlan as_plan;
    double obj = 0.0;
    std::size_t placed = 0;
    for (std::size_t i = 0; i < r.apps.size(); ++i) {
      if (!d.placement[i]) continue;
      ++placed;
      as_plan.warm.push_back({i, *d.selection[i], *d.placement[i]});
      obj += r.apps[i].rate * r.apps[i].variants[*d.selection[i]].accuracy;
      ASSERT_FALSE(d.schedule[i].empty());
      EXPECT_EQ(d.schedule[i].front().variant, 0u);
      EXPECT_EQ(d.schedule[i].back().variant, *d.selection[i]);
    }
    EXPECT_TRUE(validate_plan(as_plan, as_problem, ValidationMode::Cold).empty()) << "trial " << trial;
    EXPECT_LE(replay_overshoot(d, r), 1e-9) << "trial " << trial;
    EXPECT_LE(placed, best.max_recovered);
    EXPECT_LE(obj, best.max_objective + 1e-9);
  }
}

TEST(PlanFailoverProperty, UpgradeNeverLowersAccuracy) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const auto r = testing::random_failover_request(rng);
    const auto d = plan_failover(r);
    const double delta = demand_ratio(r);
    for (std::size_t i = 0; i < r.apps.size(); ++i) {
      if (!d.placement[i]) continue;
      const auto matched = match_variant(r.apps[i].variants, delta);
      // The variant walk only goes down, so anything above the match came from an upgrade.
      if (*d.selection[i] > matched) EXPECT_GE(r.apps[i].variants[*d.selection[i]].accuracy, r.apps[i].variants[matched].accuracy);
    }
  }
}

TEST(PlanFailoverProperty, SingleAppRecoveredWheneverSmallestFits) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto r = testing::random_failover_request(rng, 1);
    auto smallest_only = r;
    smallest_only.apps[0].variants.resize(1);
    const auto best = testing::brute_force_failover(smallest_only);
    EXPECT_EQ(plan_failover(r).recovered(0), best.max_recovered == 1) << "trial " << trial;
  }
}

}  // namespace
}  // namespace faillite
