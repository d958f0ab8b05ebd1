#include "faillite/baselines.hpp"

#include <algorithm>

namespace faillite {

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::FailLite:
      return "faillite";
    case PolicyKind::FullWarm:
      return "full-warm";
    case PolicyKind::FullCold:
      return "full-cold";
    case PolicyKind::FullWarmK:
      return "full-warm-k";
  }
  return "unknown";
}

PolicyKind parse_policy(const std::string& name) {
  for (PolicyKind k : all_policies()) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown policy '" + name + "' (expected faillite, full-warm, full-cold or full-warm-k)");
}

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> kAll = {PolicyKind::FailLite, PolicyKind::FullWarm, PolicyKind::FullCold,
                                               PolicyKind::FullWarmK};
  return kAll;
}

namespace {

std::vector<CandidateServer> candidate_servers(const PlanningContext& ctx) {
  auto servers = make_candidate_servers(*ctx.state);
  for (std::size_t k = 0; k < servers.size(); ++k) {
    servers[k].alive = servers[k].alive && (ctx.available.empty() || ctx.available[k]);
  }
  return servers;
}

// Worst-fit of full-size models in the given order; returns (app, server).
std::vector<std::pair<std::size_t, std::size_t>> worst_fit_full(const PlanningContext& ctx,
                                                                 const std::vector<std::size_t>& order,
                                                                 bool exclude_primary_site,
                                                                 std::vector<std::size_t>* skipped) {
  const ClusterState& st = *ctx.state;
  auto servers = candidate_servers(ctx);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i : order) {
    PlacementApp app = make_placement_app(st, i);
    if (exclude_primary_site && !app.primary_site.empty()) app.excluded_sites.push_back(app.primary_site);
    const VariantOption& v = app.full();
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < servers.size(); ++k) {
      if (!server_allowed(app, k, servers[k]) || !servers[k].free.fits(v.demand)) continue;
      if (!meets_slo(app, v, servers[k], ctx.network_latency_ms)) continue;
      if (!best || servers[k].free.mem_mib > servers[*best].free.mem_mib + kCapacityEps) best = k;
    }
    if (!best) {
      if (skipped) skipped->push_back(i);
      continue;
    }
    servers[*best].free -= v.demand;
    out.emplace_back(i, *best);
  }
  return out;
}

ProactiveResult warm_full_size(const PlanningContext& ctx, bool k_only) {
  std::vector<std::size_t> apps;
  for (std::size_t i = 0; i < ctx.state->apps().size(); ++i) {
    if (!k_only || ctx.critical[i]) apps.push_back(i);
  }
  const auto order = baseline_order(*ctx.state, ctx.critical, std::move(apps));
  ProactiveResult r;
  std::vector<std::size_t> skipped;
  for (const auto& [i, k] : worst_fit_full(ctx, order, ctx.site_independence, &skipped)) {
    r.warm.push_back({i, ctx.state->app(i).primary_variant, k});
    r.objective += ctx.state->primary_variant_of(i).norm_accuracy * ctx.state->app(i).rate;
  }
  for (std::size_t i : skipped) {
    if (ctx.critical[i]) r.infeasible.push_back("app '" + ctx.state->app(i).app_id + "': no room for a full-size warm backup");
  }
  r.exact = false;
  return r;
}

class FailLitePolicy final : public FailoverPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::FailLite; }

  ProactiveResult plan_proactive(const PlanningContext& ctx) const override {
    std::vector<std::size_t> k_apps;
    for (std::size_t i = 0; i < ctx.critical.size(); ++i) {
      if (ctx.critical[i]) k_apps.push_back(i);
    }
    auto problem = make_warm_problem(ctx, k_apps);
    if (ctx.site_independence) problem = extend_site_independence(std::move(problem));
    const PlacementPlan plan = solve_warm(problem);
    ProactiveResult r;
    r.feasible = plan.feasible;
    r.exact = plan.exact;
    r.objective = plan.objective;
    r.infeasible = plan.infeasible;
    if (plan.feasible) {
      for (const auto& e : plan.warm) r.warm.push_back({k_apps[e.app], e.variant, e.server});
    }
    return r;
  }

  ReactiveResult plan_reactive(const PlanningContext& ctx, const std::vector<std::size_t>& affected,
                               std::mt19937_64&) const override {
    const FailoverRequest req = make_failover_request(ctx, affected);
    const FailoverDecision d = progressive_schedule(plan_failover(req), req);
    ReactiveResult r;
    r.delta = d.delta;
    for (std::size_t i : d.order) {
      if (!d.placement[i]) {
        r.unrecovered.push_back(affected[i]);
        continue;
      }
      r.loads.push_back({affected[i], *d.selection[i], *d.placement[i], d.schedule[i]});
    }
    return r;
  }
};

class FullWarmPolicy final : public FailoverPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::FullWarm; }
  ProactiveResult plan_proactive(const PlanningContext& ctx) const override { return plan_full_warm(ctx); }
  ReactiveResult plan_reactive(const PlanningContext&, const std::vector<std::size_t>& affected,
                               std::mt19937_64&) const override {
    ReactiveResult r;
    r.unrecovered = affected;
    return r;
  }
};

class FullColdPolicy final : public FailoverPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::FullCold; }
  ProactiveResult plan_proactive(const PlanningContext&) const override { return {}; }
  ReactiveResult plan_reactive(const PlanningContext& ctx, const std::vector<std::size_t>& affected,
                               std::mt19937_64& rng) const override {
    return plan_full_cold(ctx, affected, rng);
  }
};

class FullWarmKPolicy final : public FailoverPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::FullWarmK; }
  ProactiveResult plan_proactive(const PlanningContext& ctx) const override { return plan_full_warm_k(ctx); }
  ReactiveResult plan_reactive(const PlanningContext& ctx, const std::vector<std::size_t>& affected,
                               std::mt19937_64& rng) const override {
    return plan_full_cold(ctx, affected, rng);
  }
};

}  // namespace

std::unique_ptr<FailoverPolicy> make_policy(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::FailLite:
      return std::make_unique<FailLitePolicy>();
    case PolicyKind::FullWarm:
      return std::make_unique<FullWarmPolicy>();
    case PolicyKind::FullCold:
      return std::make_unique<FullColdPolicy>();
    case PolicyKind::FullWarmK:
      return std::make_unique<FullWarmKPolicy>();
  }
  throw ConfigError("unknown policy kind");
}

WarmPlacementProblem make_warm_problem(const PlanningContext& ctx, const std::vector<std::size_t>& apps) {
  WarmPlacementProblem p;
  p.servers = candidate_servers(ctx);
  for (std::size_t i : apps) p.apps.push_back(make_placement_app(*ctx.state, i));
  p.alpha = ctx.alpha;
  p.replicas_per_app = ctx.replicas_per_app;
  p.network_latency_ms = ctx.network_latency_ms;
  p.partial_k = ctx.partial_k;
  p.exact_budget = ctx.exact_budget;
  p.node_limit = ctx.node_limit;
  return p;
}

FailoverRequest make_failover_request(const PlanningContext& ctx, const std::vector<std::size_t>& apps) {
  FailoverRequest r;
  r.servers = candidate_servers(ctx);
  for (std::size_t i : apps) r.apps.push_back(make_placement_app(*ctx.state, i));
  r.network_latency_ms = ctx.network_latency_ms;
  return r;
}

std::vector<std::size_t> baseline_order(const ClusterState& state, const std::vector<bool>& critical,
                                        std::vector<std::size_t> apps) {
  std::stable_sort(apps.begin(), apps.end(), [&](std::size_t a, std::size_t b) {
    if (critical[a] != critical[b]) return static_cast<bool>(critical[a]);
    const double ka = state.app(a).rate * state.primary_variant_of(a).norm_accuracy;
    const double kb = state.app(b).rate * state.primary_variant_of(b).norm_accuracy;
    if (ka != kb) return ka > kb;
    return state.app(a).app_id < state.app(b).app_id;
  });
  return apps;
}

ProactiveResult plan_full_warm(const PlanningContext& ctx) { return warm_full_size(ctx, false); }

ProactiveResult plan_full_warm_k(const PlanningContext& ctx) { return warm_full_size(ctx, true); }

ReactiveResult plan_full_cold(const PlanningContext& ctx, const std::vector<std::size_t>& affected,
                              std::mt19937_64& rng) {
  std::vector<std::size_t> k_first, rest;
  for (std::size_t i : affected) (ctx.critical[i] ? k_first : rest).push_back(i);
  std::sort(k_first.begin(), k_first.end(),
            [&](std::size_t a, std::size_t b) { return ctx.state->app(a).app_id < ctx.state->app(b).app_id; });
  std::sort(rest.begin(), rest.end(),
            [&](std::size_t a, std::size_t b) { return ctx.state->app(a).app_id < ctx.state->app(b).app_id; });
  // Fisher-Yates with explicit draws keeps the order identical across
  // standard libraries.
  for (std::size_t n = rest.size(); n > 1; --n) {
    const std::size_t j = static_cast<std::size_t>(rng() % n);
    std::swap(rest[n - 1], rest[j]);
  }
  std::vector<std::size_t> order = k_first;
  order.insert(order.end(), rest.begin(), rest.end());

  ReactiveResult r;
  std::vector<std::size_t> skipped;
  for (const auto& [i, k] : worst_fit_full(ctx, order, false, &skipped)) {
    const std::size_t v = ctx.state->app(i).primary_variant;
    r.loads.push_back({i, v, k, {LoadStep{v, k, LoadStepKind::Initial}}});
  }
  r.unrecovered = skipped;
  return r;
}

}  // namespace faillite
