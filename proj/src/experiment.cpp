#include "faillite/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

namespace faillite {

RunResult run_once(const LoadedScenario& in, std::uint64_t seed) {
  return simulate(*in.cluster, in.scenario.settings, seed, in.hash());
}

std::vector<RunResult> run_repeats(const LoadedScenario& in) {
  std::vector<RunResult> out;
  for (int r = 0; r < in.scenario.repeats; ++r) {
    out.push_back(run_once(in, in.scenario.seed + static_cast<std::uint64_t>(r)));
  }
  return out;
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "headroom") return SweepAxis::Headroom;
  if (name == "k_fraction") return SweepAxis::KFraction;
  if (name == "alpha") return SweepAxis::Alpha;
  if (name == "policy") return SweepAxis::Policy;
  if (name == "failed_sites") return SweepAxis::FailedSites;
  throw ConfigError("unknown sweep axis '" + name + "' (expected headroom, k_fraction, alpha, policy or failed_sites)");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Headroom:
      return "headroom";
    case SweepAxis::KFraction:
      return "k_fraction";
    case SweepAxis::Alpha:
      return "alpha";
    case SweepAxis::Policy:
      return "policy";
    case SweepAxis::FailedSites:
      return "failed_sites";
  }
  return "unknown";
}

namespace {

double parse_number(const std::string& v, SweepAxis axis) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("sweep value '" + v + "' is not a number for axis " + to_string(axis));
  }
}

}  // namespace

std::vector<SweepRow> sweep(const LoadedScenario& base, SweepAxis axis, const std::vector<std::string>& values,
                            const std::vector<PolicyKind>& policies) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    LoadedScenario point = base;
    std::vector<PolicyKind> pols = policies;
    switch (axis) {
      case SweepAxis::Headroom:
        point.scenario.settings.headroom = parse_number(value, axis);
        break;
      case SweepAxis::KFraction:
        point.scenario.settings.k_fraction = parse_number(value, axis);
        break;
      case SweepAxis::Alpha:
        point.scenario.settings.alpha = parse_number(value, axis);
        break;
      case SweepAxis::Policy:
        pols = {parse_policy(value)};
        break;
      case SweepAxis::FailedSites:
        set_failed_sites(point.scenario, static_cast<int>(parse_number(value, axis)));
        break;
    }
    if (pols.empty()) pols = {point.scenario.settings.policy};
    for (PolicyKind p : pols) {
      LoadedScenario run = point;
      run.scenario.settings.policy = p;
      SweepRow row;
      row.value = value;
      for (auto& r : run_repeats(run)) row.runs.push_back(std::move(r.metrics));
      row.summary = aggregate(row.runs);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

FailoverRequest synthetic_failover(std::size_t apps, std::size_t servers, std::size_t variants, std::uint64_t seed) {
  if (apps == 0 || servers == 0 || variants == 0) throw ConfigError("bench sizes must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base_mib(60.0, 200.0);
  std::uniform_real_distribution<double> step(1.3, 2.0);
  std::uniform_real_distribution<double> acc_step(0.01, 0.05);
  FailoverRequest req;
  double demand = 0.0;
  for (std::size_t i = 0; i < apps; ++i) {
    PlacementApp a;
    a.app_id = "app" + std::to_string(i);
    a.rate = 1.0;
    double mib = base_mib(rng);
    std::vector<double> acc(variants);
    acc[variants - 1] = 1.0;
    for (std::size_t j = variants - 1; j-- > 0;) acc[j] = acc[j + 1] - acc_step(rng);
    for (std::size_t j = 0; j < variants; ++j) {
      VariantOption v;
      v.variant_id = "v" + std::to_string(j);
      v.accuracy = acc[j];
      v.demand = {mib, mib / 16384.0};
      v.latency_ms["a2"] = 1.0 + mib / 150.0;
      a.variants.push_back(v);
      mib *= step(rng);
    }
    demand += a.full().demand.mem_mib;
    req.apps.push_back(std::move(a));
  }
  const double per_server = 0.5 * demand / static_cast<double>(servers);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  for (std::size_t k = 0; k < servers; ++k) {
    CandidateServer s;
    s.server_id = "s" + std::to_string(k);
    s.site_id = "site" + std::to_string(k % 10);
    s.server_class = "a2";
    s.free = {per_server * jitter(rng), 1.0};
    s.alive = true;
    req.servers.push_back(std::move(s));
  }
  return req;
}

BenchPoint bench_heuristic(std::size_t apps, std::size_t servers, std::size_t variants, std::uint64_t seed) {
  const FailoverRequest req = synthetic_failover(apps, servers, variants, seed);
  const auto start = std::chrono::steady_clock::now();
  const FailoverDecision d = progressive_schedule(plan_failover(req), req);
  const auto stop = std::chrono::steady_clock::now();
  BenchPoint p{apps, servers, variants, std::chrono::duration<double>(stop - start).count(), 0};
  p.recovered = apps - d.unrecovered().size();
  return p;
}

std::vector<std::string> validate_scenario(const LoadedScenario& in) {
  std::vector<std::string> problems;
  const SimSettings& st = in.scenario.settings;
  ClusterState state = *in.cluster;
  try {
    if (st.headroom) apply_headroom(state, *st.headroom);
  } catch (const std::exception& e) {
    problems.push_back(std::string("headroom: ") + e.what());
    return problems;
  }
  PlanningContext ctx;
  ctx.state = &state;
  ctx.critical = st.critical_from_cluster ? std::vector<bool>{} : select_critical(state, st.k_fraction);
  if (st.critical_from_cluster) {
    for (const auto& a : state.apps()) ctx.critical.push_back(a.critical);
  }
  ctx.alpha = st.alpha;
  ctx.site_independence = st.site_independence;
  ctx.replicas_per_app = st.replicas_per_app;
  ctx.network_latency_ms = st.network_latency_ms;
  ctx.partial_k = st.partial_k;
  ctx.exact_budget = st.exact_budget;
  ctx.node_limit = st.node_limit;
  const ProactiveResult plan = make_policy(st.policy)->plan_proactive(ctx);
  if (!plan.feasible) {
    for (const auto& why : plan.infeasible) problems.push_back("warm plan: " + why);
    if (plan.infeasible.empty()) problems.push_back("warm plan: infeasible");
  }
  for (const auto& inj : st.injections) {
    if (inj.time > st.horizon) problems.push_back("injection at " + std::to_string(to_ms(inj.time)) + " ms is past the horizon");
    for (const auto& t : inj.targets) {
      const bool site = inj.kind == Injection::Kind::SiteFailure || inj.kind == Injection::Kind::SiteRestore;
      if (site ? !state.sites().count(t) : !state.find_server(t)) {
        problems.push_back("injection names unknown " + std::string(site ? "site '" : "server '") + t + "'");
      }
    }
  }
  return problems;
}

}  // namespace faillite
