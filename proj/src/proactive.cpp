#include "faillite/proactive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "faillite/progressive.hpp"

namespace faillite {

namespace {

struct Option {
  std::vector<std::pair<std::size_t, std::size_t>> picks;  // (variant, server)
  double value = 0.0;
  Resources demand;
};

struct Segment {
  double dm = 0.0;
  double dv = 0.0;
  std::size_t depth = 0;  // position in the search order
  double slope() const { return dv / dm; }
};

std::vector<std::pair<std::size_t, std::size_t>> single_candidates(const WarmPlacementProblem& p,
                                                                   const PlacementApp& app,
                                                                   const Resources& budget) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 0; j < app.variants.size(); ++j) {
    const VariantOption& v = app.variants[j];
    if (!budget.fits(v.demand)) continue;
    for (std::size_t k = 0; k < p.servers.size(); ++k) {
      const CandidateServer& s = p.servers[k];
      if (!server_allowed(app, k, s)) continue;
      if (p.site_independence && !app.primary_site.empty() && app.primary_site == s.site_id) continue;
      if (!meets_slo(app, v, s, p.network_latency_ms)) continue;
      if (!s.free.fits(v.demand)) continue;
      out.emplace_back(j, k);
    }
  }
  return out;
}

// Names the first constraint that empties an app's candidate set.
std::string diagnose(const WarmPlacementProblem& p, const PlacementApp& app, const Resources& budget) {
  bool any_server = false, any_site = false, any_slo = false, any_cap = false;
  for (std::size_t k = 0; k < p.servers.size(); ++k) {
    const CandidateServer& s = p.servers[k];
    if (!s.alive) continue;
    if (app.primary_server && *app.primary_server == k) continue;
    if (std::find(app.excluded_servers.begin(), app.excluded_servers.end(), k) != app.excluded_servers.end()) continue;
    any_server = true;
    if (!server_allowed(app, k, s)) continue;
    if (p.site_independence && !app.primary_site.empty() && app.primary_site == s.site_id) continue;
    any_site = true;
    for (const auto& v : app.variants) {
      if (!meets_slo(app, v, s, p.network_latency_ms)) continue;
      any_slo = true;
      if (s.free.fits(v.demand)) any_cap = true;
    }
  }
  if (!any_server) return "app '" + app.app_id + "': primary exclusion leaves no live server besides the primary";
  if (!any_site) return "app '" + app.app_id + "': site independence leaves no server outside the primary site";
  if (!any_slo) return "app '" + app.app_id + "': no variant meets the latency SLO on any server";
  if (!any_cap) return "app '" + app.app_id + "': no SLO-feasible server has room for any variant";
  (void)budget;
  return "app '" + app.app_id + "': the alpha reserve capacity leaves no room for any variant";
}

std::vector<Option> build_options(const WarmPlacementProblem& p, const PlacementApp& app, const Resources& budget) {
  const auto singles = single_candidates(p, app, budget);
  std::vector<Option> opts;
  const int r = std::max(1, p.replicas_per_app);
  std::vector<std::size_t> idx;
  // Enumerate r-subsets of the candidates on distinct servers (and sites).
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (static_cast<int>(idx.size()) == r) {
      Option o;
      for (std::size_t c : idx) {
        const auto [j, k] = singles[c];
        o.picks.emplace_back(j, k);
        o.value += app.variants[j].accuracy * app.rate;
        o.demand += app.variants[j].demand;
      }
      if (budget.fits(o.demand)) opts.push_back(std::move(o));
      return;
    }
    for (std::size_t c = start; c < singles.size(); ++c) {
      const std::size_t k = singles[c].second;
      bool clash = false;
      for (std::size_t prev : idx) {
        const std::size_t pk = singles[prev].second;
        if (pk == k || (p.site_independence && p.servers[pk].site_id == p.servers[k].site_id)) clash = true;
      }
      if (clash) continue;
      idx.push_back(c);
      self(self, c + 1);
      idx.pop_back();
    }
  };
  rec(rec, 0);

  std::sort(opts.begin(), opts.end(), [&](const Option& a, const Option& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.demand.mem_mib != b.demand.mem_mib) return a.demand.mem_mib < b.demand.mem_mib;
    for (std::size_t t = 0; t < a.picks.size(); ++t) {
      const auto& sa = p.servers[a.picks[t].second].server_id;
      const auto& sb = p.servers[b.picks[t].second].server_id;
      if (sa != sb) return sa < sb;
      if (a.picks[t].first != b.picks[t].first) return a.picks[t].first > b.picks[t].first;
    }
    return false;
  });
  return opts;
}

// Upper concave hull of (memory, value) points; returns the base point and the
// increasing segments with decreasing slopes.
std::pair<std::pair<double, double>, std::vector<std::pair<double, double>>> hull(
    std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  std::vector<std::pair<double, double>> frontier;
  for (const auto& pt : pts) {
    if (!frontier.empty() && pt.second <= frontier.back().second) continue;
    if (!frontier.empty() && pt.first == frontier.back().first) continue;
    frontier.push_back(pt);
  }
  std::vector<std::pair<double, double>> h;
  for (const auto& pt : frontier) {
    while (h.size() >= 2) {
      const auto& a = h[h.size() - 2];
      const auto& b = h[h.size() - 1];
      // Drop b when it lies on or below the chord a -> pt.
      const double cross = (b.first - a.first) * (pt.second - a.second) - (b.second - a.second) * (pt.first - a.first);
      if (cross >= 0) {
        h.pop_back();
      } else {
        break;
      }
    }
    h.push_back(pt);
  }
  std::vector<std::pair<double, double>> segs;
  for (std::size_t t = 1; t < h.size(); ++t) segs.emplace_back(h[t].first - h[t - 1].first, h[t].second - h[t - 1].second);
  return {h.front(), segs};
}

class BranchAndBound {
 public:
  BranchAndBound(const WarmPlacementProblem& p, std::vector<std::size_t> order, std::vector<std::vector<Option>> opts,
                 Resources budget)
      : p_(p), order_(std::move(order)), opts_(std::move(opts)), budget_(budget) {
    const std::size_t n = order_.size();
    base_v_.assign(n + 1, 0.0);
    base_m_.assign(n + 1, 0.0);
    std::vector<double> bv(n), bm(n);
    for (std::size_t d = 0; d < n; ++d) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& o : opts_[d]) pts.emplace_back(o.demand.mem_mib, o.value);
      auto [base, segs] = hull(std::move(pts));
      bm[d] = base.first;
      bv[d] = base.second;
      for (const auto& [dm, dv] : segs) segments_.push_back({dm, dv, d});
    }
    for (std::size_t d = n; d-- > 0;) {
      base_v_[d] = base_v_[d + 1] + bv[d];
      base_m_[d] = base_m_[d + 1] + bm[d];
    }
    std::stable_sort(segments_.begin(), segments_.end(),
                     [](const Segment& a, const Segment& b) { return a.slope() > b.slope(); });
    used_.assign(p.servers.size(), Resources{});
    choice_.assign(n, 0);
    runs_.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
      const auto& o = opts_[d];
      for (std::size_t a = 0; a < o.size();) {
        std::size_t b = a + 1;
        while (b < o.size() && o[b].value == o[a].value && o[b].demand.mem_mib == o[a].demand.mem_mib) ++b;
        if (b - a > 1) runs_[d].emplace_back(a, b);
        a = b;
      }
    }
  }

  void run() { dfs(0, 0.0, 0.0); }

  bool found() const { return found_; }
  bool complete() const { return nodes_ <= p_.node_limit; }
  const std::vector<std::size_t>& best_choice() const { return best_choice_; }
  double best_value() const { return best_value_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  double eps() const { return 1e-9 * std::max(1.0, std::abs(best_value_)); }

  // LP bound of the remaining apps under an aggregate memory cap.
  double upper_bound(std::size_t depth, double cap) const {
    if (base_m_[depth] > cap + 1e-6) return -std::numeric_limits<double>::infinity();
    double rem = cap - base_m_[depth];
    double v = base_v_[depth];
    for (const auto& s : segments_) {
      if (s.depth < depth) continue;
      if (s.dm <= rem) {
        rem -= s.dm;
        v += s.dv;
      } else {
        v += s.dv * rem / s.dm;
        break;
      }
    }
    return v;
  }

  // Least memory the remaining apps need to add `need` value (LP relaxation).
  double memory_lower_bound(std::size_t depth, double need) const {
    double m = base_m_[depth];
    need -= base_v_[depth];
    if (need <= 0) return m;
    for (const auto& s : segments_) {
      if (s.depth < depth) continue;
      if (s.dv <= need) {
        need -= s.dv;
        m += s.dm;
      } else {
        m += s.dm * need / s.dv;
        return m;
      }
    }
    return std::numeric_limits<double>::infinity();
  }

  void dfs(std::size_t depth, double value, double mem) {
    if (++nodes_ > p_.node_limit) return;
    if (depth == order_.size()) {
      const double e = eps();
      if (!found_ || value > best_value_ + e || (std::abs(value - best_value_) <= e && mem < best_mem_ - 1e-9)) {
        found_ = true;
        best_value_ = value;
        best_mem_ = mem;
        best_choice_ = choice_;
      }
      return;
    }
    double server_room = 0.0;
    for (std::size_t k = 0; k < p_.servers.size(); ++k) {
      if (p_.servers[k].alive) server_room += std::max(0.0, p_.servers[k].free.mem_mib - used_[k].mem_mib);
    }
    const double cap = std::min(budget_.mem_mib - global_.mem_mib, server_room);
    if (base_m_[depth] > cap + 1e-6) return;
    if (found_) {
      const double ub = value + upper_bound(depth, cap);
      const double e = eps();
      if (ub < best_value_ - e) return;
      if (ub <= best_value_ + e) {
        const double mlb = mem + memory_lower_bound(depth, best_value_ - value);
        if (mlb >= best_mem_ - 1e-6 * std::max(1.0, best_mem_)) return;
      }
    }
    const auto& opts = opts_[depth];
    // Options tied on value and memory are tried worst-fit: the one leaving
    // the most room on its servers first.
    std::vector<std::size_t> visit(opts.size());
    std::iota(visit.begin(), visit.end(), 0);
    std::vector<double> room(opts.size(), 0.0);
    for (std::size_t c = 0; c < opts.size(); ++c) {
      for (const auto& [j, k] : opts[c].picks) room[c] += p_.servers[k].free.mem_mib - used_[k].mem_mib;
    }
    for (const auto& [a, b] : runs_[depth]) {
      std::stable_sort(visit.begin() + static_cast<std::ptrdiff_t>(a), visit.begin() + static_cast<std::ptrdiff_t>(b),
                       [&](std::size_t x, std::size_t y) { return room[x] > room[y] + 1e-9; });
    }
    for (std::size_t c : visit) {
      const Option& o = opts[c];
      if (!budget_.fits(global_ + o.demand)) continue;
      bool fits = true;
      for (const auto& [j, k] : o.picks) {
        (void)j;
        used_[k] += p_.apps[order_[depth]].variants[j].demand;
      }
      for (const auto& [j, k] : o.picks) {
        (void)j;
        if (!p_.servers[k].free.fits(used_[k])) fits = false;
      }
      if (fits) {
        global_ += o.demand;
        choice_[depth] = c;
        dfs(depth + 1, value + o.value, mem + o.demand.mem_mib);
        global_ -= o.demand;
      }
      for (const auto& [j, k] : o.picks) used_[k] -= p_.apps[order_[depth]].variants[j].demand;
      if (nodes_ > p_.node_limit) return;
    }
  }

  const WarmPlacementProblem& p_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<Option>> opts_;
  Resources budget_;
  std::vector<double> base_v_, base_m_;
  std::vector<Segment> segments_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> runs_;  // tied option ranges per depth
  std::vector<Resources> used_;
  Resources global_;
  std::vector<std::size_t> choice_, best_choice_;
  bool found_ = false;
  double best_value_ = 0.0;
  double best_mem_ = 0.0;
  std::uint64_t nodes_ = 0;
};

Resources warm_budget(const WarmPlacementProblem& p) {
  if (p.alpha < 0.0 || p.alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
  Resources total;
  for (const auto& s : p.servers) {
    if (s.alive) total += s.free;
  }
  return total * (1.0 - p.alpha);
}

std::vector<std::size_t> search_order(const std::vector<PlacementApp>& apps) {
  std::vector<std::size_t> order(apps.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    double best = 0.0;
    for (const auto& v : apps[i].variants) best = std::max(best, v.accuracy);
    return apps[i].rate * best;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka > kb;
    return apps[a].app_id < apps[b].app_id;
  });
  return order;
}

}  // namespace

double plan_objective(const std::vector<PlanEntry>& entries, const std::vector<PlacementApp>& apps) {
  double v = 0.0;
  for (const auto& e : entries) v += apps.at(e.app).variants.at(e.variant).accuracy * apps[e.app].rate;
  return v;
}

WarmPlacementProblem extend_site_independence(WarmPlacementProblem problem) {
  problem.site_independence = true;
  for (auto& app : problem.apps) {
    if (app.primary_server && app.primary_site.empty()) app.primary_site = problem.servers.at(*app.primary_server).site_id;
    if (!app.primary_site.empty() &&
        std::find(app.excluded_sites.begin(), app.excluded_sites.end(), app.primary_site) == app.excluded_sites.end()) {
      app.excluded_sites.push_back(app.primary_site);
    }
  }
  return problem;
}

PlacementPlan solve_warm_heuristic(const WarmPlacementProblem& problem) {
  PlacementPlan plan;
  plan.exact = false;
  const double scale = 1.0 - problem.alpha;
  FailoverRequest req;
  req.servers = problem.servers;
  for (auto& s : req.servers) s.free = s.free * scale;
  req.network_latency_ms = problem.network_latency_ms;
  req.co_residency = false;
  req.apps = problem.apps;
  if (problem.site_independence) {
    for (auto& a : req.apps) {
      if (!a.primary_site.empty()) a.excluded_sites.push_back(a.primary_site);
    }
  }

  std::vector<int> placed(problem.apps.size(), 0);
  const int r = std::max(1, problem.replicas_per_app);
  for (int round = 0; round < r; ++round) {
    const FailoverDecision d = plan_failover(req);
    for (std::size_t i = 0; i < req.apps.size(); ++i) {
      if (!d.placement[i]) continue;
      const std::size_t k = *d.placement[i];
      const std::size_t j = *d.selection[i];
      plan.warm.push_back({i, j, k});
      ++placed[i];
      req.servers[k].free -= req.apps[i].variants[j].demand;
      req.apps[i].excluded_servers.push_back(k);
      if (problem.site_independence) req.apps[i].excluded_sites.push_back(req.servers[k].site_id);
    }
  }
  for (std::size_t i = 0; i < problem.apps.size(); ++i) {
    if (placed[i] == r) continue;
    if (problem.partial_k) {
      plan.dropped.push_back(i);
      plan.warm.erase(std::remove_if(plan.warm.begin(), plan.warm.end(), [&](const PlanEntry& e) { return e.app == i; }),
                      plan.warm.end());
    } else {
      plan.feasible = false;
      plan.infeasible.push_back("app '" + problem.apps[i].app_id + "': heuristic found no feasible warm placement");
    }
  }
  std::sort(plan.warm.begin(), plan.warm.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return a.app != b.app ? a.app < b.app : a.server < b.server; });
  plan.objective = plan_objective(plan.warm, problem.apps);
  return plan;
}

PlacementPlan solve_warm(const WarmPlacementProblem& problem) {
  PlacementPlan plan;
  if (problem.apps.empty()) return plan;

  std::size_t tuples = 0;
  for (const auto& a : problem.apps) tuples += a.variants.size() * problem.servers.size();
  if (tuples > problem.exact_budget) {
    if (!problem.fallback_enabled) {
      throw CapacityPlanningError("warm placement instance has " + std::to_string(tuples) +
                                  " assignment tuples, over the exact budget of " +
                                  std::to_string(problem.exact_budget));
    }
    return solve_warm_heuristic(problem);
  }

  const Resources budget = warm_budget(problem);
  const auto order = search_order(problem.apps);
  std::vector<std::vector<Option>> opts;
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    auto o = build_options(problem, problem.apps[i], budget);
    if (o.empty()) {
      if (problem.partial_k) {
        plan.dropped.push_back(i);
        continue;
      }
      plan.feasible = false;
      plan.infeasible.push_back(diagnose(problem, problem.apps[i], budget));
      continue;
    }
    if (problem.partial_k) o.push_back(Option{});  // leave unassigned
    opts.push_back(std::move(o));
    kept.push_back(i);
  }
  if (!plan.feasible) return plan;

  BranchAndBound bb(problem, kept, std::move(opts), budget);
  bb.run();
  plan.exact = bb.complete();
  if (!bb.found()) {
    plan.feasible = false;
    plan.infeasible.push_back("capacity: capacity cannot host a backup for every app in K");
    return plan;
  }
  const auto& choice = bb.best_choice();
  for (std::size_t d = 0; d < kept.size(); ++d) {
    const std::size_t i = kept[d];
    const auto o = build_options(problem, problem.apps[i], budget);
    if (choice[d] >= o.size()) {
      plan.dropped.push_back(i);
      continue;
    }
    for (const auto& [j, k] : o[choice[d]].picks) plan.warm.push_back({i, j, k});
  }
  std::sort(plan.dropped.begin(), plan.dropped.end());
  std::sort(plan.warm.begin(), plan.warm.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return a.app != b.app ? a.app < b.app : a.server < b.server; });
  plan.objective = plan_objective(plan.warm, problem.apps);
  return plan;
}

std::vector<Violation> validate_plan(const PlacementPlan& plan, const WarmPlacementProblem& problem,
                                     ValidationMode mode) {
  std::vector<Violation> out;
  const auto& apps = problem.apps;
  const auto& servers = problem.servers;
  std::vector<Resources> used(servers.size());
  Resources total;
  std::vector<std::vector<std::size_t>> per_app(apps.size());

  for (const auto& e : plan.warm) {
    if (e.app >= apps.size() || e.server >= servers.size() || e.variant >= apps[e.app].variants.size()) {
      out.push_back({"index-range", e.app < apps.size() ? apps[e.app].app_id : "?", "?", "entry references unknown index"});
      continue;
    }
    const PlacementApp& a = apps[e.app];
    const CandidateServer& s = servers[e.server];
    const VariantOption& v = a.variants[e.variant];
    if (!s.alive) out.push_back({"capacity", a.app_id, s.server_id, "server is not alive"});
    if (a.primary_server && *a.primary_server == e.server) {
      out.push_back({"primary-exclusion", a.app_id, s.server_id, "backup shares the primary server"});
    }
    if (std::find(a.excluded_servers.begin(), a.excluded_servers.end(), e.server) != a.excluded_servers.end() &&
        !(a.primary_server && *a.primary_server == e.server)) {
      out.push_back({"primary-exclusion", a.app_id, s.server_id, "server is excluded for this app"});
    }
    const bool site_clash =
        std::find(a.excluded_sites.begin(), a.excluded_sites.end(), s.site_id) != a.excluded_sites.end() ||
        (problem.site_independence && !a.primary_site.empty() && a.primary_site == s.site_id);
    if (site_clash) out.push_back({"site-independence", a.app_id, s.server_id, "backup in site " + s.site_id});
    if (!meets_slo(a, v, s, problem.network_latency_ms)) {
      const double lat = placement_latency_ms(v, s, problem.network_latency_ms);
      out.push_back({"latency-slo", a.app_id, s.server_id,
                     std::isfinite(lat) ? "latency " + std::to_string(lat) + " ms exceeds SLO " +
                                              std::to_string(a.slo_ms) + " ms"
                                        : "variant not profiled on class " + s.server_class});
    }
    used[e.server] += v.demand;
    total += v.demand;
    per_app[e.app].push_back(e.server);
  }

  for (std::size_t k = 0; k < servers.size(); ++k) {
    if (!servers[k].free.fits(used[k])) {
      out.push_back({"capacity", "*", servers[k].server_id,
                     "demand " + std::to_string(used[k].mem_mib) + " MiB / " + std::to_string(used[k].compute) +
                         " exceeds free " + std::to_string(servers[k].free.mem_mib) + " MiB / " +
                         std::to_string(servers[k].free.compute)});
    }
  }

  const int r = std::max(1, problem.replicas_per_app);
  for (std::size_t i = 0; i < apps.size(); ++i) {
    const auto& ks = per_app[i];
    std::set<std::size_t> distinct(ks.begin(), ks.end());
    if (distinct.size() != ks.size()) out.push_back({"replica-count", apps[i].app_id, "*", "two replicas on one server"});
    if (problem.site_independence && ks.size() > 1) {
      std::set<std::string> sites;
      for (std::size_t k : ks) sites.insert(servers[k].site_id);
      if (sites.size() != ks.size()) out.push_back({"site-independence", apps[i].app_id, "*", "replicas share a site"});
    }
    if (mode == ValidationMode::Warm) {
      const bool dropped = std::find(plan.dropped.begin(), plan.dropped.end(), i) != plan.dropped.end();
      if (dropped && problem.partial_k) {
        if (!ks.empty()) out.push_back({"replica-count", apps[i].app_id, "*", "dropped app still has backups"});
      } else if (static_cast<int>(ks.size()) != r) {
        out.push_back({"replica-count", apps[i].app_id, "*",
                       "has " + std::to_string(ks.size()) + " backups, expected " + std::to_string(r)});
      }
    } else if (ks.size() > 1) {
      out.push_back({"replica-count", apps[i].app_id, "*", "more than one failover placement"});
    }
  }

  if (mode == ValidationMode::Warm) {
    const Resources budget = warm_budget(problem);
    if (!budget.fits(total)) {
      out.push_back({"reserve-budget", "*", "*",
                     "warm demand " + std::to_string(total.mem_mib) + " MiB exceeds budget " +
                         std::to_string(budget.mem_mib) + " MiB"});
    }
  }
  return out;
}

}  // namespace faillite
