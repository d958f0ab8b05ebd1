#include "faillite/progressive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace faillite {

std::vector<std::size_t> FailoverDecision::unrecovered() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < placement.size(); ++i) {
    if (!placement[i]) out.push_back(i);
  }
  return out;
}

double demand_ratio(const FailoverRequest& request) {
  double demand = 0.0;
  for (const auto& a : request.apps) demand += a.full().demand.mem_mib;
  if (demand <= 0.0) return std::numeric_limits<double>::infinity();
  double free = 0.0;
  for (const auto& s : request.servers) {
    if (s.alive) free += std::max(0.0, s.free.mem_mib);
  }
  return free / demand;
}

std::size_t match_variant(const std::vector<VariantOption>& variants, double delta) {
  const std::size_t full = variants.size() - 1;
  if (delta >= 1.0) return full;
  const double target = delta * variants[full].demand.mem_mib;
  std::size_t best = full;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < variants.size(); ++j) {
    const double gap = std::abs(variants[j].demand.mem_mib - target);
    if (gap < best_gap - 1e-9 ||
        (std::abs(gap - best_gap) <= 1e-9 && variants[j].accuracy > variants[best].accuracy)) {
      best = j;
      best_gap = gap;
    }
  }
  return best;
}

namespace {

// Placement order: descending rate * full-size accuracy, then app id.
std::vector<std::size_t> placement_order(const std::vector<PlacementApp>& apps) {
  std::vector<std::size_t> order(apps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ka = apps[a].rate * apps[a].full().accuracy;
    const double kb = apps[b].rate * apps[b].full().accuracy;
    if (ka != kb) return ka > kb;
    return apps[a].app_id < apps[b].app_id;
  });
  return order;
}

bool eligible(const FailoverRequest& req, const PlacementApp& app, std::size_t k, const VariantOption& v) {
  const CandidateServer& s = req.servers[k];
  return server_allowed(app, k, s) && meets_slo(app, v, s, req.network_latency_ms);
}

// Checks that the apps on one server, upgraded one at a time in `seq` order,
// never exceed `room`: while app j upgrades, earlier apps hold their selected
// variant, later ones their smallest, and j holds both.
bool sequence_fits(const FailoverRequest& req, const std::vector<std::size_t>& seq,
                   const std::vector<std::optional<std::size_t>>& sel, const Resources& room) {
  Resources total;
  for (std::size_t i : seq) total += req.apps[i].variants[*sel[i]].demand;
  if (!room.fits(total)) return false;
  Resources done;
  Resources pending;
  for (std::size_t i : seq) pending += req.apps[i].variants[0].demand;
  for (std::size_t i : seq) {
    const Resources& small = req.apps[i].variants[0].demand;
    pending -= small;
    if (*sel[i] != 0) {
      const Resources peak = done + pending + small + req.apps[i].variants[*sel[i]].demand;
      if (!room.fits(peak)) return false;
    }
    done += req.apps[i].variants[*sel[i]].demand;
  }
  return true;
}

}  // namespace

namespace {

// Worst-fit placement walking each app's variants down from start[i]. Apps
// that will upgrade keep room for one smallest variant per server, since a
// sequential upgrade peaks at the selected total plus one smallest variant.
void place_pass(const FailoverRequest& request, const std::vector<std::size_t>& start, FailoverDecision& d,
                std::vector<Resources>& free) {
  std::vector<Resources> reserve(request.servers.size());
  auto fits = [&](std::size_t k, const Resources& demand, const Resources& small) {
    if (!request.co_residency || small.mem_mib == 0.0) return free[k].fits(demand);
    const Resources left = free[k] - demand;
    return left.fits(Resources{std::max(reserve[k].mem_mib, small.mem_mib), std::max(reserve[k].compute, small.compute)});
  };
  for (std::size_t i : d.order) {
    const PlacementApp& app = request.apps[i];
    for (std::size_t j = start[i] + 1; j-- > 0;) {
      const VariantOption& v = app.variants[j];
      const Resources small = j == 0 ? Resources{} : app.variants[0].demand;
      std::optional<std::size_t> best;
      for (std::size_t k = 0; k < free.size(); ++k) {
        if (!fits(k, v.demand, small) || !eligible(request, app, k, v)) continue;
        // The smallest variant serves first, so it must be allowed here too.
        if (request.co_residency && j > 0 && !eligible(request, app, k, app.variants[0])) continue;
        if (!best || free[k].mem_mib > free[*best].mem_mib + kCapacityEps) best = k;
      }
      if (best) {
        d.selection[i] = j;
        d.placement[i] = *best;
        free[*best] -= v.demand;
        reserve[*best] = {std::max(reserve[*best].mem_mib, small.mem_mib),
                          std::max(reserve[*best].compute, small.compute)};
        break;
      }
    }
  }
}

// Promotes each placed app to the largest variant, up to cap[i] when given,
// that still fits on its server.
void upgrade_pass(const FailoverRequest& request, FailoverDecision& d, std::vector<Resources>& free,
                  const std::vector<std::size_t>* cap) {
  std::vector<std::vector<std::size_t>> on_server(request.servers.size());
  for (std::size_t i : d.order) {
    if (d.placement[i]) on_server[*d.placement[i]].push_back(i);
  }
  for (std::size_t i : d.order) {
    if (!d.placement[i]) continue;
    const std::size_t k = *d.placement[i];
    const PlacementApp& app = request.apps[i];
    const std::size_t current = *d.selection[i];
    const std::size_t top = cap ? std::min((*cap)[i], app.variants.size() - 1) : app.variants.size() - 1;
    for (std::size_t j = top + 1; j-- > current + 1;) {
      const VariantOption& v = app.variants[j];
      if (!eligible(request, app, k, v)) continue;
      const Resources extra = v.demand - app.variants[current].demand;
      if (!free[k].fits(extra)) continue;
      if (request.co_residency) {
        const auto keep = d.selection[i];
        d.selection[i] = j;
        const bool ok = sequence_fits(request, on_server[k], d.selection, request.servers[k].free);
        d.selection[i] = keep;
        if (!ok) continue;
      }
      d.selection[i] = j;
      free[k] -= extra;
      break;
    }
  }
}

std::size_t placed_count(const FailoverDecision& d) {
  std::size_t n = 0;
  for (const auto& p : d.placement) n += p.has_value() ? 1 : 0;
  return n;
}

}  // namespace

FailoverDecision plan_failover(const FailoverRequest& request) {
  FailoverDecision d;
  const std::size_t n = request.apps.size();
  d.selection.assign(n, std::nullopt);
  d.placement.assign(n, std::nullopt);
  d.schedule.assign(n, {});
  d.delta = demand_ratio(request);
  d.order = placement_order(request.apps);

  std::vector<std::size_t> matched(n);
  for (std::size_t i = 0; i < n; ++i) matched[i] = match_variant(request.apps[i].variants, d.delta);

  std::vector<Resources> free(request.servers.size());
  for (std::size_t k = 0; k < free.size(); ++k) free[k] = request.servers[k].free;
  place_pass(request, matched, d, free);
  upgrade_pass(request, d, free, nullptr);
  if (placed_count(d) == n) return d;

  // Recovery first: place everything at its smallest variant, grow toward
  // the matched variant, then use whatever room is left.
  FailoverDecision retry = d;
  retry.selection.assign(n, std::nullopt);
  retry.placement.assign(n, std::nullopt);
  std::vector<Resources> free2(request.servers.size());
  for (std::size_t k = 0; k < free2.size(); ++k) free2[k] = request.servers[k].free;
  place_pass(request, std::vector<std::size_t>(n, 0), retry, free2);
  upgrade_pass(request, retry, free2, &matched);
  upgrade_pass(request, retry, free2, nullptr);
  return placed_count(retry) > placed_count(d) ? retry : d;
}

FailoverDecision progressive_schedule(FailoverDecision decision, const FailoverRequest& request) {
  const std::size_t n = request.apps.size();
  decision.schedule.assign(n, {});
  std::vector<std::vector<std::size_t>> on_server(request.servers.size());
  for (std::size_t i : decision.order) {
    if (decision.placement[i]) on_server[*decision.placement[i]].push_back(i);
  }

  if (request.co_residency) {
    for (std::size_t k = 0; k < on_server.size(); ++k) {
      auto& seq = on_server[k];
      for (std::size_t pos = 0; pos < seq.size(); ++pos) {
        const std::size_t i = seq[pos];
        const PlacementApp& app = request.apps[i];
        while (*decision.selection[i] > 0 &&
               (!eligible(request, app, k, app.variants[*decision.selection[i]]) ||
                !sequence_fits(request, seq, decision.selection, request.servers[k].free))) {
          decision.selection[i] = *decision.selection[i] - 1;
        }
      }
      // A smaller variant can need more compute than a larger one; drop apps
      // from the back until the sequence fits.
      while (!seq.empty() && !sequence_fits(request, seq, decision.selection, request.servers[k].free)) {
        decision.placement[seq.back()] = std::nullopt;
        decision.selection[seq.back()] = std::nullopt;
        seq.pop_back();
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!decision.placement[i]) continue;
    const std::size_t k = *decision.placement[i];
    decision.schedule[i].push_back({0, k, LoadStepKind::Initial});
    if (*decision.selection[i] != 0) decision.schedule[i].push_back({*decision.selection[i], k, LoadStepKind::Upgrade});
  }
  return decision;
}

}  // namespace faillite
