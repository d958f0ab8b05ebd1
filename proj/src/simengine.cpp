#include "faillite/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <random>

#include <nlohmann/json.hpp>

namespace faillite {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Heartbeat:
      return "heartbeat";
    case EventKind::DetectorCheck:
      return "detector_check";
    case EventKind::InjectFailure:
      return "inject_failure";
    case EventKind::InjectSiteFailure:
      return "inject_site_failure";
    case EventKind::LoadComplete:
      return "load_complete";
    case EventKind::TrafficSwitch:
      return "traffic_switch";
    case EventKind::NotifyClient:
      return "notify_client";
    case EventKind::Restore:
      return "restore";
  }
  return "unknown";
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<bool> select_critical(const ClusterState& state, double k_fraction) {
  if (!(k_fraction >= 0.0 && k_fraction <= 1.0)) throw ConfigError("k_fraction must be in [0, 1]");
  const std::size_t n = state.apps().size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ha = fnv1a(state.app(a).app_id);
    const auto hb = fnv1a(state.app(b).app_id);
    return ha != hb ? ha < hb : state.app(a).app_id < state.app(b).app_id;
  });
  const auto count = static_cast<std::size_t>(std::ceil(k_fraction * static_cast<double>(n) - 1e-9));
  std::vector<bool> critical(n, false);
  for (std::size_t j = 0; j < std::min(count, n); ++j) critical[order[j]] = true;
  return critical;
}

namespace {

using nlohmann::json;

enum class LoadPurpose { ColdInitial, Upgrade, PrimaryReload, WarmReload };

std::string to_string(LoadPurpose p) {
  switch (p) {
    case LoadPurpose::ColdInitial:
      return "cold";
    case LoadPurpose::Upgrade:
      return "upgrade";
    case LoadPurpose::PrimaryReload:
      return "primary_reload";
    case LoadPurpose::WarmReload:
      return "warm_reload";
  }
  return "unknown";
}

struct Load {
  std::size_t app = 0;
  std::size_t server = 0;
  std::size_t variant = 0;
  LoadPurpose purpose = LoadPurpose::ColdInitial;
  std::uint64_t generation = 0;
  bool active = true;
};

enum class Mode { Primary, Down, Backup };

struct AppRuntime {
  Mode mode = Mode::Primary;
  std::optional<std::size_t> serving_server;
  std::size_t serving_variant = 0;
  bool serving_is_warm = false;
  std::vector<std::pair<std::size_t, std::size_t>> warm;  // (server, variant)
  std::optional<std::size_t> timeline;                    // latest failure
  std::uint64_t generation = 0;
  // Server whose detection hands this app to the controller.
  std::optional<std::size_t> lost_on;
  std::optional<std::pair<std::size_t, std::size_t>> pending_upgrade;  // (server, variant)
  bool initial_done = false;
};

class Simulator {
 public:
  Simulator(const ClusterState& cluster, const SimSettings& cfg, std::uint64_t seed)
      : st_(cluster), cfg_(cfg), seed_(seed), detector_(cfg.detector), policy_(make_policy(cfg.policy)) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
    std::array<std::uint64_t, 3> streams{};
    std::mt19937_64 root(seq);
    for (auto& s : streams) s = root();
    policy_rng_.seed(streams[0]);
    jitter_rng_.seed(streams[1]);
    pick_rng_.seed(streams[2]);
  }

  RunResult run() {
    setup();
    while (!heap_.empty()) {
      const Event e = heap_.top();
      if (e.time > cfg_.horizon) break;
      heap_.pop();
      if (e.time < now_) throw InternalFault("event scheduled in the past: " + to_string(e.kind));
      now_ = e.time;
      dispatch(e);
      ++events_;
      if (cfg_.check_invariants && !st_.accounting_consistent()) {
        throw InternalFault("capacity accounting broken after " + to_string(e.kind) + " at t=" +
                            std::to_string(now_) + "us");
      }
    }
    RunResult r;
    for (auto& t : timelines_) {
      if (t.final_variant) t.acc_backup = st_.variant_of(t.app, *t.final_variant).norm_accuracy;
    }
    r.timelines = timelines_;
    r.metrics = compute_metrics(timelines_);
    r.metrics.policy = to_string(cfg_.policy);
    r.metrics.seed = seed_;
    r.proactive = proactive_;
    r.log = std::move(log_);
    r.events = events_;
    return r;
  }

 private:
  // ---- setup ---------------------------------------------------------------

  void setup() {
    if (cfg_.headroom) apply_headroom(st_, *cfg_.headroom);
    const std::size_t n_apps = st_.apps().size();
    apps_.assign(n_apps, {});
    if (cfg_.critical_from_cluster) {
      critical_.assign(n_apps, false);
      for (std::size_t i = 0; i < n_apps; ++i) critical_[i] = st_.app(i).critical;
    } else {
      critical_ = select_critical(st_, cfg_.k_fraction);
    }
    upgrade_queue_.assign(st_.servers().size(), {});
    upgrading_.assign(st_.servers().size(), false);
    beat_index_.assign(st_.servers().size(), 0);

    proactive_ = policy_->plan_proactive(context());
    if (!proactive_.feasible) {
      std::string msg = "warm backup plan infeasible";
      for (const auto& why : proactive_.infeasible) msg += "; " + why;
      throw CapacityPlanningError(msg);
    }
    for (const auto& w : proactive_.warm) {
      st_.load(w.server, w.app, w.variant, Tier::Warm);
      apps_[w.app].warm.emplace_back(w.server, w.variant);
    }
    log(0, "setup", {{"policy", to_string(cfg_.policy)},
                     {"warm_backups", proactive_.warm.size()},
                     {"objective", proactive_.objective},
                     {"exact", proactive_.exact},
                     {"critical", std::count(critical_.begin(), critical_.end(), true)}});
    for (const auto& w : proactive_.warm) {
      log(0, "warm_backup", {{"app", st_.app(w.app).app_id},
                             {"variant", st_.variant_of(w.app, w.variant).variant_id},
                             {"server", st_.server(w.server).server_id}});
    }

    for (std::size_t k = 0; k < st_.servers().size(); ++k) {
      detector_.register_server(st_.server(k).server_id, 0, st_.server(k).site_id);
      schedule_beat(k);
    }
    for (Micros t = cfg_.detector.check_phase; t <= cfg_.horizon; t += cfg_.detector.check_interval) {
      push({t, 0, EventKind::DetectorCheck});
      if (cfg_.detector.check_interval <= 0) break;
    }
    schedule_injections();
  }

  void schedule_injections() {
    std::vector<std::string> site_ids;
    for (const auto& [site, _] : st_.sites()) site_ids.push_back(site);
    std::vector<std::size_t> previous_servers;
    for (const auto& inj : cfg_.injections) {
      if (inj.time < 0 || inj.time > cfg_.horizon) {
        throw ConfigError("injection at t=" + std::to_string(inj.time) + "us lies outside the horizon");
      }
      const bool site_level = inj.kind == Injection::Kind::SiteFailure || inj.kind == Injection::Kind::SiteRestore;
      const std::size_t universe = site_level ? site_ids.size() : st_.servers().size();
      std::vector<std::size_t> chosen;
      if (!inj.targets.empty()) {
        for (const auto& id : inj.targets) {
          if (site_level) {
            auto it = std::find(site_ids.begin(), site_ids.end(), id);
            if (it == site_ids.end()) throw ConfigError("injection names unknown site '" + id + "'");
            chosen.push_back(static_cast<std::size_t>(it - site_ids.begin()));
          } else {
            auto k = st_.find_server(id);
            if (!k) throw ConfigError("injection names unknown server '" + id + "'");
            chosen.push_back(*k);
          }
        }
      } else if (inj.pick == "random" || inj.pick == "rotate") {
        if (inj.count < 0 || static_cast<std::size_t>(inj.count) > universe) {
          throw ConfigError("injection count " + std::to_string(inj.count) + " exceeds available targets");
        }
        std::vector<std::size_t> all(universe);
        for (std::size_t j = 0; j < universe; ++j) all[j] = j;
        if (inj.pick == "random") {
          for (std::size_t j = 0; j < static_cast<std::size_t>(inj.count); ++j) {
            const std::size_t r = j + static_cast<std::size_t>(pick_rng_() % (universe - j));
            std::swap(all[j], all[r]);
            chosen.push_back(all[j]);
          }
        } else {
          for (int j = 0; j < inj.count; ++j) chosen.push_back((seed_ + static_cast<std::uint64_t>(j)) % universe);
        }
      } else if (inj.pick == "previous") {
        if (inj.kind != Injection::Kind::ServerRestore) throw ConfigError("pick 'previous' applies to restores only");
      } else {
        throw ConfigError("injection needs targets or pick = random, rotate or previous");
      }

      switch (inj.kind) {
        case Injection::Kind::ServerFailure:
          previous_servers = chosen;
          for (std::size_t k : chosen) push({inj.time, 0, EventKind::InjectFailure, k});
          break;
        case Injection::Kind::SiteFailure:
          previous_servers.clear();
          for (std::size_t s : chosen) {
            for (std::size_t k : st_.sites().at(site_ids[s])) previous_servers.push_back(k);
            push({inj.time, 0, EventKind::InjectSiteFailure, s});
          }
          break;
        case Injection::Kind::ServerRestore:
          if (inj.pick == "previous") chosen = previous_servers;
          for (std::size_t k : chosen) push({inj.time, 0, EventKind::Restore, k});
          break;
        case Injection::Kind::SiteRestore:
          for (std::size_t s : chosen) {
            for (std::size_t k : st_.sites().at(site_ids[s])) push({inj.time, 0, EventKind::Restore, k});
          }
          break;
      }
    }
    site_ids_ = std::move(site_ids);
  }

  // ---- event plumbing ------------------------------------------------------

  void push(Event e) {
    e.seq = next_seq_++;
    heap_.push(e);
  }

  void log(Micros t, const std::string& kind, json payload) {
    json rec = {{"t_us", t}, {"kind", kind}};
    for (auto& [k, v] : payload.items()) rec[k] = v;
    log_.push_back(rec.dump());
  }

  void schedule_beat(std::size_t k) {
    const Micros base = static_cast<Micros>(++beat_index_[k]) * cfg_.detector.period + beat_origin(k);
    Micros t = base;
    if (cfg_.heartbeat_jitter > 0) {
      t += static_cast<Micros>(jitter_rng_() % static_cast<std::uint64_t>(cfg_.heartbeat_jitter + 1));
    }
    if (t <= cfg_.horizon) push({t, 0, EventKind::Heartbeat, k});
  }

  Micros beat_origin(std::size_t k) const {
    auto it = beat_origin_.find(k);
    return it == beat_origin_.end() ? 0 : it->second;
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::Heartbeat:
        if (st_.alive(e.target)) {
          detector_.record_heartbeat(st_.server(e.target).server_id, now_);
          schedule_beat(e.target);
        }
        break;
      case EventKind::DetectorCheck:
        on_check();
        break;
      case EventKind::InjectFailure:
        crash(e.target);
        break;
      case EventKind::InjectSiteFailure:
        log(now_, "site_failure", {{"site", site_ids_[e.target]}});
        for (std::size_t k : st_.sites().at(site_ids_[e.target])) crash(k);
        break;
      case EventKind::LoadComplete:
        on_load_complete(e.target);
        break;
      case EventKind::TrafficSwitch:
        on_switch(e);
        break;
      case EventKind::NotifyClient:
        on_notify(e);
        break;
      case EventKind::Restore:
        restore(e.target);
        break;
    }
  }

  PlanningContext context() const {
    PlanningContext ctx;
    ctx.state = &st_;
    ctx.critical = critical_;
    ctx.available.resize(st_.servers().size());
    for (std::size_t k = 0; k < st_.servers().size(); ++k) {
      ctx.available[k] = st_.alive(k) && !detector_.is_failed(st_.server(k).server_id);
    }
    ctx.alpha = cfg_.alpha;
    ctx.site_independence = cfg_.site_independence;
    ctx.replicas_per_app = cfg_.replicas_per_app;
    ctx.network_latency_ms = cfg_.network_latency_ms;
    ctx.partial_k = cfg_.partial_k;
    ctx.exact_budget = cfg_.exact_budget;
    ctx.node_limit = cfg_.node_limit;
    return ctx;
  }

  FailoverTimeline& open_timeline(std::size_t app) {
    FailoverTimeline t;
    t.app_id = st_.app(app).app_id;
    t.app = app;
    t.critical = critical_[app];
    t.failure_time = now_;
    t.primary_variant = st_.app(app).primary_variant;
    t.acc_primary = st_.primary_variant_of(app).norm_accuracy;
    apps_[app].timeline = timelines_.size();
    timelines_.push_back(t);
    return timelines_.back();
  }

  Micros load_duration(std::size_t app, std::size_t variant) const {
    return from_ms(st_.catalog().load_time_ms(st_.variant_of(app, variant)));
  }

  std::size_t start_load(std::size_t app, std::size_t server, std::size_t variant, LoadPurpose purpose) {
    st_.load(server, app, variant, Tier::Loading);
    loads_.push_back({app, server, variant, purpose, apps_[app].generation, true});
    const std::size_t id = loads_.size() - 1;
    push({now_ + load_duration(app, variant), 0, EventKind::LoadComplete, id});
    log(now_, "load_start", {{"app", st_.app(app).app_id},
                             {"server", st_.server(server).server_id},
                             {"variant", st_.variant_of(app, variant).variant_id},
                             {"purpose", to_string(purpose)}});
    return id;
  }

  // Drops every in-flight load of `app`, releasing the memory it held.
  void cancel_loads(std::size_t app) {
    std::vector<std::size_t> touched;
    for (auto& l : loads_) {
      if (!l.active || l.app != app) continue;
      l.active = false;
      if (st_.alive(l.server)) st_.unload(l.server, l.app, l.variant);
      if (l.purpose == LoadPurpose::Upgrade) {
        upgrading_[l.server] = false;
        touched.push_back(l.server);
      }
    }
    apps_[app].pending_upgrade.reset();
    for (std::size_t k : touched) advance_upgrades(k);
  }

  // ---- failures ------------------------------------------------------------

  void crash(std::size_t k) {
    if (!st_.alive(k)) {
      log(now_, "warning", {{"detail", "duplicate injection on dead server"}, {"server", st_.server(k).server_id}});
      return;
    }
    log(now_, "server_failure", {{"server", st_.server(k).server_id}});
    for (const Residency& r : st_.server(k).loaded) {
      AppRuntime& a = apps_[r.app];
      switch (r.tier) {
        case Tier::Primary:
          if (a.mode == Mode::Primary) {
            open_timeline(r.app);
            a.mode = Mode::Down;
            a.lost_on = k;
            ++a.generation;
          }
          break;
        case Tier::Serving: {
          // A backup that dies before its client was notified keeps the open
          // timeline; one that dies after starts a new failure.
          const bool notified = a.timeline && timelines_[*a.timeline].recovered();
          if (a.mode == Mode::Backup && notified) open_timeline(r.app);
          a.mode = Mode::Down;
          a.serving_server.reset();
          a.lost_on = k;
          a.pending_upgrade.reset();
          ++a.generation;
          break;
        }
        case Tier::Warm:
          std::erase(a.warm, std::make_pair(k, r.variant));
          break;
        case Tier::Loading:
          break;
      }
    }
    for (auto& l : loads_) {
      if (!l.active || l.server != k) continue;
      l.active = false;
      AppRuntime& a = apps_[l.app];
      if (l.purpose == LoadPurpose::ColdInitial && a.mode == Mode::Down && l.generation == a.generation) {
        a.lost_on = k;  // re-planned once this server is declared
        a.pending_upgrade.reset();
      }
    }
    upgrade_queue_[k].clear();
    upgrading_[k] = false;
    st_.kill(k);
  }

  void on_check() {
    const auto declared = detector_.check(now_);
    if (declared.empty()) return;
    std::vector<std::size_t> servers;
    for (const auto& id : declared) servers.push_back(*st_.find_server(id));
    json ids = declared;
    log(now_, "detected", {{"servers", ids}});
    for (const auto& site : detector_.newly_failed_sites()) log(now_, "site_detected", {{"site", site}});

    std::vector<std::size_t> batch;
    for (std::size_t i = 0; i < apps_.size(); ++i) {
      AppRuntime& a = apps_[i];
      if (a.mode != Mode::Down || !a.lost_on) continue;
      if (std::find(servers.begin(), servers.end(), *a.lost_on) == servers.end()) continue;
      a.lost_on.reset();
      FailoverTimeline& t = timelines_[*a.timeline];
      if (!t.detection_time) t.detection_time = now_;
      batch.push_back(i);
    }
    if (!batch.empty()) fail_over(batch);
  }

  void fail_over(const std::vector<std::size_t>& batch) {
    std::vector<std::size_t> cold;
    for (std::size_t i : batch) {
      AppRuntime& a = apps_[i];
      std::optional<std::pair<std::size_t, std::size_t>> pick;
      for (const auto& w : a.warm) {
        if (st_.alive(w.first) && !detector_.is_failed(st_.server(w.first).server_id)) {
          pick = w;
          break;
        }
      }
      if (!pick) {
        cold.push_back(i);
        continue;
      }
      std::erase(a.warm, *pick);
      st_.set_tier(pick->first, i, pick->second, Tier::Serving);
      timelines_[*a.timeline].backup = BackupKind::Warm;
      a.serving_is_warm = true;
      push({now_, 0, EventKind::TrafficSwitch, i, pick->first, pick->second, a.generation});
    }
    if (cold.empty()) return;

    const ReactiveResult plan = policy_->plan_reactive(context(), cold, policy_rng_);
    log(now_, "reactive_plan", {{"apps", cold.size()}, {"loads", plan.loads.size()},
                                {"unrecovered", plan.unrecovered.size()}, {"delta", std::isfinite(plan.delta) ? plan.delta : -1.0}});
    for (const auto& c : plan.loads) {
      AppRuntime& a = apps_[c.app];
      if (c.schedule.empty()) throw InternalFault("empty load schedule for " + st_.app(c.app).app_id);
      timelines_[*a.timeline].backup = BackupKind::Cold;
      a.serving_is_warm = false;
      a.initial_done = false;
      try {
        start_load(c.app, c.schedule.front().server, c.schedule.front().variant, LoadPurpose::ColdInitial);
      } catch (const SetupError& err) {
        throw InternalFault(std::string("planned load does not fit: ") + err.what());
      }
      if (c.schedule.size() > 1) {
        a.pending_upgrade = std::make_pair(c.schedule[1].server, c.schedule[1].variant);
        upgrade_queue_[c.schedule[1].server].push_back(c.app);
      }
    }
    for (std::size_t i : plan.unrecovered) {
      log(now_, "unrecovered", {{"app", st_.app(i).app_id}});
    }
  }

  // ---- loads, switches, notifications ----------------------------------------

  void on_load_complete(std::size_t id) {
    Load& l = loads_[id];
    if (!l.active) return;
    l.active = false;
    AppRuntime& a = apps_[l.app];
    log(now_, "load_complete", {{"app", st_.app(l.app).app_id},
                                {"server", st_.server(l.server).server_id},
                                {"variant", st_.variant_of(l.app, l.variant).variant_id},
                                {"purpose", to_string(l.purpose)}});
    switch (l.purpose) {
      case LoadPurpose::ColdInitial:
        st_.set_tier(l.server, l.app, l.variant, Tier::Serving);
        push({now_, 0, EventKind::TrafficSwitch, l.app, l.server, l.variant, a.generation});
        a.initial_done = true;
        advance_upgrades(l.server);
        break;
      case LoadPurpose::Upgrade: {
        upgrading_[l.server] = false;
        if (a.mode == Mode::Backup && a.serving_server == l.server) {
          st_.unload(l.server, l.app, a.serving_variant);
          st_.set_tier(l.server, l.app, l.variant, Tier::Serving);
          a.serving_variant = l.variant;
          FailoverTimeline& t = timelines_[*a.timeline];
          t.upgrade_time = now_;
          if (t.recovery_time) t.final_variant = l.variant;
        } else {
          st_.unload(l.server, l.app, l.variant);
        }
        a.pending_upgrade.reset();
        auto& q = upgrade_queue_[l.server];
        if (!q.empty() && q.front() == l.app) q.pop_front();
        advance_upgrades(l.server);
        break;
      }
      case LoadPurpose::PrimaryReload:
        switch_back(l.app, l.server);
        break;
      case LoadPurpose::WarmReload:
        st_.set_tier(l.server, l.app, l.variant, Tier::Warm);
        a.warm.emplace_back(l.server, l.variant);
        break;
    }
  }

  // Starts the next background upgrade on server k. Upgrades run one at a
  // time in plan order, which is the order the co-residency check assumed.
  void advance_upgrades(std::size_t k) {
    auto& q = upgrade_queue_[k];
    while (!upgrading_[k] && !q.empty()) {
      const std::size_t i = q.front();
      AppRuntime& a = apps_[i];
      if (!a.pending_upgrade || a.pending_upgrade->first != k) {
        q.pop_front();
        continue;
      }
      if (!a.initial_done) return;
      const std::size_t v = a.pending_upgrade->second;
      if (!st_.server(k).free().fits(st_.variant_of(i, v).demand)) {
        log(now_, "upgrade_skipped", {{"app", st_.app(i).app_id}, {"server", st_.server(k).server_id}});
        a.pending_upgrade.reset();
        q.pop_front();
        continue;
      }
      start_load(i, k, v, LoadPurpose::Upgrade);
      upgrading_[k] = true;
    }
  }

  void on_switch(const Event& e) {
    AppRuntime& a = apps_[e.target];
    if (e.generation != a.generation) return;
    a.mode = Mode::Backup;
    a.serving_server = e.server;
    a.serving_variant = e.variant;
    log(now_, "traffic_switch", {{"app", st_.app(e.target).app_id},
                                 {"server", st_.server(e.server).server_id},
                                 {"variant", st_.variant_of(e.target, e.variant).variant_id}});
    push({now_ + cfg_.notify_latency, 0, EventKind::NotifyClient, e.target, e.server, e.variant, a.generation});
  }

  void on_notify(const Event& e) {
    AppRuntime& a = apps_[e.target];
    if (e.generation != a.generation) return;
    FailoverTimeline& t = timelines_[*a.timeline];
    t.recovery_time = now_;
    t.final_variant = a.serving_variant;
    log(now_, "notify_client", {{"app", st_.app(e.target).app_id},
                                {"server", st_.server(e.server).server_id},
                                {"mttr_ms", *t.mttr_ms()}});
  }

  // ---- restore -------------------------------------------------------------

  void restore(std::size_t k) {
    if (st_.alive(k)) {
      log(now_, "warning", {{"detail", "restore of a live server"}, {"server", st_.server(k).server_id}});
      return;
    }
    st_.revive(k);
    detector_.restore(st_.server(k).server_id, now_);
    beat_origin_[k] = now_;
    beat_index_[k] = 0;
    schedule_beat(k);
    log(now_, "restore", {{"server", st_.server(k).server_id}});
    for (std::size_t i = 0; i < apps_.size(); ++i) {
      if (st_.app(i).primary_server != k) continue;
      try {
        start_load(i, k, st_.app(i).primary_variant, LoadPurpose::PrimaryReload);
      } catch (const SetupError&) {
        log(now_, "warning", {{"detail", "primary does not fit on restored server"}, {"app", st_.app(i).app_id}});
      }
    }
    for (const auto& w : proactive_.warm) {
      if (w.server != k) continue;
      try {
        start_load(w.app, k, w.variant, LoadPurpose::WarmReload);
      } catch (const SetupError&) {
        log(now_, "warning", {{"detail", "warm backup does not fit on restored server"}, {"app", st_.app(w.app).app_id}});
      }
    }
  }

  void switch_back(std::size_t i, std::size_t k) {
    AppRuntime& a = apps_[i];
    ++a.generation;
    cancel_loads(i);
    if (a.mode == Mode::Backup && a.serving_server && st_.alive(*a.serving_server)) {
      const std::size_t s = *a.serving_server;
      if (a.serving_is_warm) {
        st_.set_tier(s, i, a.serving_variant, Tier::Warm);
        a.warm.emplace_back(s, a.serving_variant);
      } else {
        st_.unload(s, i, a.serving_variant);
      }
    }
    st_.set_tier(k, i, st_.app(i).primary_variant, Tier::Primary);
    a.mode = Mode::Primary;
    a.serving_server.reset();
    a.serving_is_warm = false;
    a.lost_on.reset();
    if (a.timeline) timelines_[*a.timeline].switch_back_time = now_;
    log(now_, "switch_back", {{"app", st_.app(i).app_id}, {"server", st_.server(k).server_id}});
  }

  ClusterState st_;
  const SimSettings& cfg_;
  std::uint64_t seed_;
  HeartbeatDetector detector_;
  std::unique_ptr<FailoverPolicy> policy_;
  std::mt19937_64 policy_rng_;
  std::mt19937_64 jitter_rng_;
  std::mt19937_64 pick_rng_;

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap_;
  std::uint64_t next_seq_ = 0;
  Micros now_ = 0;
  std::size_t events_ = 0;

  std::vector<bool> critical_;
  std::vector<AppRuntime> apps_;
  std::vector<Load> loads_;
  std::vector<std::deque<std::size_t>> upgrade_queue_;
  std::vector<bool> upgrading_;
  std::vector<std::uint64_t> beat_index_;
  std::map<std::size_t, Micros> beat_origin_;
  std::vector<std::string> site_ids_;
  ProactiveResult proactive_;
  std::vector<FailoverTimeline> timelines_;
  std::vector<std::string> log_;
};

}  // namespace

RunResult simulate(const ClusterState& cluster, const SimSettings& settings, std::uint64_t seed,
                   const std::string& scenario_hash) {
  Simulator sim(cluster, settings, seed);
  RunResult r = sim.run();
  r.metrics.scenario_hash = scenario_hash;
  return r;
}

}  // namespace faillite
