#include "faillite/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace faillite {

using nlohmann::json;

std::string to_string(Tier t) {
  switch (t) {
    case Tier::Primary:
      return "primary";
    case Tier::Warm:
      return "warm";
    case Tier::Serving:
      return "serving";
    case Tier::Loading:
      return "loading";
  }
  return "unknown";
}

std::size_t ClusterState::add_server(Server s) {
  if (s.server_id.empty()) throw SetupError("server with empty id");
  if (server_index_.count(s.server_id)) throw SetupError("duplicate server '" + s.server_id + "'");
  if (s.capacity.mem_mib <= 0.0 || s.capacity.compute < 0.0) {
    throw SetupError("server '" + s.server_id + "' has non-positive capacity");
  }
  const std::size_t k = servers_.size();
  server_index_[s.server_id] = k;
  sites_[s.site_id].push_back(k);
  servers_.push_back(std::move(s));
  alive_.push_back(true);
  return k;
}

std::size_t ClusterState::add_app(Application a) {
  if (app_index_.count(a.app_id)) throw SetupError("duplicate app '" + a.app_id + "'");
  if (!catalog_->has_family(a.family_id)) {
    throw SetupError("app '" + a.app_id + "' references unknown family '" + a.family_id + "'");
  }
  if (a.primary_variant >= catalog_->family(a.family_id).variants.size()) {
    throw SetupError("app '" + a.app_id + "' references a variant outside its family");
  }
  const std::size_t i = apps_.size();
  app_index_[a.app_id] = i;
  apps_.push_back(std::move(a));
  return i;
}

std::optional<std::size_t> ClusterState::find_server(const std::string& id) const {
  auto it = server_index_.find(id);
  if (it == server_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ClusterState::find_app(const std::string& id) const {
  auto it = app_index_.find(id);
  if (it == app_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> ClusterState::alive_servers() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < servers_.size(); ++k) {
    if (alive_[k]) out.push_back(k);
  }
  return out;
}

const ModelFamily& ClusterState::family_of(std::size_t app) const {
  return catalog_->family(apps_.at(app).family_id);
}

const ModelVariant& ClusterState::variant_of(std::size_t app, std::size_t variant) const {
  return family_of(app).variants.at(variant);
}

const ModelVariant& ClusterState::primary_variant_of(std::size_t app) const {
  return variant_of(app, apps_.at(app).primary_variant);
}

void ClusterState::load(std::size_t server, std::size_t app, std::size_t variant, Tier tier) {
  Server& s = servers_.at(server);
  if (!alive_[server]) throw SetupError("load onto dead server '" + s.server_id + "'");
  const Resources& d = variant_of(app, variant).demand;
  if (!s.free().fits(d)) {
    throw SetupError("server '" + s.server_id + "' cannot fit '" + variant_of(app, variant).variant_id +
                     "' for app '" + apps_[app].app_id + "'");
  }
  if (tier != Tier::Loading) {
    for (const auto& r : s.loaded) {
      if (r.app == app && r.tier != Tier::Loading) {
        throw SetupError("app '" + apps_[app].app_id + "' already resident on '" + s.server_id + "'");
      }
    }
  }
  s.loaded.push_back({app, variant, tier});
  s.used += d;
}

bool ClusterState::unload(std::size_t server, std::size_t app, std::size_t variant) {
  Server& s = servers_.at(server);
  auto it = std::find_if(s.loaded.begin(), s.loaded.end(), [&](const Residency& r) {
    return r.app == app && r.variant == variant;
  });
  if (it == s.loaded.end()) return false;
  s.used -= variant_of(app, variant).demand;
  s.loaded.erase(it);
  if (s.loaded.empty()) s.used = {};
  return true;
}

bool ClusterState::set_tier(std::size_t server, std::size_t app, std::size_t variant, Tier tier) {
  for (auto& r : servers_.at(server).loaded) {
    if (r.app == app && r.variant == variant) {
      r.tier = tier;
      return true;
    }
  }
  return false;
}

const Residency* ClusterState::find_residency(std::size_t server, std::size_t app, Tier tier) const {
  for (const auto& r : servers_.at(server).loaded) {
    if (r.app == app && r.tier == tier) return &r;
  }
  return nullptr;
}

void ClusterState::kill(std::size_t server) {
  alive_.at(server) = false;
  servers_[server].loaded.clear();
  servers_[server].used = {};
}

void ClusterState::revive(std::size_t server) { alive_.at(server) = true; }

void ClusterState::set_blocked(std::size_t server, Resources blocked) {
  servers_.at(server).blocked = blocked;
}

Resources ClusterState::total_capacity() const {
  Resources r;
  for (const auto& s : servers_) r += s.capacity;
  return r;
}

Resources ClusterState::total_free(bool alive_only) const {
  Resources r;
  for (std::size_t k = 0; k < servers_.size(); ++k) {
    if (alive_only && !alive_[k]) continue;
    r += servers_[k].free();
  }
  return r;
}

Resources ClusterState::total_used() const {
  Resources r;
  for (const auto& s : servers_) r += s.used;
  return r;
}

bool ClusterState::accounting_consistent() const {
  for (const auto& s : servers_) {
    Resources sum;
    for (const auto& r : s.loaded) sum += catalog_->family(apps_[r.app].family_id).variants[r.variant].demand;
    if (std::abs(sum.mem_mib - s.used.mem_mib) > 1e-6) return false;
    if (std::abs(sum.compute - s.used.compute) > 1e-9) return false;
    const Resources f = s.free();
    if (f.mem_mib < -1e-6 || f.compute < -1e-9) return false;
  }
  return true;
}

void place_primaries(ClusterState& state, std::optional<double> target_util) {
  for (std::size_t i = 0; i < state.apps().size(); ++i) {
    if (state.app(i).primary_server) continue;
    const Resources& d = state.primary_variant_of(i).demand;
    std::optional<std::size_t> best;
    for (std::size_t k : state.alive_servers()) {
      const Server& s = state.server(k);
      if (!s.free().fits(d)) continue;
      if (!best) {
        best = k;
        continue;
      }
      const Server& b = state.server(*best);
      const double fm = s.free().mem_mib, bm = b.free().mem_mib;
      if (fm > bm + kCapacityEps || (std::abs(fm - bm) <= kCapacityEps && s.loaded.size() < b.loaded.size())) {
        best = k;
      }
    }
    if (!best) {
      throw SetupError("cannot place primary of app '" + state.app(i).app_id + "': no server has room for " +
                       state.primary_variant_of(i).variant_id);
    }
    state.load(*best, i, state.app(i).primary_variant, Tier::Primary);
    state.mutable_app(i).primary_server = *best;
  }
  if (target_util) {
    const double util = state.total_used().mem_mib / state.total_capacity().mem_mib;
    if (std::abs(util - *target_util) > 0.05) {
      throw SetupError("primary memory utilization " + std::to_string(util) + " is not within 0.05 of target " +
                       std::to_string(*target_util));
    }
  }
}

Resources usable_capacity(const ClusterState& state, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
  return state.total_free() * (1.0 - alpha);
}

void apply_headroom(ClusterState& state, double headroom) {
  if (!(headroom > 0.0 && headroom <= 1.0)) throw ConfigError("headroom must lie in (0, 1]");
  const Resources cap = state.total_capacity();
  Resources free_now;
  for (const auto& s : state.servers()) free_now += s.capacity - s.used;
  const Resources target = cap * headroom;
  if (target.mem_mib > free_now.mem_mib + 1e-6 || target.compute > free_now.compute + 1e-9) {
    throw SetupError("headroom " + std::to_string(headroom) +
                     " exceeds the capacity left after primary placement");
  }
  const double mem_scale = free_now.mem_mib > 0 ? target.mem_mib / free_now.mem_mib : 0.0;
  const double cpu_scale = free_now.compute > 0 ? target.compute / free_now.compute : 0.0;
  for (std::size_t k = 0; k < state.servers().size(); ++k) {
    const Server& s = state.server(k);
    const Resources room = s.capacity - s.used;
    state.set_blocked(k, {room.mem_mib * (1.0 - mem_scale), room.compute * (1.0 - cpu_scale)});
  }
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? field<T>(obj, key, where) : fallback;
}

std::size_t resolve_variant(const Catalog& catalog, const std::string& app_id, const std::string& family,
                            const std::string& ref) {
  const auto& fam = catalog.family(family);
  if (ref == "largest") return fam.variants.size() - 1;
  if (ref == "smallest") return 0;
  auto idx = fam.index_of(ref);
  if (!idx) throw ConfigError("app '" + app_id + "': unknown variant '" + ref + "' in family '" + family + "'");
  return *idx;
}

}  // namespace

ClusterState cluster_from_json(const json& doc, const Catalog& catalog) {
  require_known_keys(doc, {"schema_version", "servers", "apps", "app_mix", "target_util"}, "cluster");
  const int version = field<int>(doc, "schema_version", "cluster");
  if (version != kClusterSchemaVersion) {
    throw ConfigError("cluster: unsupported schema_version " + std::to_string(version));
  }
  ClusterState state(&catalog);
  for (const auto& s : doc.at("servers")) {
    require_known_keys(s, {"server_id", "site_id", "mem_gib", "compute", "server_class"}, "cluster.server");
    Server srv;
    srv.server_id = field<std::string>(s, "server_id", "server");
    srv.site_id = field<std::string>(s, "site_id", "server '" + srv.server_id + "'");
    srv.capacity.mem_mib = field<double>(s, "mem_gib", "server '" + srv.server_id + "'") * 1024.0;
    srv.capacity.compute = field<double>(s, "compute", "server '" + srv.server_id + "'");
    srv.server_class = field_or<std::string>(s, "server_class", "a2", "server");
    state.add_server(std::move(srv));
  }

  auto add_app = [&](Application a, const std::string& variant_ref, const std::string& server_ref) {
    if (!catalog.has_family(a.family_id)) {
      throw ConfigError("app '" + a.app_id + "': unknown family '" + a.family_id + "'");
    }
    a.primary_variant = resolve_variant(catalog, a.app_id, a.family_id, variant_ref);
    if (server_ref != "auto") {
      auto k = state.find_server(server_ref);
      if (!k) throw ConfigError("app '" + a.app_id + "': unknown primary server '" + server_ref + "'");
      a.primary_server = *k;
    }
    if (!(a.rate > 0.0)) throw ConfigError("app '" + a.app_id + "': rate must be positive");
    if (!(a.slo_ms > 0.0)) throw ConfigError("app '" + a.app_id + "': slo_ms must be positive");
    const std::size_t i = state.add_app(a);
    if (a.primary_server) state.load(*a.primary_server, i, a.primary_variant, Tier::Primary);
  };

  if (doc.contains("apps")) {
    for (const auto& a : doc.at("apps")) {
      require_known_keys(a, {"app_id", "family_id", "primary_variant", "primary_server", "critical", "rate", "slo_ms"},
                         "cluster.app");
      Application app;
      app.app_id = field<std::string>(a, "app_id", "app");
      const std::string where = "app '" + app.app_id + "'";
      app.family_id = field<std::string>(a, "family_id", where);
      app.critical = field_or<bool>(a, "critical", false, where);
      app.rate = field_or<double>(a, "rate", 1.0, where);
      app.slo_ms = field_or<double>(a, "slo_ms", 1e9, where);
      add_app(std::move(app), field_or<std::string>(a, "primary_variant", "largest", where),
              field_or<std::string>(a, "primary_server", "auto", where));
    }
  }
  if (doc.contains("app_mix")) {
    // Round-robin over the listed families; all primaries placed by worst-fit.
    const auto& mix = doc.at("app_mix");
    require_known_keys(mix, {"count", "families", "primary_variant", "slo_ms", "rate", "id_prefix"}, "cluster.app_mix");
    const int count = field<int>(mix, "count", "app_mix");
    const auto families = field<std::vector<std::string>>(mix, "families", "app_mix");
    if (families.empty() || count < 0) throw ConfigError("app_mix: needs families and a non-negative count");
    const auto prefix = field_or<std::string>(mix, "id_prefix", "app", "app_mix");
    const auto variant_ref = field_or<std::string>(mix, "primary_variant", "largest", "app_mix");
    for (int n = 0; n < count; ++n) {
      Application app;
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d", n);
      app.app_id = prefix + buf;
      app.family_id = families[static_cast<std::size_t>(n) % families.size()];
      app.rate = field_or<double>(mix, "rate", 1.0, "app_mix");
      app.slo_ms = field_or<double>(mix, "slo_ms", 1e9, "app_mix");
      add_app(std::move(app), variant_ref, "auto");
    }
  }
  std::optional<double> target;
  if (doc.contains("target_util")) target = field<double>(doc, "target_util", "cluster");
  place_primaries(state, target);
  return state;
}

ClusterState load_cluster(const std::string& path, const Catalog& catalog) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cluster file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cluster '" + path + "': " + e.what());
  }
  return cluster_from_json(doc, catalog);
}

json cluster_to_json(const ClusterState& state) {
  json servers = json::array();
  for (const auto& s : state.servers()) {
    servers.push_back({{"server_id", s.server_id},
                       {"site_id", s.site_id},
                       {"mem_gib", s.capacity.mem_mib / 1024.0},
                       {"compute", s.capacity.compute},
                       {"server_class", s.server_class}});
  }
  json apps = json::array();
  for (std::size_t i = 0; i < state.apps().size(); ++i) {
    const auto& a = state.app(i);
    apps.push_back({{"app_id", a.app_id},
                    {"family_id", a.family_id},
                    {"primary_variant", state.primary_variant_of(i).variant_id},
                    {"primary_server", a.primary_server ? state.server(*a.primary_server).server_id : "auto"},
                    {"critical", a.critical},
                    {"rate", a.rate},
                    {"slo_ms", a.slo_ms}});
  }
  return {{"schema_version", kClusterSchemaVersion}, {"servers", servers}, {"apps", apps}};
}

}  // namespace faillite
