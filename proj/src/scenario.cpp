#include "faillite/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace faillite {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& p, const std::string& base_dir) {
  fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("scenario field '") + key + "' has the wrong type");
  }
}

Injection::Kind parse_kind(const std::string& k) {
  if (k == "server_failure") return Injection::Kind::ServerFailure;
  if (k == "site_failure") return Injection::Kind::SiteFailure;
  if (k == "server_restore") return Injection::Kind::ServerRestore;
  if (k == "site_restore") return Injection::Kind::SiteRestore;
  throw ConfigError("unknown injection kind '" + k + "'");
}

std::string kind_name(Injection::Kind k) {
  switch (k) {
    case Injection::Kind::ServerFailure:
      return "server_failure";
    case Injection::Kind::SiteFailure:
      return "site_failure";
    case Injection::Kind::ServerRestore:
      return "server_restore";
    case Injection::Kind::SiteRestore:
      return "site_restore";
  }
  return "server_failure";
}

bool is_failure(const Injection& inj) {
  return inj.kind == Injection::Kind::ServerFailure || inj.kind == Injection::Kind::SiteFailure;
}

}  // namespace

Injection injection_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("injection must be an object");
  require_known_keys(doc, {"kind", "time_ms", "targets", "pick", "count"}, "injection");
  if (!doc.contains("kind") || !doc.contains("time_ms")) throw ConfigError("injection needs 'kind' and 'time_ms'");
  Injection inj;
  inj.kind = parse_kind(doc.at("kind").get<std::string>());
  inj.time = from_ms(doc.at("time_ms").get<double>());
  inj.targets = get_or<std::vector<std::string>>(doc, "targets", {});
  inj.pick = get_or<std::string>(doc, "pick", "");
  inj.count = get_or<int>(doc, "count", 1);
  if (inj.targets.empty() && inj.pick.empty()) throw ConfigError("injection needs 'targets' or 'pick'");
  if (!inj.targets.empty() && !inj.pick.empty()) throw ConfigError("injection takes 'targets' or 'pick', not both");
  return inj;
}

json to_json(const Injection& inj) {
  json j = {{"kind", kind_name(inj.kind)}, {"time_ms", to_ms(inj.time)}};
  if (!inj.targets.empty()) {
    j["targets"] = inj.targets;
  } else {
    j["pick"] = inj.pick;
    j["count"] = inj.count;
  }
  return j;
}

Scenario scenario_from_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  require_known_keys(doc,
                     {"schema_version", "name", "catalog", "cluster", "policy", "k_fraction", "critical_from_cluster",
                      "alpha", "headroom", "site_independence", "replicas_per_app", "network_latency_ms", "notify_ms",
                      "detector", "heartbeat_jitter_ms", "horizon_ms", "seed", "repeats", "partial_k", "exact_budget",
                      "node_limit", "check_invariants", "injections"},
                     "scenario");
  const int version = get_or<int>(doc, "schema_version", kScenarioSchemaVersion);
  if (version != kScenarioSchemaVersion) {
    throw ConfigError("unsupported scenario schema_version " + std::to_string(version));
  }
  Scenario s;
  s.name = get_or<std::string>(doc, "name", "");
  if (doc.contains("catalog") && !doc.at("catalog").is_null()) {
    s.catalog_path = resolve(doc.at("catalog").get<std::string>(), base_dir);
  }
  if (!doc.contains("cluster")) throw ConfigError("scenario needs a 'cluster' (path or inline object)");
  if (doc.at("cluster").is_string()) {
    s.cluster_path = resolve(doc.at("cluster").get<std::string>(), base_dir);
  } else if (doc.at("cluster").is_object()) {
    s.cluster_inline = doc.at("cluster");
  } else {
    throw ConfigError("scenario 'cluster' must be a path or an object");
  }

  SimSettings& st = s.settings;
  st.policy = parse_policy(get_or<std::string>(doc, "policy", "faillite"));
  st.k_fraction = get_or<double>(doc, "k_fraction", 0.5);
  st.critical_from_cluster = get_or<bool>(doc, "critical_from_cluster", false);
  st.alpha = get_or<double>(doc, "alpha", 0.1);
  if (doc.contains("headroom") && doc.at("headroom").is_null()) {
    st.headroom.reset();
  } else {
    st.headroom = get_or<double>(doc, "headroom", 0.2);
  }
  st.site_independence = get_or<bool>(doc, "site_independence", false);
  st.replicas_per_app = get_or<int>(doc, "replicas_per_app", 1);
  st.network_latency_ms = get_or<double>(doc, "network_latency_ms", 0.0);
  st.notify_latency = from_ms(get_or<double>(doc, "notify_ms", 10.0));
  if (doc.contains("detector")) {
    const json& d = doc.at("detector");
    require_known_keys(d, {"period_ms", "check_interval_ms", "check_phase_ms", "missed_periods"}, "detector");
    st.detector.period = from_ms(get_or<double>(d, "period_ms", 20.0));
    st.detector.check_interval = from_ms(get_or<double>(d, "check_interval_ms", 100.0));
    st.detector.check_phase = from_ms(get_or<double>(d, "check_phase_ms", 0.0));
    st.detector.missed_periods = get_or<int>(d, "missed_periods", 2);
  }
  st.heartbeat_jitter = from_ms(get_or<double>(doc, "heartbeat_jitter_ms", 0.0));
  st.horizon = from_ms(get_or<double>(doc, "horizon_ms", 30'000.0));
  st.partial_k = get_or<bool>(doc, "partial_k", false);
  st.exact_budget = get_or<std::size_t>(doc, "exact_budget", 1'000'000);
  st.node_limit = get_or<std::uint64_t>(doc, "node_limit", 20'000'000);
  st.check_invariants = get_or<bool>(doc, "check_invariants", true);
  if (doc.contains("injections")) {
    for (const auto& j : doc.at("injections")) st.injections.push_back(injection_from_json(j));
  }
  s.seed = get_or<std::uint64_t>(doc, "seed", 1);
  s.repeats = get_or<int>(doc, "repeats", 1);

  if (!(st.alpha >= 0.0 && st.alpha < 1.0)) throw ConfigError("alpha must be in [0, 1)");
  if (!(st.k_fraction >= 0.0 && st.k_fraction <= 1.0)) throw ConfigError("k_fraction must be in [0, 1]");
  if (st.headroom && !(*st.headroom > 0.0 && *st.headroom <= 1.0)) throw ConfigError("headroom must be in (0, 1]");
  if (st.replicas_per_app < 1) throw ConfigError("replicas_per_app must be at least 1");
  if (s.repeats < 1) throw ConfigError("repeats must be at least 1");
  if (st.detector.period <= 0 || st.detector.check_interval <= 0 || st.detector.missed_periods < 1) {
    throw ConfigError("detector timings must be positive");
  }
  if (st.horizon <= 0) throw ConfigError("horizon_ms must be positive");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc, fs::path(path).parent_path().string());
}

json scenario_to_json(const Scenario& s) {
  const SimSettings& st = s.settings;
  json inj = json::array();
  for (const auto& i : st.injections) inj.push_back(to_json(i));
  json doc = {{"schema_version", kScenarioSchemaVersion},
              {"name", s.name},
              {"policy", to_string(st.policy)},
              {"k_fraction", st.k_fraction},
              {"critical_from_cluster", st.critical_from_cluster},
              {"alpha", st.alpha},
              {"headroom", st.headroom ? json(*st.headroom) : json(nullptr)},
              {"site_independence", st.site_independence},
              {"replicas_per_app", st.replicas_per_app},
              {"network_latency_ms", st.network_latency_ms},
              {"notify_ms", to_ms(st.notify_latency)},
              {"detector",
               {{"period_ms", to_ms(st.detector.period)},
                {"check_interval_ms", to_ms(st.detector.check_interval)},
                {"check_phase_ms", to_ms(st.detector.check_phase)},
                {"missed_periods", st.detector.missed_periods}}},
              {"heartbeat_jitter_ms", to_ms(st.heartbeat_jitter)},
              {"horizon_ms", to_ms(st.horizon)},
              {"seed", s.seed},
              {"repeats", s.repeats},
              {"partial_k", st.partial_k},
              {"exact_budget", st.exact_budget},
              {"node_limit", st.node_limit},
              {"check_invariants", st.check_invariants},
              {"injections", inj}};
  if (s.catalog_path) doc["catalog"] = *s.catalog_path;
  if (s.cluster_path) {
    doc["cluster"] = *s.cluster_path;
  } else {
    doc["cluster"] = s.cluster_inline;
  }
  return doc;
}

std::string LoadedScenario::hash() const {
  // Paths are excluded so that relocating the files keeps the hash.
  json doc = scenario_to_json(scenario);
  doc.erase("catalog");
  doc.erase("cluster");
  std::uint64_t h = fnv1a(doc.dump());
  h = fnv1a(catalog->to_json().dump(), h);
  h = fnv1a(cluster_to_json(*cluster).dump(), h);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LoadedScenario load_inputs(Scenario s) {
  LoadedScenario out;
  out.catalog = std::make_shared<const Catalog>(s.catalog_path ? Catalog::load(*s.catalog_path) : reference_catalog());
  if (s.cluster_path) {
    out.cluster = std::make_shared<const ClusterState>(load_cluster(*s.cluster_path, *out.catalog));
  } else {
    out.cluster = std::make_shared<const ClusterState>(cluster_from_json(s.cluster_inline, *out.catalog));
  }
  out.scenario = std::move(s);
  return out;
}

void set_failed_sites(Scenario& s, int count) {
  if (count < 0) throw ConfigError("failed_sites must be non-negative");
  Micros when = from_ms(1000);
  std::vector<Injection> kept;
  bool seen = false;
  for (const auto& inj : s.settings.injections) {
    if (is_failure(inj)) {
      if (!seen) when = inj.time;
      seen = true;
      continue;
    }
    kept.push_back(inj);
  }
  Injection site;
  site.kind = Injection::Kind::SiteFailure;
  site.time = when;
  site.pick = "random";
  site.count = count;
  kept.insert(kept.begin(), site);
  s.settings.injections = std::move(kept);
}

}  // namespace faillite
