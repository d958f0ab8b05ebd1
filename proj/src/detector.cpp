#include "faillite/detector.hpp"

namespace faillite {

void HeartbeatDetector::register_server(const std::string& server, Micros now, const std::string& site) {
  last_seen_[server] = now;
  site_of_[server] = site;
}

void HeartbeatDetector::record_heartbeat(const std::string& server, Micros now) {
  auto it = last_seen_.find(server);
  if (it == last_seen_.end()) throw ProtocolError("heartbeat from unknown server '" + server + "'");
  it->second = now;
}

std::vector<std::string> HeartbeatDetector::check(Micros now) {
  std::vector<std::string> out;
  const Micros limit = config_.missed_periods * config_.period;
  for (const auto& [server, seen] : last_seen_) {
    if (declared_.count(server)) continue;
    if (now - seen > limit) {
      declared_.insert(server);
      out.push_back(server);
    }
  }
  return out;
}

void HeartbeatDetector::restore(const std::string& server, Micros now) {
  auto it = last_seen_.find(server);
  if (it == last_seen_.end()) throw ProtocolError("restore of unknown server '" + server + "'");
  it->second = now;
  declared_.erase(server);
  reported_sites_.erase(site_of_[server]);
}

Micros HeartbeatDetector::last_seen(const std::string& server) const {
  auto it = last_seen_.find(server);
  if (it == last_seen_.end()) throw ProtocolError("unknown server '" + server + "'");
  return it->second;
}

std::vector<std::string> HeartbeatDetector::failed_sites() const {
  std::map<std::string, bool> all_failed;
  for (const auto& [server, site] : site_of_) {
    if (site.empty()) continue;
    auto [it, _] = all_failed.emplace(site, true);
    it->second = it->second && declared_.count(server) > 0;
  }
  std::vector<std::string> out;
  for (const auto& [site, failed] : all_failed) {
    if (failed) out.push_back(site);
  }
  return out;
}

std::vector<std::string> HeartbeatDetector::newly_failed_sites() {
  std::vector<std::string> out;
  for (const auto& site : failed_sites()) {
    if (reported_sites_.insert(site).second) out.push_back(site);
  }
  return out;
}

}  // namespace faillite
