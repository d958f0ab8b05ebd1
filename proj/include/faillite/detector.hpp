#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "faillite/units.hpp"

namespace faillite {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DetectorConfig {
  Micros period = from_ms(20);          // heartbeat period T
  Micros check_interval = from_ms(100);
  Micros check_phase = 0;               // first check at check_phase
  Micros missed_periods = 2;            // declare after this many silent periods
};

// Push-alive failure detector. A server is declared failed at a check when
// nothing was heard from it for more than missed_periods * period. Declared
// servers stay failed until restore().
class HeartbeatDetector {
 public:
  explicit HeartbeatDetector(DetectorConfig config = {}) : config_(config) {}

  const DetectorConfig& config() const { return config_; }

  void register_server(const std::string& server, Micros now, const std::string& site = "");
  void record_heartbeat(const std::string& server, Micros now);
  // Returns servers declared failed by this check, in id order.
  std::vector<std::string> check(Micros now);
  void restore(const std::string& server, Micros now);

  bool is_failed(const std::string& server) const { return declared_.count(server) > 0; }
  const std::set<std::string>& declared_failed() const { return declared_; }
  Micros last_seen(const std::string& server) const;

  // Sites whose members are all declared failed; newly_failed_sites() reports
  // each such site once, until one of its members is restored.
  std::vector<std::string> failed_sites() const;
  std::vector<std::string> newly_failed_sites();

  // Largest possible crash-to-declaration delay.
  Micros detection_bound() const { return config_.missed_periods * config_.period + config_.check_interval; }

 private:
  DetectorConfig config_;
  std::map<std::string, Micros> last_seen_;
  std::map<std::string, std::string> site_of_;
  std::set<std::string> declared_;
  std::set<std::string> reported_sites_;
};

}  // namespace faillite
