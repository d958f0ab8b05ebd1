#include "faillite/detector.hpp"

#include <gtest/gtest.h>

namespace faillite {
namespace {

// Drives one server: heartbeats every period strictly before `crash`, checks
// at phase + n * interval. Returns the declaration time.
Micros declared_at(const DetectorConfig& cfg, Micros crash) {
  HeartbeatDetector d(cfg);
  d.register_server("s", 0);
  Micros next_hb = cfg.period;
  for (Micros t = cfg.check_phase; t < crash + 10 * cfg.check_interval; t += cfg.check_interval) {
    for (; next_hb <= t && next_hb < crash; next_hb += cfg.period) d.record_heartbeat("s", next_hb);
    if (!d.check(t).empty()) return t;
  }
  return -1;
}

TEST(Detector, RecordsHeartbeat) {
  HeartbeatDetector d;
  d.register_server("s", 0);
  d.record_heartbeat("s", from_ms(40));
  EXPECT_EQ(d.last_seen("s"), from_ms(40));
}

TEST(Detector, UnknownServerIsProtocolError) {
  HeartbeatDetector d;
  EXPECT_THROW(d.record_heartbeat("ghost", 0), ProtocolError);
  EXPECT_THROW(d.restore("ghost", 0), ProtocolError);
  EXPECT_THROW(d.last_seen("ghost"), ProtocolError);
}

TEST(Detector, HealthyServerNeverDeclared) {
  HeartbeatDetector d;
  d.register_server("s", 0);
  for (Micros t = from_ms(20); t <= from_ms(10'000); t += from_ms(20)) {
    d.record_heartbeat("s", t);
    if (t % from_ms(100) == 0) EXPECT_TRUE(d.check(t).empty());
  }
}

TEST(Detector, CrashAt45DeclaredAt100) {
  const DetectorConfig cfg;
  EXPECT_EQ(declared_at(cfg, from_ms(45)), from_ms(100));
}

TEST(Detector, DeclaresOnceUntilRestore) {
  HeartbeatDetector d;
  d.register_server("s", 0);
  EXPECT_EQ(d.check(from_ms(100)), std::vector<std::string>{"s"});
  EXPECT_TRUE(d.check(from_ms(200)).empty());
  d.record_heartbeat("s", from_ms(210));
  EXPECT_TRUE(d.is_failed("s"));
  d.restore("s", from_ms(220));
  EXPECT_FALSE(d.is_failed("s"));
  EXPECT_TRUE(d.check(from_ms(250)).empty());
}

TEST(Detector, BoundAtDefaults) { EXPECT_EQ(HeartbeatDetector().detection_bound(), from_ms(140)); }

TEST(Detector, LatencyBoundedOverPhases) {
  for (Micros phase : {Micros{0}, from_ms(10), from_ms(37), from_ms(99)}) {
    DetectorConfig cfg;
    cfg.check_phase = phase;
    for (Micros crash = from_ms(200); crash < from_ms(400); crash += 1000) {
      const Micros at = declared_at(cfg, crash);
      ASSERT_GE(at, crash);
      EXPECT_LE(at - crash, cfg.missed_periods * cfg.period + cfg.check_interval) << "phase " << phase << " crash " << crash;
    }
  }
}

TEST(Detector, SiteFailsWhenAllMembersDeclared) {
  HeartbeatDetector d;
  d.register_server("a1", 0, "A");
  d.register_server("a2", 0, "A");
  d.register_server("b1", 0, "B");
  d.record_heartbeat("a2", from_ms(80));
  d.record_heartbeat("b1", from_ms(80));
  EXPECT_EQ(d.check(from_ms(100)), std::vector<std::string>{"a1"});
  EXPECT_TRUE(d.failed_sites().empty());
  EXPECT_TRUE(d.newly_failed_sites().empty());
  d.record_heartbeat("b1", from_ms(180));
  EXPECT_EQ(d.check(from_ms(200)), std::vector<std::string>{"a2"});
  EXPECT_EQ(d.failed_sites(), std::vector<std::string>{"A"});
  EXPECT_EQ(d.newly_failed_sites(), std::vector<std::string>{"A"});
  EXPECT_TRUE(d.newly_failed_sites().empty());
  d.restore("a1", from_ms(300));
  EXPECT_TRUE(d.failed_sites().empty());
}

}  // namespace
}  // namespace faillite
