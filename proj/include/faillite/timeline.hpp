#pragma once

#include <optional>
#include <string>

#include "faillite/units.hpp"

namespace faillite {

enum class BackupKind { None, Warm, Cold };

std::string to_string(BackupKind k);

// One failure of one application, from crash to client notification.
struct FailoverTimeline {
  std::string app_id;
  std::size_t app = 0;
  bool critical = false;
  Micros failure_time = 0;
  std::optional<Micros> detection_time;
  std::optional<Micros> recovery_time;  // first serving replica live and client notified
  std::optional<Micros> upgrade_time;   // last background upgrade finished
  std::optional<Micros> switch_back_time;
  BackupKind backup = BackupKind::None;
  std::size_t primary_variant = 0;
  std::optional<std::size_t> final_variant;
  double acc_primary = 1.0;  // normalized
  double acc_backup = 0.0;   // normalized, final variant; 0 when unrecovered

  bool recovered() const { return recovery_time.has_value(); }
  std::optional<double> mttr_ms() const {
    if (!recovery_time) return std::nullopt;
    return to_ms(*recovery_time - failure_time);
  }
};

}  // namespace faillite
