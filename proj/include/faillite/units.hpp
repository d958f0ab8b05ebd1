#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace faillite {

// Virtual time, integer microseconds.
using Micros = std::int64_t;

constexpr Micros from_ms(double ms) { return static_cast<Micros>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5)); }
constexpr double to_ms(Micros us) { return static_cast<double>(us) / 1000.0; }

constexpr double kCapacityEps = 1e-9;

// Accelerator demand or capacity. Memory in MiB, compute as a fraction of one
// accelerator.
struct Resources {
  double mem_mib = 0.0;
  double compute = 0.0;

  Resources& operator+=(const Resources& o) {
    mem_mib += o.mem_mib;
    compute += o.compute;
    return *this;
  }
  Resources& operator-=(const Resources& o) {
    mem_mib -= o.mem_mib;
    compute -= o.compute;
    return *this;
  }
  friend Resources operator+(Resources a, const Resources& b) { return a += b; }
  friend Resources operator-(Resources a, const Resources& b) { return a -= b; }
  friend Resources operator*(Resources a, double s) { return {a.mem_mib * s, a.compute * s}; }
  friend bool operator==(const Resources&, const Resources&) = default;

  // True when `demand` fits inside *this (both dimensions).
  bool fits(const Resources& demand) const {
    return demand.mem_mib <= mem_mib + kCapacityEps && demand.compute <= compute + kCapacityEps;
  }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace faillite
