#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faillite/metrics.hpp"
#include "faillite/progressive.hpp"
#include "faillite/scenario.hpp"
#include "faillite/simengine.hpp"

namespace faillite {

// One run of the loaded scenario with the given seed.
RunResult run_once(const LoadedScenario& in, std::uint64_t seed);

// `repeats` runs with seeds seed, seed + 1, ...
std::vector<RunResult> run_repeats(const LoadedScenario& in);

enum class SweepAxis { Headroom, KFraction, Alpha, Policy, FailedSites };

SweepAxis parse_axis(const std::string& name);
std::string to_string(SweepAxis a);

struct SweepRow {
  std::string value;
  MetricsSummary summary;
  std::vector<RunMetrics> runs;
};

// One row per (value, policy). For the policy axis the values are policy
// names and `policies` is ignored.
std::vector<SweepRow> sweep(const LoadedScenario& base, SweepAxis axis, const std::vector<std::string>& values,
                            const std::vector<PolicyKind>& policies);

// Synthetic failover instance: `apps` affected apps with `variants` variants
// each and `servers` candidate servers, sized so the demand ratio is near 0.5.
FailoverRequest synthetic_failover(std::size_t apps, std::size_t servers, std::size_t variants, std::uint64_t seed);

struct BenchPoint {
  std::size_t apps = 0;
  std::size_t servers = 0;
  std::size_t variants = 0;
  double seconds = 0.0;
  std::size_t recovered = 0;
};

BenchPoint bench_heuristic(std::size_t apps, std::size_t servers, std::size_t variants, std::uint64_t seed);

// Cross-checks a loaded scenario without running it. Returns one message per
// problem; empty means valid.
std::vector<std::string> validate_scenario(const LoadedScenario& in);

}  // namespace faillite
