#pragma once

#include "cnmpc/simulation.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace cnmpc {

/// One row of the scaling table, aggregated over trials.
struct BenchRow {
  std::size_t agents = 0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
  double min_ms = 0.0;
  double max_safety_violation = 0.0;
  double max_obstacle_violation = 0.0;
};

/// Runs scaling_scenario(n) `trials` times with seeds seed, seed + 1, ...
BenchRow run_benchmark_row(std::size_t agents, std::size_t trials, std::uint64_t seed,
                           const ControllerConfig& cfg);

std::vector<BenchRow> run_benchmark(std::size_t agents_min, std::size_t agents_max,
                                    std::size_t trials, std::uint64_t seed,
                                    const ControllerConfig& cfg);

/// `n_agents, mean_ms, max_ms, min_ms, max_safety_violation_m, max_obstacle_violation_m`
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

}  // namespace cnmpc
