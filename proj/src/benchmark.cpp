#include "cnmpc/benchmark.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cnmpc {

BenchRow run_benchmark_row(std::size_t agents, std::size_t trials, std::uint64_t seed,
                           const ControllerConfig& cfg) {
  if (trials == 0) {
    throw std::invalid_argument("benchmark needs at least one trial");
  }
  const Scenario sc = scaling_scenario(agents);
  BenchRow row;
  row.agents = agents;
  row.min_ms = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const SimulationLog log = run_scenario(sc, cfg, seed + t);
    const Metrics m = compute_metrics(log, sc, sc.configure(cfg), kTimingWarmupSteps);
    row.mean_ms += m.solve_ms_mean / static_cast<double>(trials);
    row.max_ms = std::max(row.max_ms, m.solve_ms_max);
    row.min_ms = std::min(row.min_ms, m.solve_ms_min);
    row.max_safety_violation = std::max(row.max_safety_violation, m.max_safety_violation);
    row.max_obstacle_violation = std::max(row.max_obstacle_violation, m.max_obstacle_penetration);
  }
  return row;
}

std::vector<BenchRow> run_benchmark(std::size_t agents_min, std::size_t agents_max,
                                    std::size_t trials, std::uint64_t seed,
                                    const ControllerConfig& cfg) {
  if (agents_min < 2 || agents_max < agents_min) {
    throw std::invalid_argument("benchmark agent range must satisfy 2 <= min <= max");
  }
  std::vector<BenchRow> rows;
  for (std::size_t n = agents_min; n <= agents_max; ++n) {
    rows.push_back(run_benchmark_row(n, trials, seed, cfg));
  }
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "n_agents,mean_ms,max_ms,min_ms,max_safety_violation_m,max_obstacle_violation_m\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.4f,%.4f,%.4f,%.5f,%.5f\n", r.agents, r.mean_ms,
                  r.max_ms, r.min_ms, r.max_safety_violation, r.max_obstacle_violation);
    os << buf;
  }
}

}  // namespace cnmpc
