#pragma once

#include "cnmpc/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace cnmpc {

/// Scenario files are JSON objects with the Scenario field names.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);
std::string dump_scenario(const Scenario& sc);

/// `t, agent, px, py, pz, vx, vy, vz, phi, theta, T_cmd, phi_ref, theta_ref`
void write_trajectory_csv(std::ostream& os, const SimulationLog& log);
/// `t, solve_ms, inner_iters, outer_iters, residual, infeasibility`
void write_solver_csv(std::ostream& os, const SimulationLog& log);
std::string metrics_json(const Metrics& m, const SimulationLog& log);

struct RunFiles {
  std::filesystem::path trajectory;
  std::filesystem::path solver;
  std::filesystem::path metrics;
};

/// Writes trajectory.csv, solver.csv and metrics.json into `dir`, creating
/// it if needed. Throws std::runtime_error on I/O failure.
RunFiles write_run_outputs(const std::filesystem::path& dir, const SimulationLog& log,
                           const Metrics& m);

}  // namespace cnmpc
