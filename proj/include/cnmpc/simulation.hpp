#pragma once

#include "cnmpc/controller.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cnmpc {

/// Standard deviations of the additive state noise.
struct NoiseParams {
  double sigma_position = 0.01;
  double sigma_velocity = 0.005;
  double sigma_attitude = 0.001;
  bool enabled = true;

  void validate() const;
};

using Rng = std::mt19937_64;

/// Adds zero-mean Gaussian noise. Draw order: px, py, pz, vx, vy, vz, phi,
/// theta. Nothing is drawn when noise is disabled.
AgentState apply_noise(const AgentState& state, const NoiseParams& noise, Rng& rng);

struct TimedSetpoint {
  double time = 0.0;
  AgentState setpoint;
};

/// Scenario-level changes to the controller configuration.
struct ControllerOverrides {
  std::optional<std::size_t> penalty_iterations;
};

struct Scenario {
  std::string name;
  FleetState agents;
  /// Per agent, setpoints ordered by time; the latest one with time <= t is active.
  std::vector<std::vector<TimedSetpoint>> reference_schedule;
  std::vector<CylinderObstacle> obstacles;
  double duration = 10.0;
  NoiseParams noise;
  ControllerOverrides controller_overrides;

  void validate() const;
  std::vector<AgentState> references_at(double t) const;
  /// Configuration with the scenario overrides applied.
  ControllerConfig configure(ControllerConfig cfg) const;
};

struct SolverRecord {
  double t = 0.0;
  double solve_ms = 0.0;
  std::size_t inner_iterations = 0;
  std::size_t outer_iterations = 0;
  double residual = 0.0;
  double infeasibility = 0.0;
  SolverStatus status = SolverStatus::converged;
};

struct StateRecord {
  double t = 0.0;
  FleetState fleet;
  /// Inputs applied from this state; the final record repeats the last ones.
  std::vector<ControlInput> inputs;
};

struct SimulationLog {
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 0.05;
  std::vector<StateRecord> records;  // steps + 1 entries
  std::vector<SolverRecord> solver;  // one per control step
  std::size_t aborted_steps = 0;
};

/// Closed loop: active references -> solve -> plant step -> noise -> record.
/// On a solver abort the previous input is held for that step.
SimulationLog run_scenario(const Scenario& sc, const ControllerConfig& cfg, std::uint64_t seed);

struct Metrics {
  double min_pairwise_distance = 0.0;
  double max_safety_violation = 0.0;
  double max_obstacle_penetration = 0.0;
  double solve_ms_mean = 0.0;
  double solve_ms_max = 0.0;
  double solve_ms_min = 0.0;
  std::vector<double> final_tracking_error;
  std::size_t aborted_steps = 0;
};

/// Cold-start solves excluded from reported timing by the CLI and benchmark.
inline constexpr std::size_t kTimingWarmupSteps = 1;

/// Safety and obstacle metrics over the realized states. Solver-time
/// statistics skip the first `warmup_steps` control steps (all steps are
/// used when the log is not longer than that).
Metrics compute_metrics(const SimulationLog& log, const Scenario& sc, const ControllerConfig& cfg,
                        std::size_t warmup_steps = 0);

/// Built-in scenarios: four_agent_cylinder, scaling_2 .. scaling_9,
/// head_on_four, obstacle_course_six.
std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> find_builtin_scenario(const std::string& name);
Scenario four_agent_cylinder();
Scenario scaling_scenario(std::size_t agents);
Scenario head_on_four();
Scenario obstacle_course_six();

}  // namespace cnmpc
