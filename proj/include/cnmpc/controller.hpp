#pragma once

#include "cnmpc/optimizer.hpp"
#include "cnmpc/problem.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <vector>

namespace cnmpc {

struct ControllerConfig {
  std::size_t horizon = 30;
  double dt = 0.05;
  CostWeights weights;
  ControlInput input_min{5.0, -0.4, -0.4};
  ControlInput input_max{13.5, 0.4, 0.4};
  CollisionParams collision;
  RateLimits rates;
  PenaltyConfig penalty;
  InnerSolverConfig inner;
  ModelParams params;
  /// When false every step starts from stacked hover inputs.
  bool warm_start = true;

  void validate() const;
  BoxSet box(std::size_t agents) const;
};

struct ControlStepResult {
  std::vector<ControlInput> first_inputs;
  /// predicted_trajectories[agent][step], steps 0..N.
  std::vector<std::vector<AgentState>> predicted_trajectories;
  SolveResult solve;
};

/// Builds the problem for the current fleet state and previous inputs.
ProblemInstance make_instance(const FleetState& fleet, const std::vector<ControlInput>& prev_inputs,
                              const std::vector<AgentState>& references,
                              const std::vector<CylinderObstacle>& obstacles,
                              const ControllerConfig& cfg);

/// One receding-horizon solve. Without a warm start the solver starts
/// from hover inputs for every agent and step.
ControlStepResult nmpc_step(const FleetState& fleet, const std::vector<ControlInput>& prev_inputs,
                            const std::vector<AgentState>& references,
                            const std::vector<CylinderObstacle>& obstacles,
                            const ControllerConfig& cfg,
                            const std::optional<Eigen::VectorXd>& warm = std::nullopt);

/// Drops each agent's first input and repeats its last one.
Eigen::VectorXd warm_start_shift(const Eigen::VectorXd& previous, const ControllerConfig& cfg,
                                 std::size_t agents);

/// Stateful wrapper that carries the shifted solution between steps.
/// Not safe for concurrent use; use one instance per run.
class Controller {
 public:
  Controller(ControllerConfig cfg, std::size_t agents);

  ControlStepResult step(const FleetState& fleet, const std::vector<ControlInput>& prev_inputs,
                         const std::vector<AgentState>& references,
                         const std::vector<CylinderObstacle>& obstacles);

  void reset() { warm_.reset(); }
  const ControllerConfig& config() const { return cfg_; }

 private:
  ControllerConfig cfg_;
  std::size_t agents_;
  BoxSet box_;
  PanocSolver inner_;
  std::optional<Eigen::VectorXd> warm_;
};

}  // namespace cnmpc
