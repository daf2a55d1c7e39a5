#include "cnmpc/controller.hpp"

#include <stdexcept>

namespace cnmpc {
namespace {

ControlStepResult extract(const CostEvaluator& eval, SolveResult solve) {
  const ProblemInstance& inst = eval.instance();
  const HorizonLayout layout = inst.layout();
  ControlStepResult out;
  out.first_inputs.reserve(layout.agents);
  for (std::size_t i = 0; i < layout.agents; ++i) {
    out.first_inputs.push_back(layout.input(solve.solution, i, 0));
  }
  const auto traj = rollout(inst.initial, solve.solution, inst.params, inst.horizon, inst.dt);
  out.predicted_trajectories.assign(layout.agents, std::vector<AgentState>(traj.size()));
  for (std::size_t j = 0; j < traj.size(); ++j) {
    for (std::size_t i = 0; i < layout.agents; ++i) {
      out.predicted_trajectories[i][j] = traj[j][i];
    }
  }
  out.solve = std::move(solve);
  return out;
}

}  // namespace

void ControllerConfig::validate() const {
  if (horizon == 0) {
    throw std::invalid_argument("ControllerConfig: horizon must be at least 1");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("ControllerConfig: dt must be positive");
  }
  weights.validate();
  collision.validate();
  rates.validate();
  penalty.validate();
  inner.validate();
  params.validate();
}

BoxSet ControllerConfig::box(std::size_t agents) const {
  return BoxSet::replicated(input_min, input_max, agents * horizon);
}

ProblemInstance make_instance(const FleetState& fleet, const std::vector<ControlInput>& prev_inputs,
                              const std::vector<AgentState>& references,
                              const std::vector<CylinderObstacle>& obstacles,
                              const ControllerConfig& cfg) {
  ProblemInstance inst;
  inst.initial = fleet;
  inst.prev_input = prev_inputs;
  inst.references = references;
  inst.input_ref = ControlInput::hover(cfg.params);
  inst.obstacles = obstacles;
  inst.weights = cfg.weights;
  inst.collision = cfg.collision;
  inst.rates = cfg.rates;
  inst.horizon = cfg.horizon;
  inst.dt = cfg.dt;
  inst.params = cfg.params;
  inst.validate();
  return inst;
}

ControlStepResult nmpc_step(const FleetState& fleet, const std::vector<ControlInput>& prev_inputs,
                            const std::vector<AgentState>& references,
                            const std::vector<CylinderObstacle>& obstacles,
                            const ControllerConfig& cfg,
                            const std::optional<Eigen::VectorXd>& warm) {
  cfg.validate();
  const ProblemInstance inst = make_instance(fleet, prev_inputs, references, obstacles, cfg);
  const HorizonLayout layout = inst.layout();
  const Eigen::VectorXd z0 = warm ? *warm : layout.constant(ControlInput::hover(cfg.params));
  layout.check(z0);

  NmpcPenalizedProblem problem(inst);
  PanocSolver inner(cfg.inner);
  SolveResult solve = penalty_solve(problem, z0, cfg.box(layout.agents), cfg.penalty, inner);
  return extract(problem.evaluator(), std::move(solve));
}

Eigen::VectorXd warm_start_shift(const Eigen::VectorXd& previous, const ControllerConfig& cfg,
                                 std::size_t agents) {
  const HorizonLayout layout{agents, cfg.horizon};
  layout.check(previous);
  Eigen::VectorXd out(previous.size());
  for (std::size_t i = 0; i < agents; ++i) {
    for (std::size_t j = 0; j < cfg.horizon; ++j) {
      const std::size_t src = j + 1 < cfg.horizon ? j + 1 : cfg.horizon - 1;
      layout.set_input(out, i, j, layout.input(previous, i, src));
    }
  }
  return out;
}

Controller::Controller(ControllerConfig cfg, std::size_t agents)
    : cfg_(std::move(cfg)), agents_(agents), box_(cfg_.box(agents)), inner_(cfg_.inner) {
  cfg_.validate();
  if (agents_ == 0) {
    throw std::invalid_argument("Controller: at least one agent is required");
  }
}

ControlStepResult Controller::step(const FleetState& fleet,
                                   const std::vector<ControlInput>& prev_inputs,
                                   const std::vector<AgentState>& references,
                                   const std::vector<CylinderObstacle>& obstacles) {
  if (fleet.size() != agents_) {
    throw std::invalid_argument("Controller: fleet size changed during the run");
  }
  const ProblemInstance inst = make_instance(fleet, prev_inputs, references, obstacles, cfg_);
  const HorizonLayout layout = inst.layout();
  const Eigen::VectorXd z0 = (cfg_.warm_start && warm_)
                                 ? warm_start_shift(*warm_, cfg_, agents_)
                                 : layout.constant(ControlInput::hover(cfg_.params));

  NmpcPenalizedProblem problem(inst);
  SolveResult solve = penalty_solve(problem, z0, box_, cfg_.penalty, inner_);
  if (solve.status != SolverStatus::not_finite) {
    warm_ = solve.solution;
  }
  return extract(problem.evaluator(), std::move(solve));
}

}  // namespace cnmpc
