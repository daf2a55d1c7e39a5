#include "cnmpc/optimizer.hpp"

#include <chrono>
#include <stdexcept>

namespace cnmpc {

void PenaltyConfig::validate() const {
  if (!(initial_weight > 0.0)) {
    throw std::invalid_argument("PenaltyConfig: initial weight must be positive");
  }
  if (!(update_factor > 1.0)) {
    throw std::invalid_argument("PenaltyConfig: update factor must exceed 1");
  }
  if (outer_iterations == 0) {
    throw std::invalid_argument("PenaltyConfig: at least one outer iteration is required");
  }
  if (infeasibility_tolerance < 0.0) {
    throw std::invalid_argument("PenaltyConfig: infeasibility tolerance must be non-negative");
  }
}

SolveResult penalty_solve(PenalizedProblem& problem, const Eigen::VectorXd& z0,
                          const BoxSet& box, const PenaltyConfig& pcfg, PanocSolver& inner) {
  pcfg.validate();
  const auto start = std::chrono::steady_clock::now();

  SolveResult out;
  out.solution = project_box(z0, box);
  const double stop_below =
      pcfg.mode == PenaltyMode::tolerance_driven ? pcfg.infeasibility_tolerance : 0.0;

  double weight = pcfg.initial_weight;
  for (std::size_t round = 0; round < pcfg.outer_iterations; ++round) {
    const SmoothObjective objective = [&problem, weight](const Eigen::VectorXd& z,
                                                         Eigen::VectorXd* grad) {
      return problem.value(z, weight, grad);
    };
    InnerResult r = inner.solve(objective, box, out.solution);
    out.outer_iterations = round + 1;
    out.inner_iterations_total += r.iterations;
    out.fixed_point_residual = r.residual;
    out.status = r.status;
    if (r.status == SolverStatus::not_finite) {
      break;
    }
    out.solution = std::move(r.solution);
    out.max_infeasibility = problem.infeasibility(out.solution);
    if (out.max_infeasibility <= stop_below) {
      break;
    }
    weight *= pcfg.update_factor;
  }
  if (out.status != SolverStatus::not_finite) {
    out.max_infeasibility = problem.infeasibility(out.solution);
    if (pcfg.mode == PenaltyMode::tolerance_driven &&
        out.max_infeasibility > pcfg.infeasibility_tolerance) {
      out.status = SolverStatus::iteration_capped;
    }
  }
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SolveResult penalty_solve(const ProblemInstance& inst, const Eigen::VectorXd& z0,
                          const BoxSet& box, const PenaltyConfig& pcfg,
                          const InnerSolverConfig& icfg) {
  inst.layout().check(z0);
  NmpcPenalizedProblem problem(inst);
  PanocSolver inner(icfg);
  return penalty_solve(problem, z0, box, pcfg, inner);
}

}  // namespace cnmpc
