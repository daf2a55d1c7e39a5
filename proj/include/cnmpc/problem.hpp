#pragma once

#include "cnmpc/dynamics.hpp"
#include "cnmpc/layout.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace cnmpc {

/// Diagonal weights of the joint tracking cost.
struct CostWeights {
  std::array<double, kStateDim> state{5, 5, 20, 3, 3, 3, 8, 8};
  std::array<double, kInputDim> input{5, 10, 10};
  std::array<double, kInputDim> input_rate{10, 25, 25};

  void validate() const;
};

/// Vertical cylinder given by its center point, radius and total height.
struct CylinderObstacle {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
  double height = 1.0;

  void validate() const;
  bool operator==(const CylinderObstacle&) const = default;
};

struct CollisionParams {
  double safety_radius = 0.4;
  /// Half-height of the exclusion band around each agent.
  double vertical_margin = 1.0;

  void validate() const;
};

struct RateLimits {
  double max_delta_phi = 0.07;
  double max_delta_theta = 0.07;

  void validate() const;
};

/// Parameters of one receding-horizon solve.
struct ProblemInstance {
  FleetState initial;
  std::vector<ControlInput> prev_input;
  std::vector<AgentState> references;
  ControlInput input_ref{9.82, 0.0, 0.0};
  std::vector<CylinderObstacle> obstacles;
  CostWeights weights;
  CollisionParams collision;
  RateLimits rates;
  std::size_t horizon = 30;
  double dt = 0.05;
  ModelParams params;

  std::size_t agent_count() const { return initial.size(); }
  HorizonLayout layout() const { return {initial.size(), horizon}; }

  /// Throws std::invalid_argument on inconsistent sizes or parameters.
  void validate() const;
};

/// Zero outside the closed cylinder, positive strictly inside.
double cylinder_violation(const Eigen::Vector3d& p, const CylinderObstacle& obs);

/// Zero when the horizontal separation reaches the safety radius or the
/// vertical separation reaches the margin. Symmetric in its positions.
double collision_violation(const Eigen::Vector3d& p_i, const Eigen::Vector3d& p_l,
                           const CollisionParams& cp);

/// Hinge residuals of the roll/pitch reference rate limits. For every
/// agent and step the order is: phi decrease, phi increase, theta
/// decrease, theta increase. Step 0 is measured against `prev_input`.
Eigen::VectorXd rate_violations(const Eigen::VectorXd& z,
                                const std::vector<ControlInput>& prev_input,
                                const RateLimits& limits);

/// Number of entries of the constraint map F.
std::size_t constraint_count(std::size_t agents, std::size_t horizon, std::size_t obstacles);

/// Stacked equality-constraint map F(z), zero iff the predicted
/// trajectories are feasible. Ordering:
///   1. cylinders, index ((agent * N + step - 1) * N_o + obstacle), steps 1..N
///   2. collisions, index (pair * N + step - 1) over pairs i < l in
///      lexicographic order, steps 1..N
///   3. rate_violations(z, ...)
Eigen::VectorXd assemble_constraints(const Eigen::VectorXd& z, const ProblemInstance& inst);

double total_cost(const Eigen::VectorXd& z, const ProblemInstance& inst);
Eigen::VectorXd cost_gradient(const Eigen::VectorXd& z, const ProblemInstance& inst);

/// total_cost(z) + c * |F(z)|^2 together with its gradient.
std::pair<double, Eigen::VectorXd> penalized_cost_and_gradient(const Eigen::VectorXd& z,
                                                               const ProblemInstance& inst,
                                                               double c);

/// Reusable evaluator for one problem instance. Holds the rollout and
/// adjoint buffers so repeated evaluations do not allocate.
///
/// The gradient is obtained by a reverse sweep through the Euler
/// recursion: with lambda_j the sensitivity of the objective to x_j,
///   lambda_N = d_xN,  lambda_j = d_xj + (I + dt f_x)^T lambda_{j+1},
///   dPhi/du_j = dt f_u^T lambda_{j+1} + direct input terms.
class CostEvaluator {
 public:
  explicit CostEvaluator(const ProblemInstance& inst);

  const ProblemInstance& instance() const { return inst_; }
  std::size_t dimension() const { return layout_.size(); }

  /// Penalized objective; writes the gradient when `grad` is non-null.
  double evaluate(const Eigen::VectorXd& z, double penalty, Eigen::VectorXd* grad);

  /// F(z) into `out` (resized as needed).
  void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& out);

  /// |F(z)|_inf without materializing F.
  double max_violation(const Eigen::VectorXd& z);

  /// States of the last evaluated rollout, indexed [step][agent].
  const std::vector<StateVector>& trajectory() const { return traj_; }
  const StateVector& state(std::size_t step, std::size_t agent) const {
    return traj_[step * inst_.agent_count() + agent];
  }

 private:
  void simulate(const Eigen::VectorXd& z);

  ProblemInstance inst_;
  HorizonLayout layout_;
  std::vector<StateVector> traj_;
  std::vector<StateVector> direct_;
  std::vector<StateVector> xref_;
};

}  // namespace cnmpc
