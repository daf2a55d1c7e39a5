#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace cnmpc {

/// Parameters of the attitude-loop MAV model. Defaults follow the
/// simulation setup (tau = 0.5 s, K = 1, g = 9.82 m/s^2); damping is a
/// small assumed value.
struct ModelParams {
  double tau_phi = 0.5;
  double tau_theta = 0.5;
  double k_phi = 1.0;
  double k_theta = 1.0;
  double damp_x = 0.1;
  double damp_y = 0.1;
  double damp_z = 0.1;
  double gravity = 9.82;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

constexpr std::size_t kStateDim = 8;
constexpr std::size_t kInputDim = 3;

/// Flat state [px, py, pz, vx, vy, vz, phi, theta].
using StateVector = Eigen::Matrix<double, kStateDim, 1>;

struct AgentState {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  double phi = 0.0;
  double theta = 0.0;

  StateVector to_vector() const;
  static AgentState from_vector(const StateVector& x);

  bool operator==(const AgentState&) const = default;
};

/// Mass-normalized thrust and attitude references.
struct ControlInput {
  double thrust = 0.0;
  double phi_ref = 0.0;
  double theta_ref = 0.0;

  static ControlInput hover(const ModelParams& params) { return {params.gravity, 0.0, 0.0}; }

  bool operator==(const ControlInput&) const = default;
};

using FleetState = std::vector<AgentState>;

/// Time derivative of the state, laid out like StateVector.
StateVector continuous_dynamics(const StateVector& x, const ControlInput& u,
                                const ModelParams& params);
StateVector continuous_dynamics(const AgentState& state, const ControlInput& u,
                                const ModelParams& params);

/// One forward-Euler step of length dt.
StateVector discrete_step(const StateVector& x, const ControlInput& u, const ModelParams& params,
                          double dt);
AgentState discrete_step(const AgentState& state, const ControlInput& u,
                         const ModelParams& params, double dt);

/// Thrust direction, i.e. the third column of R(phi, theta) with zero yaw.
Eigen::Vector3d thrust_direction(double phi, double theta);

/// Simulates every agent over the horizon with the stacked inputs `z`
/// (agent-major, then step, then [T, phi_ref, theta_ref]). Element 0 of
/// the result is `initial`.
std::vector<FleetState> rollout(const FleetState& initial, const Eigen::VectorXd& z,
                                const ModelParams& params, std::size_t horizon, double dt);

}  // namespace cnmpc
