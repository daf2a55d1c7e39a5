#include "cnmpc/dynamics.hpp"

#include "cnmpc/layout.hpp"

#include <cmath>
#include <stdexcept>

namespace cnmpc {

void ModelParams::validate() const {
  if (!(tau_phi > 0.0) || !(tau_theta > 0.0)) {
    throw std::invalid_argument("ModelParams: time constants must be positive");
  }
  if (!(gravity > 0.0)) {
    throw std::invalid_argument("ModelParams: gravity must be positive");
  }
  if (damp_x < 0.0 || damp_y < 0.0 || damp_z < 0.0) {
    throw std::invalid_argument("ModelParams: damping must be non-negative");
  }
}

StateVector AgentState::to_vector() const {
  StateVector x;
  x << p, v, phi, theta;
  return x;
}

AgentState AgentState::from_vector(const StateVector& x) {
  AgentState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.phi = x(6);
  s.theta = x(7);
  return s;
}

Eigen::Vector3d thrust_direction(double phi, double theta) {
  const double cp = std::cos(phi);
  return {std::sin(theta) * cp, -std::sin(phi), std::cos(theta) * cp};
}

StateVector continuous_dynamics(const StateVector& x, const ControlInput& u,
                                const ModelParams& params) {
  const double phi = x(6);
  const double theta = x(7);
  const Eigen::Vector3d dir = thrust_direction(phi, theta);

  StateVector dx;
  dx.segment<3>(0) = x.segment<3>(3);
  dx(3) = u.thrust * dir.x() - params.damp_x * x(3);
  dx(4) = u.thrust * dir.y() - params.damp_y * x(4);
  dx(5) = u.thrust * dir.z() - params.gravity - params.damp_z * x(5);
  dx(6) = (params.k_phi * u.phi_ref - phi) / params.tau_phi;
  dx(7) = (params.k_theta * u.theta_ref - theta) / params.tau_theta;
  return dx;
}

StateVector continuous_dynamics(const AgentState& state, const ControlInput& u,
                                const ModelParams& params) {
  return continuous_dynamics(state.to_vector(), u, params);
}

StateVector discrete_step(const StateVector& x, const ControlInput& u, const ModelParams& params,
                          double dt) {
  return x + dt * continuous_dynamics(x, u, params);
}

AgentState discrete_step(const AgentState& state, const ControlInput& u,
                         const ModelParams& params, double dt) {
  return AgentState::from_vector(discrete_step(state.to_vector(), u, params, dt));
}

std::vector<FleetState> rollout(const FleetState& initial, const Eigen::VectorXd& z,
                                const ModelParams& params, std::size_t horizon, double dt) {
  const HorizonLayout layout{initial.size(), horizon};
  layout.check(z);

  std::vector<FleetState> traj(horizon + 1, FleetState(initial.size()));
  traj[0] = initial;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    StateVector x = initial[i].to_vector();
    for (std::size_t j = 0; j < horizon; ++j) {
      x = discrete_step(x, layout.input(z, i, j), params, dt);
      traj[j + 1][i] = AgentState::from_vector(x);
    }
  }
  return traj;
}

}  // namespace cnmpc
