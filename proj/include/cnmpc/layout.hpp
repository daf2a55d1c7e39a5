#pragma once

#include "cnmpc/dynamics.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cnmpc {

/// Index map of the decision vector: agent-major, then prediction step,
/// then input component [T, phi_ref, theta_ref].
struct HorizonLayout {
  std::size_t agents = 0;
  std::size_t horizon = 0;

  std::size_t size() const { return kInputDim * horizon * agents; }

  std::size_t offset(std::size_t agent, std::size_t step) const {
    return kInputDim * (agent * horizon + step);
  }

  ControlInput input(const Eigen::VectorXd& z, std::size_t agent, std::size_t step) const {
    const std::size_t k = offset(agent, step);
    return {z(k), z(k + 1), z(k + 2)};
  }

  void set_input(Eigen::VectorXd& z, std::size_t agent, std::size_t step,
                 const ControlInput& u) const {
    const std::size_t k = offset(agent, step);
    z(k) = u.thrust;
    z(k + 1) = u.phi_ref;
    z(k + 2) = u.theta_ref;
  }

  void check(const Eigen::VectorXd& z) const {
    if (agents == 0 || horizon == 0) {
      throw std::invalid_argument("decision vector layout needs at least one agent and step");
    }
    if (static_cast<std::size_t>(z.size()) != size()) {
      throw std::invalid_argument("decision vector has length " + std::to_string(z.size()) +
                                  ", expected " + std::to_string(size()));
    }
  }

  /// Every agent holds `u` at every step.
  Eigen::VectorXd constant(const ControlInput& u) const {
    Eigen::VectorXd z(size());
    for (std::size_t i = 0; i < agents; ++i) {
      for (std::size_t j = 0; j < horizon; ++j) {
        set_input(z, i, j, u);
      }
    }
    return z;
  }
};

}  // namespace cnmpc
