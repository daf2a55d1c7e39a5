#pragma once

#include "cnmpc/problem.hpp"

#include <random>

namespace cnmpc::testing {

/// Random instance with agents packed around one obstacle so that
/// cylinder, collision and rate terms are all likely to be active.
inline ProblemInstance random_instance(std::mt19937_64& rng, std::size_t agents,
                                       std::size_t horizon, std::size_t obstacles) {
  std::uniform_real_distribution<double> pos(-0.6, 0.6);
  std::uniform_real_distribution<double> small(-0.2, 0.2);
  std::uniform_real_distribution<double> ref(-2.0, 2.0);

  ProblemInstance inst;
  inst.horizon = horizon;
  for (std::size_t i = 0; i < agents; ++i) {
    AgentState s;
    s.p = {pos(rng), pos(rng), 1.0 + small(rng)};
    s.v = {small(rng), small(rng), small(rng)};
    s.phi = small(rng);
    s.theta = small(rng);
    inst.initial.push_back(s);

    AgentState r;
    r.p = {ref(rng), ref(rng), 1.5};
    inst.references.push_back(r);
    inst.prev_input.push_back({9.82 + small(rng), small(rng), small(rng)});
  }
  for (std::size_t o = 0; o < obstacles; ++o) {
    inst.obstacles.push_back({{pos(rng), pos(rng), 0.5}, 0.8, 4.0});
  }
  return inst;
}

/// Random decision vector inside the default input box.
inline Eigen::VectorXd random_inputs(std::mt19937_64& rng, const HorizonLayout& layout) {
  std::uniform_real_distribution<double> thrust(5.0, 13.5);
  std::uniform_real_distribution<double> angle(-0.4, 0.4);
  Eigen::VectorXd z(layout.size());
  for (std::size_t i = 0; i < layout.agents; ++i) {
    for (std::size_t j = 0; j < layout.horizon; ++j) {
      layout.set_input(z, i, j, {thrust(rng), angle(rng), angle(rng)});
    }
  }
  return z;
}

}  // namespace cnmpc::testing
