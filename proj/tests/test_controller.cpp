#include "cnmpc/controller.hpp"
#include "cnmpc/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cnmpc;

namespace {

AgentState at(double x, double y, double z) {
  AgentState s;
  s.p = {x, y, z};
  return s;
}

ControllerConfig tight_config() {
  ControllerConfig cfg;
  cfg.inner.tolerance = 1e-8;
  cfg.inner.max_iterations = 20000;
  return cfg;
}

void check_in_box(const ControlInput& u, const ControllerConfig& cfg) {
  CHECK(u.thrust >= cfg.input_min.thrust);
  CHECK(u.thrust <= cfg.input_max.thrust);
  CHECK(u.phi_ref >= cfg.input_min.phi_ref);
  CHECK(u.phi_ref <= cfg.input_max.phi_ref);
  CHECK(u.theta_ref >= cfg.input_min.theta_ref);
  CHECK(u.theta_ref <= cfg.input_max.theta_ref);
}

}  // namespace

TEST_CASE("hover is a fixed point of the controller") {
  const ControllerConfig cfg;
  const FleetState fleet{at(0, 0, 1.5), at(2, 0, 1.5), at(0, 2, 1.5)};
  const std::vector<ControlInput> prev(3, ControlInput::hover(cfg.params));
  const ControlStepResult r = nmpc_step(fleet, prev, fleet, {}, cfg);
  REQUIRE(r.first_inputs.size() == 3);
  for (const ControlInput& u : r.first_inputs) {
    CHECK(u.thrust == doctest::Approx(cfg.params.gravity).epsilon(cfg.inner.tolerance));
    CHECK(std::abs(u.phi_ref) <= cfg.inner.tolerance);
    CHECK(std::abs(u.theta_ref) <= cfg.inner.tolerance);
  }
  CHECK(r.solve.max_infeasibility == 0.0);
  REQUIRE(r.predicted_trajectories.size() == 3);
  CHECK(r.predicted_trajectories[0].size() == cfg.horizon + 1);
  CHECK(r.predicted_trajectories[1][0] == fleet[1]);
}

TEST_CASE("climb command") {
  const ControllerConfig cfg;
  const FleetState fleet{at(0, 0, 1.0)};
  const std::vector<AgentState> refs{at(0, 0, 2.0)};
  const std::vector<ControlInput> prev{ControlInput::hover(cfg.params)};

  // Coarse oracle: best constant thrust with level attitude.
  const ProblemInstance inst = make_instance(fleet, prev, refs, {}, cfg);
  double best_thrust = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double t = cfg.input_min.thrust; t <= cfg.input_max.thrust + 1e-9; t += 0.05) {
    const double c = total_cost(inst.layout().constant({t, 0.0, 0.0}), inst);
    if (c < best_cost) {
      best_cost = c;
      best_thrust = t;
    }
  }
  CHECK(best_thrust > cfg.params.gravity);

  const ControlStepResult r = nmpc_step(fleet, prev, refs, {}, cfg);
  CHECK(r.first_inputs[0].thrust > cfg.params.gravity);
  CHECK(total_cost(r.solve.solution, inst) <= best_cost);
  check_in_box(r.first_inputs[0], cfg);
}

TEST_CASE("far-apart agents decouple") {
  const ControllerConfig cfg = tight_config();
  const FleetState fleet{at(0, 0, 1.0), at(50, 0, 1.0)};
  const std::vector<AgentState> refs{at(1, -1, 1.5), at(49, 0.5, 0.5)};
  const std::vector<ControlInput> prev(2, ControlInput::hover(cfg.params));

  const ControlStepResult joint = nmpc_step(fleet, prev, refs, {}, cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    const ControlStepResult single = nmpc_step({fleet[i]}, {prev[i]}, {refs[i]}, {}, cfg);
    const ControlInput& a = joint.first_inputs[i];
    const ControlInput& b = single.first_inputs[0];
    const double tol = 1e-5;
    CHECK(std::abs(a.thrust - b.thrust) < tol);
    CHECK(std::abs(a.phi_ref - b.phi_ref) < tol);
    CHECK(std::abs(a.theta_ref - b.theta_ref) < tol);
  }
}

TEST_CASE("agent permutation equivariance") {
  const ControllerConfig cfg = tight_config();
  const FleetState fleet{at(0, 0, 1.0), at(0.5, 0.2, 1.1), at(-0.3, 0.6, 0.9)};
  const std::vector<AgentState> refs{at(1, 0.5, 1.5), at(-1, 0, 1.5), at(0.2, -1, 1.2)};
  const std::vector<ControlInput> prev{{9.9, 0.01, 0.0}, {9.7, -0.02, 0.03}, {9.82, 0.0, -0.01}};
  const std::vector<CylinderObstacle> obstacles{{{0.2, 0.3, 0.0}, 0.3, 4.0}};
  const std::array<std::size_t, 3> perm{2, 0, 1};

  FleetState pf;
  std::vector<AgentState> pr;
  std::vector<ControlInput> pp;
  for (std::size_t k : perm) {
    pf.push_back(fleet[k]);
    pr.push_back(refs[k]);
    pp.push_back(prev[k]);
  }
  const ControlStepResult a = nmpc_step(fleet, prev, refs, obstacles, cfg);
  const ControlStepResult b = nmpc_step(pf, pp, pr, obstacles, cfg);
  for (std::size_t k = 0; k < 3; ++k) {
    const ControlInput& x = a.first_inputs[perm[k]];
    const ControlInput& y = b.first_inputs[k];
    CHECK(std::abs(x.thrust - y.thrust) < 1e-4);
    CHECK(std::abs(x.phi_ref - y.phi_ref) < 1e-4);
    CHECK(std::abs(x.theta_ref - y.theta_ref) < 1e-4);
    check_in_box(y, cfg);
  }
}

TEST_CASE("warm start shift") {
  ControllerConfig cfg;
  cfg.horizon = 3;
  const HorizonLayout layout{2, 3};
  Eigen::VectorXd z(layout.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = static_cast<double>(k);

  SUBCASE("constant sequence unchanged") {
    const Eigen::VectorXd c = layout.constant({9.0, 0.1, -0.1});
    CHECK(warm_start_shift(c, cfg, 2) == c);
  }
  SUBCASE("per-agent shift and repeat") {
    const Eigen::VectorXd s = warm_start_shift(z, cfg, 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(layout.input(s, i, 0) == layout.input(z, i, 1));
      CHECK(layout.input(s, i, 1) == layout.input(z, i, 2));
      CHECK(layout.input(s, i, 2) == layout.input(z, i, 2));
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(warm_start_shift(z, cfg, 3), std::invalid_argument);
  }
}

TEST_CASE("controller input validation") {
  ControllerConfig cfg;
  cfg.horizon = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  const ControllerConfig ok;
  const FleetState fleet{at(0, 0, 1)};
  CHECK_THROWS_AS(nmpc_step(fleet, {}, fleet, {}, ok), std::invalid_argument);
  CHECK_THROWS_AS(nmpc_step(fleet, {ControlInput::hover(ok.params)}, fleet, {}, ok,
                            Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  Controller c(ok, 2);
  CHECK_THROWS_AS(c.step(fleet, {ControlInput::hover(ok.params)}, fleet, {}), std::invalid_argument);
}

TEST_CASE("single agent reaches a constant reference") {
  Scenario sc;
  sc.name = "single";
  sc.agents = {at(0, 0, 1)};
  sc.reference_schedule = {{{0.0, at(1.0, -0.5, 1.8)}}};
  sc.duration = 10.0;
  sc.noise.enabled = false;
  const ControllerConfig cfg;
  const SimulationLog log = run_scenario(sc, cfg, 0);

  const auto error = [&](const StateRecord& r) {
    return (r.fleet[0].p - sc.reference_schedule[0][0].setpoint.p).norm();
  };
  CHECK(error(log.records.back()) < 0.05);
  // Past the initial transient the error does not grow.
  for (std::size_t k = 1; k < log.records.size(); ++k) {
    if (log.records[k].t >= 4.0) {
      CHECK(error(log.records[k]) <= error(log.records[k - 1]) + 1e-4);
    }
  }
  CHECK(log.aborted_steps == 0);
}
