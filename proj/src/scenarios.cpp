#include "cnmpc/simulation.hpp"

#include <string>

namespace cnmpc {
namespace {

constexpr double kCruiseAltitude = 1.5;

AgentState at(double x, double y, double z) {
  AgentState s;
  s.p = {x, y, z};
  return s;
}

// Line formation with 0.8 m spacing. Agents sit at odd multiples of 0.4 m
// in y, so none starts on the axis of an obstacle placed at y = 0.
double formation_y(std::size_t index, std::size_t agents) {
  return 0.8 * static_cast<double>(index) - 0.8 * static_cast<double>(agents / 2) + 0.4;
}

Scenario cylinder_crossing(std::string name, std::size_t agents) {
  Scenario sc;
  sc.name = std::move(name);
  sc.duration = 20.0;
  sc.obstacles.push_back({{0.0, 0.0, 0.0}, 0.8, 4.0});
  for (std::size_t i = 0; i < agents; ++i) {
    const double y = formation_y(i, agents);
    sc.agents.push_back(at(-3.0, y, 0.0));
    sc.reference_schedule.push_back(
        {{0.0, at(-3.0, y, kCruiseAltitude)}, {2.5, at(3.0, y, kCruiseAltitude)}});
  }
  return sc;
}

}  // namespace

Scenario four_agent_cylinder() { return cylinder_crossing("four_agent_cylinder", 4); }

Scenario scaling_scenario(std::size_t agents) {
  return cylinder_crossing("scaling_" + std::to_string(agents), agents);
}

Scenario head_on_four() {
  Scenario sc;
  sc.name = "head_on_four";
  sc.duration = 15.0;
  sc.controller_overrides.penalty_iterations = 5;
  // Four points on a circle of radius 2, each heading to the opposite one.
  const double starts[][2] = {{2.0, 0.0}, {0.0, 2.0}, {-2.0, 0.0}, {0.0, -2.0}};
  for (const auto& [x, y] : starts) {
    sc.agents.push_back(at(x, y, kCruiseAltitude));
    sc.reference_schedule.push_back({{0.0, at(-x, -y, kCruiseAltitude)}});
  }
  return sc;
}

Scenario obstacle_course_six() {
  Scenario sc;
  sc.name = "obstacle_course_six";
  sc.duration = 30.0;
  sc.obstacles = {
      {{3.0, 0.6, 0.0}, 0.6, 6.0},
      {{6.0, -1.0, 0.0}, 0.8, 6.0},
      {{9.0, 1.0, 0.0}, 0.4, 6.0},
      {{12.0, -0.2, 0.0}, 1.0, 6.0},
      {{15.0, 1.2, 0.0}, 0.5, 6.0},
  };
  const double waypoints[][2] = {{0.0, 0.0}, {2.5, 4.5}, {7.0, 9.0}, {11.5, 13.5}, {16.0, 18.0}};
  for (std::size_t i = 0; i < 6; ++i) {
    const double y = formation_y(i, 6);
    sc.agents.push_back(at(0.0, y, 0.0));
    std::vector<TimedSetpoint> sched;
    for (const auto& wp : waypoints) {
      sched.push_back({wp[0], at(wp[1], y, kCruiseAltitude)});
    }
    sc.reference_schedule.push_back(std::move(sched));
  }
  return sc;
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> all{four_agent_cylinder()};
  for (std::size_t n = 2; n <= 9; ++n) {
    all.push_back(scaling_scenario(n));
  }
  all.push_back(head_on_four());
  all.push_back(obstacle_course_six());
  return all;
}

std::optional<Scenario> find_builtin_scenario(const std::string& name) {
  for (auto& sc : builtin_scenarios()) {
    if (sc.name == name) {
      return sc;
    }
  }
  return std::nullopt;
}

}  // namespace cnmpc
