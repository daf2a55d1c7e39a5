#include "cnmpc/io.hpp"
#include "cnmpc/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace cnmpc;

namespace {

AgentState at(double x, double y, double z) {
  AgentState s;
  s.p = {x, y, z};
  return s;
}

Scenario hover_scenario(double duration) {
  Scenario sc;
  sc.name = "hover";
  sc.agents = {at(0, 0, 1.5)};
  sc.reference_schedule = {{{0.0, at(0, 0, 1.5)}}};
  sc.duration = duration;
  sc.noise.enabled = false;
  return sc;
}

SimulationLog synthetic_log(const std::vector<FleetState>& frames) {
  SimulationLog log;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    log.records.push_back({0.05 * static_cast<double>(k), frames[k], {}});
  }
  return log;
}

}  // namespace

TEST_CASE("noise") {
  const AgentState s = at(1, 2, 3);
  SUBCASE("disabled leaves the state and the generator alone") {
    NoiseParams off;
    off.enabled = false;
    Rng rng(1);
    Rng untouched(1);
    CHECK(apply_noise(s, off, rng) == s);
    CHECK(rng() == untouched());
  }
  SUBCASE("deterministic for a seed") {
    Rng a(42);
    Rng b(42);
    CHECK(apply_noise(s, {}, a) == apply_noise(s, {}, b));
  }
  SUBCASE("sample standard deviations") {
    Rng rng(7);
    const NoiseParams np;
    const int n = 100000;
    double sp = 0.0;
    double sv = 0.0;
    double sa = 0.0;
    for (int k = 0; k < n; ++k) {
      const AgentState d = apply_noise(AgentState{}, np, rng);
      sp += d.p.x() * d.p.x();
      sv += d.v.y() * d.v.y();
      sa += d.theta * d.theta;
    }
    CHECK(std::sqrt(sp / n) == doctest::Approx(0.01).epsilon(0.02));
    CHECK(std::sqrt(sv / n) == doctest::Approx(0.005).epsilon(0.02));
    CHECK(std::sqrt(sa / n) == doctest::Approx(0.001).epsilon(0.02));
  }
}

TEST_CASE("scenario references and validation") {
  Scenario sc = four_agent_cylinder();
  CHECK_NOTHROW(sc.validate());
  CHECK(sc.references_at(0.0)[0].p.x() == -3.0);
  CHECK(sc.references_at(2.45)[0].p.x() == -3.0);
  CHECK(sc.references_at(2.5)[0].p.x() == 3.0);

  sc.duration = 0.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = four_agent_cylinder();
  std::swap(sc.reference_schedule[0][0], sc.reference_schedule[0][1]);
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = four_agent_cylinder();
  sc.reference_schedule.pop_back();
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

TEST_CASE("hovering agent does not drift") {
  const Scenario sc = hover_scenario(1.0);
  const SimulationLog log = run_scenario(sc, {}, 0);
  REQUIRE(log.records.size() == 21);
  CHECK(log.solver.size() == 20);
  for (const auto& rec : log.records) {
    CHECK((rec.fleet[0].p - sc.agents[0].p).norm() < 1e-6);
  }
}

TEST_CASE("record cadence") {
  for (double duration : {0.5, 1.0, 2.05}) {
    const SimulationLog log = run_scenario(hover_scenario(duration), {}, 0);
    CHECK(log.records.size() == static_cast<std::size_t>(std::llround(duration / 0.05)) + 1);
    CHECK(log.records.back().t == doctest::Approx(duration));
  }
}

TEST_CASE("runs are reproducible") {
  Scenario sc = head_on_four();
  sc.duration = 1.0;
  const ControllerConfig cfg = sc.configure({});
  const SimulationLog a = run_scenario(sc, cfg, 3);
  const SimulationLog b = run_scenario(sc, cfg, 3);
  std::ostringstream ta;
  std::ostringstream tb;
  write_trajectory_csv(ta, a);
  write_trajectory_csv(tb, b);
  CHECK(ta.str() == tb.str());

  const SimulationLog c = run_scenario(sc, cfg, 4);
  std::ostringstream tc;
  write_trajectory_csv(tc, c);
  CHECK(ta.str() != tc.str());
}

TEST_CASE("metrics on synthetic logs") {
  Scenario sc;
  sc.name = "synthetic";
  sc.obstacles = {{{0, 0, 0}, 0.8, 4.0}};
  const ControllerConfig cfg;

  SUBCASE("well separated") {
    const SimulationLog log = synthetic_log({{at(5, 0, 1), at(6, 0, 1)}, {at(5, 0, 1), at(6, 0, 1)}});
    const Metrics m = compute_metrics(log, sc, cfg);
    CHECK(m.max_safety_violation == 0.0);
    CHECK(m.min_pairwise_distance == doctest::Approx(1.0));
    CHECK(m.max_obstacle_penetration == 0.0);
  }
  SUBCASE("one close step") {
    const SimulationLog log =
        synthetic_log({{at(5, 0, 1), at(6, 0, 1)}, {at(5, 0, 1), at(5.36, 0, 1)}});
    const Metrics m = compute_metrics(log, sc, cfg);
    CHECK(m.max_safety_violation == doctest::Approx(0.04));
    CHECK(m.min_pairwise_distance == doctest::Approx(0.36));
  }
  SUBCASE("inside the cylinder band") {
    const SimulationLog log = synthetic_log({{at(0.74, 0, 1.0)}});
    CHECK(compute_metrics(log, sc, cfg).max_obstacle_penetration == doctest::Approx(0.06));
  }
  SUBCASE("above the cylinder") {
    const SimulationLog log = synthetic_log({{at(0.1, 0, 2.5)}});
    CHECK(compute_metrics(log, sc, cfg).max_obstacle_penetration == 0.0);
  }
  SUBCASE("relabeling agents") {
    const FleetState f{at(0.7, 0.1, 1), at(1.0, 0.2, 1.2), at(-0.9, 0.3, 0.5)};
    const FleetState g{f[2], f[0], f[1]};
    const Metrics a = compute_metrics(synthetic_log({f}), sc, cfg);
    const Metrics b = compute_metrics(synthetic_log({g}), sc, cfg);
    CHECK(a.max_safety_violation == b.max_safety_violation);
    CHECK(a.min_pairwise_distance == b.min_pairwise_distance);
    CHECK(a.max_obstacle_penetration == b.max_obstacle_penetration);
  }
  SUBCASE("solver time statistics") {
    SimulationLog log = synthetic_log({{at(5, 0, 1)}});
    for (double ms : {4.0, 1.0, 2.0, 3.0}) {
      SolverRecord r;
      r.solve_ms = ms;
      log.solver.push_back(r);
    }
    const Metrics m = compute_metrics(log, sc, cfg);
    CHECK(m.solve_ms_mean == doctest::Approx(2.5));
    CHECK(m.solve_ms_max == 4.0);
    CHECK(m.solve_ms_min == 1.0);
  }
}

TEST_CASE("built-in scenarios") {
  const Scenario four = four_agent_cylinder();
  CHECK(four.agents.size() == 4);
  REQUIRE(four.obstacles.size() == 1);
  CHECK(four.obstacles[0].radius == 0.8);
  CHECK(four.obstacles[0].height == 4.0);

  for (std::size_t n = 2; n <= 9; ++n) {
    const Scenario s = scaling_scenario(n);
    CHECK(s.agents.size() == n);
    CHECK(s.obstacles.size() == 1);
    CHECK(s.name == "scaling_" + std::to_string(n));
  }

  const Scenario head = head_on_four();
  CHECK(head.agents.size() == 4);
  CHECK(head.controller_overrides.penalty_iterations == 5);
  CHECK(head.configure({}).penalty.outer_iterations == 5);
  for (std::size_t i = 0; i < 4; ++i) {
    // Goals sit diametrically opposite the start on the same circle.
    const Eigen::Vector3d goal = head.reference_schedule[i].back().setpoint.p;
    CHECK((goal.head<2>() + head.agents[i].p.head<2>()).norm() < 1e-12);
    CHECK(goal.head<2>().norm() == doctest::Approx(2.0));
  }

  const Scenario course = obstacle_course_six();
  CHECK(course.agents.size() == 6);
  CHECK(course.obstacles.size() == 5);
  for (const auto& o : course.obstacles) {
    CHECK(o.radius >= 0.4);
    CHECK(o.radius <= 1.0);
  }

  const auto all = builtin_scenarios();
  CHECK(all.size() == 11);
  for (const auto& s : all) {
    CHECK_NOTHROW(s.validate());
    REQUIRE(find_builtin_scenario(s.name).has_value());
  }
  CHECK(!find_builtin_scenario("nosuch").has_value());
}

TEST_CASE("scenario files") {
  SUBCASE("round trip") {
    for (const auto& s : builtin_scenarios()) {
      const Scenario back = parse_scenario(dump_scenario(s));
      CHECK(dump_scenario(back) == dump_scenario(s));
      CHECK(back.name == s.name);
      CHECK(back.agents == s.agents);
      CHECK(back.obstacles == s.obstacles);
    }
  }
  SUBCASE("shipped files mirror the built-ins") {
    const std::filesystem::path dir = std::filesystem::path(CNMPC_SOURCE_DIR) / "scenarios";
    for (const auto& s : builtin_scenarios()) {
      const Scenario f = load_scenario((dir / (s.name + ".json")).string());
      CHECK(dump_scenario(f) == dump_scenario(s));
    }
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_scenario("{not json"), std::invalid_argument);
    CHECK_THROWS_AS(parse_scenario(R"({"name": "x"})"), std::invalid_argument);
    CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), std::runtime_error);
  }
}

TEST_CASE("warm-up steps are excluded from timing on request") {
  Scenario sc;
  SimulationLog log = synthetic_log({{at(5, 0, 1)}});
  for (double ms : {40.0, 1.0, 3.0}) {
    SolverRecord r;
    r.solve_ms = ms;
    log.solver.push_back(r);
  }
  const Metrics all = compute_metrics(log, sc, {});
  const Metrics warm = compute_metrics(log, sc, {}, 1);
  CHECK(all.solve_ms_max == 40.0);
  CHECK(warm.solve_ms_max == 3.0);
  CHECK(warm.solve_ms_mean == doctest::Approx(2.0));
  CHECK(compute_metrics(log, sc, {}, 5).solve_ms_max == 40.0);
}
