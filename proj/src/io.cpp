#include "cnmpc/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cnmpc {
namespace {

using nlohmann::json;

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d read_vec3(const json& j, const char* key) {
  if (!j.contains(key)) {
    return Eigen::Vector3d::Zero();
  }
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw std::invalid_argument(std::string("scenario field '") + key + "' must have 3 entries");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json state_json(const AgentState& s) {
  return {{"p", vec3(s.p)}, {"v", vec3(s.v)}, {"phi", s.phi}, {"theta", s.theta}};
}

AgentState read_state(const json& j) {
  AgentState s;
  s.p = read_vec3(j, "p");
  s.v = read_vec3(j, "v");
  s.phi = j.value("phi", 0.0);
  s.theta = j.value("theta", 0.0);
  return s;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    Scenario sc;
    sc.name = j.at("name").get<std::string>();
    sc.duration = j.at("duration").get<double>();
    for (const auto& a : j.at("agents")) {
      sc.agents.push_back(read_state(a));
    }
    for (const auto& sched : j.at("reference_schedule")) {
      std::vector<TimedSetpoint> list;
      for (const auto& sp : sched) {
        list.push_back({sp.at("time").get<double>(), read_state(sp)});
      }
      sc.reference_schedule.push_back(std::move(list));
    }
    for (const auto& o : j.value("obstacles", json::array())) {
      sc.obstacles.push_back(
          {read_vec3(o, "center"), o.at("radius").get<double>(), o.at("height").get<double>()});
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      sc.noise.sigma_position = n.value("sigma_position", sc.noise.sigma_position);
      sc.noise.sigma_velocity = n.value("sigma_velocity", sc.noise.sigma_velocity);
      sc.noise.sigma_attitude = n.value("sigma_attitude", sc.noise.sigma_attitude);
      sc.noise.enabled = n.value("enabled", sc.noise.enabled);
    }
    if (j.contains("controller_overrides")) {
      const auto& o = j.at("controller_overrides");
      if (o.contains("penalty_iterations")) {
        sc.controller_overrides.penalty_iterations = o.at("penalty_iterations").get<std::size_t>();
      }
    }
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scenario file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["duration"] = sc.duration;
  j["agents"] = json::array();
  for (const auto& a : sc.agents) {
    j["agents"].push_back(state_json(a));
  }
  j["reference_schedule"] = json::array();
  for (const auto& sched : sc.reference_schedule) {
    json list = json::array();
    for (const auto& sp : sched) {
      json e = state_json(sp.setpoint);
      e["time"] = sp.time;
      list.push_back(std::move(e));
    }
    j["reference_schedule"].push_back(std::move(list));
  }
  j["obstacles"] = json::array();
  for (const auto& o : sc.obstacles) {
    j["obstacles"].push_back({{"center", vec3(o.center)}, {"radius", o.radius}, {"height", o.height}});
  }
  j["noise"] = {{"sigma_position", sc.noise.sigma_position},
                {"sigma_velocity", sc.noise.sigma_velocity},
                {"sigma_attitude", sc.noise.sigma_attitude},
                {"enabled", sc.noise.enabled}};
  j["controller_overrides"] = json::object();
  if (sc.controller_overrides.penalty_iterations) {
    j["controller_overrides"]["penalty_iterations"] = *sc.controller_overrides.penalty_iterations;
  }
  return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream& os, const SimulationLog& log) {
  os << "t,agent,px,py,pz,vx,vy,vz,phi,theta,T_cmd,phi_ref,theta_ref\n";
  for (const auto& rec : log.records) {
    for (std::size_t i = 0; i < rec.fleet.size(); ++i) {
      const AgentState& s = rec.fleet[i];
      const ControlInput& u = rec.inputs[i];
      os << num(rec.t) << ',' << i << ',' << num(s.p.x()) << ',' << num(s.p.y()) << ','
         << num(s.p.z()) << ',' << num(s.v.x()) << ',' << num(s.v.y()) << ',' << num(s.v.z())
         << ',' << num(s.phi) << ',' << num(s.theta) << ',' << num(u.thrust) << ','
         << num(u.phi_ref) << ',' << num(u.theta_ref) << '\n';
    }
  }
}

void write_solver_csv(std::ostream& os, const SimulationLog& log) {
  os << "t,solve_ms,inner_iters,outer_iters,residual,infeasibility\n";
  for (const auto& r : log.solver) {
    os << num(r.t) << ',' << num(r.solve_ms) << ',' << r.inner_iterations << ','
       << r.outer_iterations << ',' << num(r.residual) << ',' << num(r.infeasibility) << '\n';
  }
}

std::string metrics_json(const Metrics& m, const SimulationLog& log) {
  json j;
  j["scenario"] = log.scenario;
  j["seed"] = log.seed;
  j["steps"] = log.solver.size();
  j["min_pairwise_distance_m"] = m.min_pairwise_distance;
  j["max_safety_violation_m"] = m.max_safety_violation;
  j["max_obstacle_penetration_m"] = m.max_obstacle_penetration;
  j["solve_ms"] = {{"mean", m.solve_ms_mean}, {"max", m.solve_ms_max}, {"min", m.solve_ms_min}};
  j["final_tracking_error_m"] = m.final_tracking_error;
  j["aborted_steps"] = m.aborted_steps;
  return j.dump(2) + "\n";
}

RunFiles write_run_outputs(const std::filesystem::path& dir, const SimulationLog& log,
                           const Metrics& m) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "': " +
                             ec.message());
  }
  RunFiles files{dir / "trajectory.csv", dir / "solver.csv", dir / "metrics.json"};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) {
      throw std::runtime_error("cannot write '" + p.string() + "'");
    }
    return os;
  };
  {
    auto os = open(files.trajectory);
    write_trajectory_csv(os, log);
  }
  {
    auto os = open(files.solver);
    write_solver_csv(os, log);
  }
  {
    auto os = open(files.metrics);
    os << metrics_json(m, log);
  }
  return files;
}

}  // namespace cnmpc
