#include "cnmpc/benchmark.hpp"
#include "cnmpc/controller.hpp"
#include "cnmpc/io.hpp"
#include "cnmpc/optimizer.hpp"
#include "cnmpc/problem.hpp"
#include "cnmpc/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace cnmpc;

namespace {

std::string repr_state(const AgentState& s) {
  std::ostringstream os;
  os << "AgentState(p=[" << s.p.x() << ", " << s.p.y() << ", " << s.p.z() << "], v=["
     << s.v.x() << ", " << s.v.y() << ", " << s.v.z() << "], phi=" << s.phi
     << ", theta=" << s.theta << ")";
  return os.str();
}

AgentState make_state(const Eigen::Vector3d& p, const Eigen::Vector3d& v, double phi,
                      double theta) {
  AgentState s;
  s.p = p;
  s.v = v;
  s.phi = phi;
  s.theta = theta;
  return s;
}

// Positions of every record as an array of shape (records, agents, 3).
py::array_t<double> positions(const SimulationLog& log) {
  const std::size_t n = log.records.size();
  const std::size_t na = n ? log.records.front().fleet.size() : 0;
  py::array_t<double> out({n, na, std::size_t{3}});
  auto a = out.mutable_unchecked<3>();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        a(k, i, c) = log.records[k].fleet[i].p(static_cast<Eigen::Index>(c));
      }
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Centralized NMPC for multiple MAVs: model, problem, solver and closed-loop runs.";

  // Model
  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("tau_phi", &ModelParams::tau_phi)
      .def_readwrite("tau_theta", &ModelParams::tau_theta)
      .def_readwrite("k_phi", &ModelParams::k_phi)
      .def_readwrite("k_theta", &ModelParams::k_theta)
      .def_readwrite("damp_x", &ModelParams::damp_x)
      .def_readwrite("damp_y", &ModelParams::damp_y)
      .def_readwrite("damp_z", &ModelParams::damp_z)
      .def_readwrite("gravity", &ModelParams::gravity)
      .def("validate", &ModelParams::validate);

  py::class_<AgentState>(m, "AgentState")
      .def(py::init(&make_state), py::arg("p") = Eigen::Vector3d::Zero(),
           py::arg("v") = Eigen::Vector3d::Zero(), py::arg("phi") = 0.0, py::arg("theta") = 0.0)
      .def_readwrite("p", &AgentState::p)
      .def_readwrite("v", &AgentState::v)
      .def_readwrite("phi", &AgentState::phi)
      .def_readwrite("theta", &AgentState::theta)
      .def("to_vector", &AgentState::to_vector)
      .def_static("from_vector", &AgentState::from_vector)
      .def(py::self == py::self)
      .def("__repr__", &repr_state);

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init<>())
      .def(py::init([](double t, double phi, double theta) { return ControlInput{t, phi, theta}; }),
           py::arg("thrust"), py::arg("phi_ref") = 0.0, py::arg("theta_ref") = 0.0)
      .def_readwrite("thrust", &ControlInput::thrust)
      .def_readwrite("phi_ref", &ControlInput::phi_ref)
      .def_readwrite("theta_ref", &ControlInput::theta_ref)
      .def_static("hover", &ControlInput::hover, py::arg("params") = ModelParams{})
      .def(py::self == py::self)
      .def("__repr__", [](const ControlInput& u) {
        std::ostringstream os;
        os << "ControlInput(thrust=" << u.thrust << ", phi_ref=" << u.phi_ref
           << ", theta_ref=" << u.theta_ref << ")";
        return os.str();
      });

  m.def("continuous_dynamics",
        py::overload_cast<const AgentState&, const ControlInput&, const ModelParams&>(
            &continuous_dynamics),
        py::arg("state"), py::arg("u"), py::arg("params") = ModelParams{});
  m.def("discrete_step",
        py::overload_cast<const AgentState&, const ControlInput&, const ModelParams&, double>(
            &discrete_step),
        py::arg("state"), py::arg("u"), py::arg("params") = ModelParams{}, py::arg("dt") = 0.05);
  m.def("rollout", &rollout, py::arg("initial"), py::arg("z"), py::arg("params"),
        py::arg("horizon"), py::arg("dt"));

  // Problem
  py::class_<CostWeights>(m, "CostWeights")
      .def(py::init<>())
      .def_readwrite("state", &CostWeights::state)
      .def_readwrite("input", &CostWeights::input)
      .def_readwrite("input_rate", &CostWeights::input_rate);

  py::class_<CylinderObstacle>(m, "CylinderObstacle")
      .def(py::init([](const Eigen::Vector3d& c, double r, double h) {
             return CylinderObstacle{c, r, h};
           }),
           py::arg("center"), py::arg("radius"), py::arg("height"))
      .def_readwrite("center", &CylinderObstacle::center)
      .def_readwrite("radius", &CylinderObstacle::radius)
      .def_readwrite("height", &CylinderObstacle::height);

  py::class_<CollisionParams>(m, "CollisionParams")
      .def(py::init<>())
      .def_readwrite("safety_radius", &CollisionParams::safety_radius)
      .def_readwrite("vertical_margin", &CollisionParams::vertical_margin);

  py::class_<RateLimits>(m, "RateLimits")
      .def(py::init<>())
      .def_readwrite("max_delta_phi", &RateLimits::max_delta_phi)
      .def_readwrite("max_delta_theta", &RateLimits::max_delta_theta);

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def(py::init<>())
      .def_readwrite("initial", &ProblemInstance::initial)
      .def_readwrite("prev_input", &ProblemInstance::prev_input)
      .def_readwrite("references", &ProblemInstance::references)
      .def_readwrite("input_ref", &ProblemInstance::input_ref)
      .def_readwrite("obstacles", &ProblemInstance::obstacles)
      .def_readwrite("weights", &ProblemInstance::weights)
      .def_readwrite("collision", &ProblemInstance::collision)
      .def_readwrite("rates", &ProblemInstance::rates)
      .def_readwrite("horizon", &ProblemInstance::horizon)
      .def_readwrite("dt", &ProblemInstance::dt)
      .def_readwrite("params", &ProblemInstance::params)
      .def("validate", &ProblemInstance::validate)
      .def("decision_size", [](const ProblemInstance& p) { return p.layout().size(); })
      .def("constant_inputs",
           [](const ProblemInstance& p, const ControlInput& u) { return p.layout().constant(u); });

  m.def("cylinder_violation", &cylinder_violation, py::arg("p"), py::arg("obstacle"));
  m.def("collision_violation", &collision_violation, py::arg("p_i"), py::arg("p_l"),
        py::arg("params") = CollisionParams{});
  m.def("constraint_count", &constraint_count, py::arg("agents"), py::arg("horizon"),
        py::arg("obstacles"));
  m.def("assemble_constraints", &assemble_constraints, py::arg("z"), py::arg("instance"));
  m.def("total_cost", &total_cost, py::arg("z"), py::arg("instance"));
  m.def("cost_gradient", &cost_gradient, py::arg("z"), py::arg("instance"));
  m.def("penalized_cost_and_gradient", &penalized_cost_and_gradient, py::arg("z"),
        py::arg("instance"), py::arg("penalty"));

  // Optimizer
  py::enum_<SolverStatus>(m, "SolverStatus")
      .value("converged", SolverStatus::converged)
      .value("iteration_capped", SolverStatus::iteration_capped)
      .value("not_finite", SolverStatus::not_finite);
  py::enum_<PenaltyMode>(m, "PenaltyMode")
      .value("fixed_count", PenaltyMode::fixed_count)
      .value("tolerance_driven", PenaltyMode::tolerance_driven);

  py::class_<BoxSet>(m, "BoxSet")
      .def(py::init([](Eigen::VectorXd lo, Eigen::VectorXd hi) {
             BoxSet b{std::move(lo), std::move(hi)};
             b.validate();
             return b;
           }),
           py::arg("lower"), py::arg("upper"))
      .def_readonly("lower", &BoxSet::lower)
      .def_readonly("upper", &BoxSet::upper)
      .def_static("replicated", &BoxSet::replicated, py::arg("lo"), py::arg("hi"),
                  py::arg("triples"));
  m.def("project_box", &project_box, py::arg("z"), py::arg("box"));

  py::class_<InnerSolverConfig>(m, "InnerSolverConfig")
      .def(py::init<>())
      .def_readwrite("tolerance", &InnerSolverConfig::tolerance)
      .def_readwrite("max_iterations", &InnerSolverConfig::max_iterations)
      .def_readwrite("lbfgs_memory", &InnerSolverConfig::lbfgs_memory);

  py::class_<PenaltyConfig>(m, "PenaltyConfig")
      .def(py::init<>())
      .def_readwrite("initial_weight", &PenaltyConfig::initial_weight)
      .def_readwrite("update_factor", &PenaltyConfig::update_factor)
      .def_readwrite("outer_iterations", &PenaltyConfig::outer_iterations)
      .def_readwrite("infeasibility_tolerance", &PenaltyConfig::infeasibility_tolerance)
      .def_readwrite("mode", &PenaltyConfig::mode);

  py::class_<InnerResult>(m, "InnerResult")
      .def_readonly("solution", &InnerResult::solution)
      .def_readonly("residual", &InnerResult::residual)
      .def_readonly("step", &InnerResult::step)
      .def_readonly("iterations", &InnerResult::iterations)
      .def_readonly("status", &InnerResult::status);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("solution", &SolveResult::solution)
      .def_readonly("inner_iterations_total", &SolveResult::inner_iterations_total)
      .def_readonly("outer_iterations", &SolveResult::outer_iterations)
      .def_readonly("fixed_point_residual", &SolveResult::fixed_point_residual)
      .def_readonly("max_infeasibility", &SolveResult::max_infeasibility)
      .def_readonly("wall_time", &SolveResult::wall_time)
      .def_readonly("status", &SolveResult::status);

  m.def(
      "inner_solve",
      [](const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>& fg,
         const BoxSet& box, const Eigen::VectorXd& z0, const InnerSolverConfig& cfg) {
        const SmoothObjective f = [&fg](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
          auto [value, g] = fg(z);
          if (grad) *grad = std::move(g);
          return value;
        };
        return inner_solve(f, box, z0, cfg);
      },
      py::arg("objective"), py::arg("box"), py::arg("z0"), py::arg("config") = InnerSolverConfig{},
      "Minimize a smooth function over a box. `objective(z)` returns (value, gradient).");
  m.def("penalty_solve",
        py::overload_cast<const ProblemInstance&, const Eigen::VectorXd&, const BoxSet&,
                          const PenaltyConfig&, const InnerSolverConfig&>(&penalty_solve),
        py::arg("instance"), py::arg("z0"), py::arg("box"),
        py::arg("penalty") = PenaltyConfig{}, py::arg("inner") = InnerSolverConfig{});

  // Controller
  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &ControllerConfig::horizon)
      .def_readwrite("dt", &ControllerConfig::dt)
      .def_readwrite("weights", &ControllerConfig::weights)
      .def_readwrite("input_min", &ControllerConfig::input_min)
      .def_readwrite("input_max", &ControllerConfig::input_max)
      .def_readwrite("collision", &ControllerConfig::collision)
      .def_readwrite("rates", &ControllerConfig::rates)
      .def_readwrite("penalty", &ControllerConfig::penalty)
      .def_readwrite("inner", &ControllerConfig::inner)
      .def_readwrite("params", &ControllerConfig::params)
      .def_readwrite("warm_start", &ControllerConfig::warm_start)
      .def("validate", &ControllerConfig::validate)
      .def("box", &ControllerConfig::box, py::arg("agents"));

  py::class_<ControlStepResult>(m, "ControlStepResult")
      .def_readonly("first_inputs", &ControlStepResult::first_inputs)
      .def_readonly("predicted_trajectories", &ControlStepResult::predicted_trajectories)
      .def_readonly("solve", &ControlStepResult::solve);

  m.def("make_instance", &make_instance, py::arg("fleet"), py::arg("prev_inputs"),
        py::arg("references"), py::arg("obstacles"), py::arg("config") = ControllerConfig{});
  m.def("nmpc_step", &nmpc_step, py::arg("fleet"), py::arg("prev_inputs"), py::arg("references"),
        py::arg("obstacles"), py::arg("config") = ControllerConfig{},
        py::arg("warm") = std::optional<Eigen::VectorXd>{});
  m.def("warm_start_shift", &warm_start_shift, py::arg("previous"), py::arg("config"),
        py::arg("agents"));

  py::class_<Controller>(m, "Controller")
      .def(py::init<ControllerConfig, std::size_t>(), py::arg("config"), py::arg("agents"))
      .def("step", &Controller::step, py::arg("fleet"), py::arg("prev_inputs"),
           py::arg("references"), py::arg("obstacles"))
      .def("reset", &Controller::reset);

  // Simulation
  py::class_<NoiseParams>(m, "NoiseParams")
      .def(py::init<>())
      .def_readwrite("sigma_position", &NoiseParams::sigma_position)
      .def_readwrite("sigma_velocity", &NoiseParams::sigma_velocity)
      .def_readwrite("sigma_attitude", &NoiseParams::sigma_attitude)
      .def_readwrite("enabled", &NoiseParams::enabled);

  py::class_<TimedSetpoint>(m, "TimedSetpoint")
      .def(py::init([](double t, const AgentState& s) { return TimedSetpoint{t, s}; }),
           py::arg("time"), py::arg("setpoint"))
      .def_readwrite("time", &TimedSetpoint::time)
      .def_readwrite("setpoint", &TimedSetpoint::setpoint);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("agents", &Scenario::agents)
      .def_readwrite("reference_schedule", &Scenario::reference_schedule)
      .def_readwrite("obstacles", &Scenario::obstacles)
      .def_readwrite("duration", &Scenario::duration)
      .def_readwrite("noise", &Scenario::noise)
      .def_property(
          "penalty_iterations",
          [](const Scenario& s) { return s.controller_overrides.penalty_iterations; },
          [](Scenario& s, std::optional<std::size_t> k) {
            s.controller_overrides.penalty_iterations = k;
          })
      .def("validate", &Scenario::validate)
      .def("references_at", &Scenario::references_at, py::arg("t"))
      .def("configure", &Scenario::configure, py::arg("config") = ControllerConfig{});

  py::class_<SolverRecord>(m, "SolverRecord")
      .def_readonly("t", &SolverRecord::t)
      .def_readonly("solve_ms", &SolverRecord::solve_ms)
      .def_readonly("inner_iterations", &SolverRecord::inner_iterations)
      .def_readonly("outer_iterations", &SolverRecord::outer_iterations)
      .def_readonly("residual", &SolverRecord::residual)
      .def_readonly("infeasibility", &SolverRecord::infeasibility)
      .def_readonly("status", &SolverRecord::status);

  py::class_<StateRecord>(m, "StateRecord")
      .def_readonly("t", &StateRecord::t)
      .def_readonly("fleet", &StateRecord::fleet)
      .def_readonly("inputs", &StateRecord::inputs);

  py::class_<SimulationLog>(m, "SimulationLog")
      .def_readonly("scenario", &SimulationLog::scenario)
      .def_readonly("seed", &SimulationLog::seed)
      .def_readonly("dt", &SimulationLog::dt)
      .def_readonly("records", &SimulationLog::records)
      .def_readonly("solver", &SimulationLog::solver)
      .def_readonly("aborted_steps", &SimulationLog::aborted_steps)
      .def("positions", &positions, "Array of shape (records, agents, 3).")
      .def("trajectory_csv",
           [](const SimulationLog& log) {
             std::ostringstream os;
             write_trajectory_csv(os, log);
             return os.str();
           })
      .def("solver_csv", [](const SimulationLog& log) {
        std::ostringstream os;
        write_solver_csv(os, log);
        return os.str();
      });

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("min_pairwise_distance", &Metrics::min_pairwise_distance)
      .def_readonly("max_safety_violation", &Metrics::max_safety_violation)
      .def_readonly("max_obstacle_penetration", &Metrics::max_obstacle_penetration)
      .def_readonly("solve_ms_mean", &Metrics::solve_ms_mean)
      .def_readonly("solve_ms_max", &Metrics::solve_ms_max)
      .def_readonly("solve_ms_min", &Metrics::solve_ms_min)
      .def_readonly("final_tracking_error", &Metrics::final_tracking_error)
      .def_readonly("aborted_steps", &Metrics::aborted_steps);

  m.def("apply_noise",
        [](const AgentState& s, const NoiseParams& n, std::uint64_t seed) {
          Rng rng(seed);
          return apply_noise(s, n, rng);
        },
        py::arg("state"), py::arg("noise"), py::arg("seed"),
        "Noise from a fresh generator seeded with `seed`.");
  m.def("run_scenario", &run_scenario, py::arg("scenario"),
        py::arg("config") = ControllerConfig{}, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("compute_metrics", &compute_metrics, py::arg("log"), py::arg("scenario"),
        py::arg("config") = ControllerConfig{}, py::arg("warmup_steps") = 0);
  m.def("builtin_scenarios", &builtin_scenarios);
  m.def("find_builtin_scenario", &find_builtin_scenario, py::arg("name"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"));
  m.def("dump_scenario", &dump_scenario, py::arg("scenario"));

  py::class_<BenchRow>(m, "BenchRow")
      .def_readonly("agents", &BenchRow::agents)
      .def_readonly("mean_ms", &BenchRow::mean_ms)
      .def_readonly("max_ms", &BenchRow::max_ms)
      .def_readonly("min_ms", &BenchRow::min_ms)
      .def_readonly("max_safety_violation", &BenchRow::max_safety_violation)
      .def_readonly("max_obstacle_violation", &BenchRow::max_obstacle_violation);
  m.def("run_benchmark", &run_benchmark, py::arg("agents_min"), py::arg("agents_max"),
        py::arg("trials") = 1, py::arg("seed") = 0, py::arg("config") = ControllerConfig{},
        py::call_guard<py::gil_scoped_release>());
}
