#include "cnmpc/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cnmpc {

void NoiseParams::validate() const {
  if (sigma_position < 0.0 || sigma_velocity < 0.0 || sigma_attitude < 0.0) {
    throw std::invalid_argument("NoiseParams: standard deviations must be non-negative");
  }
}

AgentState apply_noise(const AgentState& state, const NoiseParams& noise, Rng& rng) {
  if (!noise.enabled) {
    return state;
  }
  std::normal_distribution<double> unit(0.0, 1.0);
  AgentState out = state;
  for (int k = 0; k < 3; ++k) {
    out.p(k) += noise.sigma_position * unit(rng);
  }
  for (int k = 0; k < 3; ++k) {
    out.v(k) += noise.sigma_velocity * unit(rng);
  }
  out.phi += noise.sigma_attitude * unit(rng);
  out.theta += noise.sigma_attitude * unit(rng);
  return out;
}

void Scenario::validate() const {
  if (agents.empty()) {
    throw std::invalid_argument("scenario '" + name + "' has no agents");
  }
  if (reference_schedule.size() != agents.size()) {
    throw std::invalid_argument("scenario '" + name + "' needs one reference schedule per agent");
  }
  for (const auto& sched : reference_schedule) {
    if (sched.empty()) {
      throw std::invalid_argument("scenario '" + name + "' has an empty reference schedule");
    }
    for (std::size_t k = 1; k < sched.size(); ++k) {
      if (sched[k].time < sched[k - 1].time) {
        throw std::invalid_argument("scenario '" + name + "' schedule times must not decrease");
      }
    }
  }
  if (!(duration > 0.0)) {
    throw std::invalid_argument("scenario '" + name + "' duration must be positive");
  }
  for (const auto& obs : obstacles) {
    obs.validate();
  }
  noise.validate();
}

std::vector<AgentState> Scenario::references_at(double t) const {
  std::vector<AgentState> refs;
  refs.reserve(reference_schedule.size());
  for (const auto& sched : reference_schedule) {
    const TimedSetpoint* active = &sched.front();
    for (const auto& sp : sched) {
      // Small slack so a setpoint issued at k * dt is active at step k.
      if (sp.time <= t + 1e-9) {
        active = &sp;
      }
    }
    refs.push_back(active->setpoint);
  }
  return refs;
}

ControllerConfig Scenario::configure(ControllerConfig cfg) const {
  if (controller_overrides.penalty_iterations) {
    cfg.penalty.outer_iterations = *controller_overrides.penalty_iterations;
  }
  return cfg;
}

SimulationLog run_scenario(const Scenario& sc, const ControllerConfig& cfg_in,
                           std::uint64_t seed) {
  sc.validate();
  const ControllerConfig cfg = sc.configure(cfg_in);
  cfg.validate();

  const auto steps = static_cast<std::size_t>(std::llround(sc.duration / cfg.dt));
  const std::size_t na = sc.agents.size();

  SimulationLog log;
  log.scenario = sc.name;
  log.seed = seed;
  log.dt = cfg.dt;
  log.records.reserve(steps + 1);
  log.solver.reserve(steps);

  Rng rng(seed);
  Controller controller(cfg, na);
  FleetState fleet = sc.agents;
  std::vector<ControlInput> prev(na, ControlInput::hover(cfg.params));

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const auto refs = sc.references_at(t);

    const auto start = std::chrono::steady_clock::now();
    const ControlStepResult res = controller.step(fleet, prev, refs, sc.obstacles);
    const double solve_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    SolverRecord rec;
    rec.t = t;
    rec.solve_ms = solve_ms;
    rec.inner_iterations = res.solve.inner_iterations_total;
    rec.outer_iterations = res.solve.outer_iterations;
    rec.residual = res.solve.fixed_point_residual;
    rec.infeasibility = res.solve.max_infeasibility;
    rec.status = res.solve.status;
    log.solver.push_back(rec);

    std::vector<ControlInput> applied = prev;
    if (res.solve.status == SolverStatus::not_finite) {
      ++log.aborted_steps;
    } else {
      applied = res.first_inputs;
    }
    log.records.push_back({t, fleet, applied});

    for (std::size_t i = 0; i < na; ++i) {
      fleet[i] = apply_noise(discrete_step(fleet[i], applied[i], cfg.params, cfg.dt), sc.noise,
                             rng);
    }
    prev = applied;
  }
  log.records.push_back({static_cast<double>(steps) * cfg.dt, fleet, prev});
  return log;
}

Metrics compute_metrics(const SimulationLog& log, const Scenario& sc, const ControllerConfig& cfg,
                        std::size_t warmup_steps) {
  Metrics m;
  m.aborted_steps = log.aborted_steps;
  m.min_pairwise_distance = std::numeric_limits<double>::infinity();
  const double r_safe = cfg.collision.safety_radius;

  for (const auto& rec : log.records) {
    const auto& fleet = rec.fleet;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      for (std::size_t l = i + 1; l < fleet.size(); ++l) {
        const double d = (fleet[i].p - fleet[l].p).norm();
        m.min_pairwise_distance = std::min(m.min_pairwise_distance, d);
        m.max_safety_violation = std::max(m.max_safety_violation, r_safe - d);
      }
      for (const auto& obs : sc.obstacles) {
        const double half = 0.5 * obs.height;
        const Eigen::Vector3d& p = fleet[i].p;
        if (p.z() < obs.center.z() - half || p.z() > obs.center.z() + half) {
          continue;
        }
        const double radial = (p.head<2>() - obs.center.head<2>()).norm();
        m.max_obstacle_penetration = std::max(m.max_obstacle_penetration, obs.radius - radial);
      }
    }
  }
  if (!std::isfinite(m.min_pairwise_distance)) {
    m.min_pairwise_distance = 0.0;  // single agent
  }

  const std::size_t skip = log.solver.size() > warmup_steps ? warmup_steps : 0;
  if (log.solver.size() > skip) {
    double sum = 0.0;
    m.solve_ms_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = skip; k < log.solver.size(); ++k) {
      const double ms = log.solver[k].solve_ms;
      sum += ms;
      m.solve_ms_max = std::max(m.solve_ms_max, ms);
      m.solve_ms_min = std::min(m.solve_ms_min, ms);
    }
    m.solve_ms_mean = sum / static_cast<double>(log.solver.size() - skip);
  }

  // Synthetic logs may come without a matching reference schedule.
  const bool has_refs = !log.records.empty() &&
                        sc.reference_schedule.size() == log.records.back().fleet.size() &&
                        std::none_of(sc.reference_schedule.begin(), sc.reference_schedule.end(),
                                     [](const auto& s) { return s.empty(); });
  if (has_refs) {
    const auto& last = log.records.back();
    const auto refs = sc.references_at(last.t);
    for (std::size_t i = 0; i < last.fleet.size(); ++i) {
      m.final_tracking_error.push_back((last.fleet[i].p - refs[i].p).norm());
    }
  }
  return m;
}

}  // namespace cnmpc
