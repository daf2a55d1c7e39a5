#include "cnmpc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cnmpc {
namespace {

double hinge(double x) { return x > 0.0 ? x : 0.0; }

// Hinge product of a vertical cylinder and its gradient w.r.t. p. The
// gradient is only meaningful when the returned value is positive.
double cylinder_term(const Eigen::Vector3d& p, const CylinderObstacle& obs,
                     Eigen::Vector3d* grad) {
  const double half = 0.5 * obs.height;
  const double above_bottom = p.z() - (obs.center.z() - half);
  const double below_top = (obs.center.z() + half) - p.z();
  const double dx = p.x() - obs.center.x();
  const double dy = p.y() - obs.center.y();
  const double radial = obs.radius * obs.radius - dx * dx - dy * dy;

  const double a = hinge(above_bottom);
  const double b = hinge(below_top);
  const double h = hinge(radial);
  const double value = a * b * h;
  if (grad != nullptr && value > 0.0) {
    *grad = {-2.0 * dx * a * b, -2.0 * dy * a * b, (b - a) * h};
  }
  return value;
}

// Same structure for an agent pair, differentiated w.r.t. p_i (the
// gradient w.r.t. p_l is its negative).
double collision_term(const Eigen::Vector3d& p_i, const Eigen::Vector3d& p_l,
                      const CollisionParams& cp, Eigen::Vector3d* grad) {
  const Eigen::Vector3d d = p_i - p_l;
  const double a = hinge(d.z() + cp.vertical_margin);
  const double b = hinge(cp.vertical_margin - d.z());
  const double h =
      hinge(cp.safety_radius * cp.safety_radius - d.x() * d.x() - d.y() * d.y());
  const double value = a * b * h;
  if (grad != nullptr && value > 0.0) {
    *grad = {-2.0 * d.x() * a * b, -2.0 * d.y() * a * b, (b - a) * h};
  }
  return value;
}

}  // namespace

void CostWeights::validate() const {
  auto nonneg = [](double w) { return w >= 0.0; };
  if (!std::all_of(state.begin(), state.end(), nonneg) ||
      !std::all_of(input.begin(), input.end(), nonneg) ||
      !std::all_of(input_rate.begin(), input_rate.end(), nonneg)) {
    throw std::invalid_argument("CostWeights: weights must be non-negative");
  }
}

void CylinderObstacle::validate() const {
  if (!(radius > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("CylinderObstacle: radius and height must be positive");
  }
}

void CollisionParams::validate() const {
  if (!(safety_radius > 0.0) || !(vertical_margin > 0.0)) {
    throw std::invalid_argument("CollisionParams: radius and margin must be positive");
  }
}

void RateLimits::validate() const {
  if (!(max_delta_phi > 0.0) || !(max_delta_theta > 0.0)) {
    throw std::invalid_argument("RateLimits: limits must be positive");
  }
}

void ProblemInstance::validate() const {
  if (initial.empty()) {
    throw std::invalid_argument("ProblemInstance: fleet is empty");
  }
  if (prev_input.size() != initial.size() || references.size() != initial.size()) {
    throw std::invalid_argument(
        "ProblemInstance: prev_input and references must have one entry per agent");
  }
  if (horizon == 0) {
    throw std::invalid_argument("ProblemInstance: horizon must be at least 1");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("ProblemInstance: dt must be positive");
  }
  for (const auto& obs : obstacles) {
    obs.validate();
  }
  weights.validate();
  collision.validate();
  rates.validate();
  params.validate();
}

double cylinder_violation(const Eigen::Vector3d& p, const CylinderObstacle& obs) {
  return cylinder_term(p, obs, nullptr);
}

double collision_violation(const Eigen::Vector3d& p_i, const Eigen::Vector3d& p_l,
                           const CollisionParams& cp) {
  return collision_term(p_i, p_l, cp, nullptr);
}

Eigen::VectorXd rate_violations(const Eigen::VectorXd& z,
                                const std::vector<ControlInput>& prev_input,
                                const RateLimits& limits) {
  const std::size_t agents = prev_input.size();
  if (agents == 0 || z.size() % static_cast<Eigen::Index>(kInputDim * agents) != 0) {
    throw std::invalid_argument("rate_violations: decision vector does not match agent count");
  }
  const HorizonLayout layout{agents, static_cast<std::size_t>(z.size()) / (kInputDim * agents)};
  layout.check(z);

  Eigen::VectorXd out(4 * layout.horizon * agents);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < agents; ++i) {
    ControlInput last = prev_input[i];
    for (std::size_t j = 0; j < layout.horizon; ++j) {
      const ControlInput u = layout.input(z, i, j);
      const double dphi = u.phi_ref - last.phi_ref;
      const double dtheta = u.theta_ref - last.theta_ref;
      out(k++) = hinge(-dphi - limits.max_delta_phi);
      out(k++) = hinge(dphi - limits.max_delta_phi);
      out(k++) = hinge(-dtheta - limits.max_delta_theta);
      out(k++) = hinge(dtheta - limits.max_delta_theta);
      last = u;
    }
  }
  return out;
}

std::size_t constraint_count(std::size_t agents, std::size_t horizon, std::size_t obstacles) {
  return agents * horizon * obstacles + horizon * agents * (agents - 1) / 2 +
         4 * horizon * agents;
}

Eigen::VectorXd assemble_constraints(const Eigen::VectorXd& z, const ProblemInstance& inst) {
  CostEvaluator eval(inst);
  Eigen::VectorXd out;
  eval.constraints(z, out);
  return out;
}

double total_cost(const Eigen::VectorXd& z, const ProblemInstance& inst) {
  CostEvaluator eval(inst);
  return eval.evaluate(z, 0.0, nullptr);
}

Eigen::VectorXd cost_gradient(const Eigen::VectorXd& z, const ProblemInstance& inst) {
  CostEvaluator eval(inst);
  Eigen::VectorXd grad;
  eval.evaluate(z, 0.0, &grad);
  return grad;
}

std::pair<double, Eigen::VectorXd> penalized_cost_and_gradient(const Eigen::VectorXd& z,
                                                               const ProblemInstance& inst,
                                                               double c) {
  if (c < 0.0) {
    throw std::invalid_argument("penalty weight must be non-negative");
  }
  CostEvaluator eval(inst);
  Eigen::VectorXd grad;
  const double value = eval.evaluate(z, c, &grad);
  return {value, std::move(grad)};
}

CostEvaluator::CostEvaluator(const ProblemInstance& inst) : inst_(inst), layout_(inst.layout()) {
  inst_.validate();
  const std::size_t slots = (inst_.horizon + 1) * inst_.agent_count();
  traj_.resize(slots);
  direct_.resize(slots);
  xref_.reserve(inst_.agent_count());
  for (const auto& r : inst_.references) {
    xref_.push_back(r.to_vector());
  }
}

void CostEvaluator::simulate(const Eigen::VectorXd& z) {
  const std::size_t na = inst_.agent_count();
  for (std::size_t i = 0; i < na; ++i) {
    traj_[i] = inst_.initial[i].to_vector();
    for (std::size_t j = 0; j < inst_.horizon; ++j) {
      traj_[(j + 1) * na + i] =
          discrete_step(traj_[j * na + i], layout_.input(z, i, j), inst_.params, inst_.dt);
    }
  }
}

double CostEvaluator::evaluate(const Eigen::VectorXd& z, double penalty, Eigen::VectorXd* grad) {
  layout_.check(z);
  simulate(z);

  const std::size_t na = inst_.agent_count();
  const std::size_t n = inst_.horizon;
  const auto& w = inst_.weights;
  const bool want_grad = grad != nullptr;
  if (want_grad) {
    grad->setZero(static_cast<Eigen::Index>(layout_.size()));
    for (auto& d : direct_) {
      d.setZero();
    }
  }

  double value = 0.0;

  // State tracking, steps 1..N.
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t i = 0; i < na; ++i) {
      const StateVector e = traj_[j * na + i] - xref_[i];
      for (std::size_t k = 0; k < kStateDim; ++k) {
        value += w.state[k] * e(k) * e(k);
        if (want_grad) {
          direct_[j * na + i](k) += 2.0 * w.state[k] * e(k);
        }
      }
    }
  }

  if (penalty > 0.0) {
    Eigen::Vector3d g;
    Eigen::Vector3d* gp = want_grad ? &g : nullptr;
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < na; ++i) {
        const Eigen::Vector3d p = traj_[j * na + i].head<3>();
        for (const auto& obs : inst_.obstacles) {
          const double f = cylinder_term(p, obs, gp);
          if (f > 0.0) {
            value += penalty * f * f;
            if (want_grad) {
              direct_[j * na + i].head<3>() += 2.0 * penalty * f * g;
            }
          }
        }
      }
      for (std::size_t i = 0; i < na; ++i) {
        const Eigen::Vector3d pi = traj_[j * na + i].head<3>();
        for (std::size_t l = i + 1; l < na; ++l) {
          const Eigen::Vector3d pl = traj_[j * na + l].head<3>();
          const double f = collision_term(pi, pl, inst_.collision, gp);
          if (f > 0.0) {
            value += penalty * f * f;
            if (want_grad) {
              const Eigen::Vector3d dg = 2.0 * penalty * f * g;
              direct_[j * na + i].head<3>() += dg;
              direct_[j * na + l].head<3>() -= dg;
            }
          }
        }
      }
    }
  }

  // Input tracking, smoothness and rate-limit hinges act on z directly.
  const double rate_max[2] = {inst_.rates.max_delta_phi, inst_.rates.max_delta_theta};
  for (std::size_t i = 0; i < na; ++i) {
    const ControlInput& prev = inst_.prev_input[i];
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t off = layout_.offset(i, j);
      const double u[3] = {z(off), z(off + 1), z(off + 2)};
      const double ur[3] = {inst_.input_ref.thrust, inst_.input_ref.phi_ref,
                            inst_.input_ref.theta_ref};
      double last[3];
      if (j == 0) {
        last[0] = prev.thrust;
        last[1] = prev.phi_ref;
        last[2] = prev.theta_ref;
      } else {
        for (std::size_t k = 0; k < kInputDim; ++k) {
          last[k] = z(off - kInputDim + k);
        }
      }
      for (std::size_t k = 0; k < kInputDim; ++k) {
        const double e = u[k] - ur[k];
        const double du = u[k] - last[k];
        value += w.input[k] * e * e + w.input_rate[k] * du * du;
        if (want_grad) {
          (*grad)(off + k) += 2.0 * w.input[k] * e + 2.0 * w.input_rate[k] * du;
          if (j > 0) {
            (*grad)(off - kInputDim + k) -= 2.0 * w.input_rate[k] * du;
          }
        }
      }
      if (penalty > 0.0) {
        for (std::size_t k = 1; k < kInputDim; ++k) {
          const double du = u[k] - last[k];
          const double dec = hinge(-du - rate_max[k - 1]);
          const double inc = hinge(du - rate_max[k - 1]);
          value += penalty * (dec * dec + inc * inc);
          if (want_grad) {
            const double d = 2.0 * penalty * (inc - dec);
            (*grad)(off + k) += d;
            if (j > 0) {
              (*grad)(off - kInputDim + k) -= d;
            }
          }
        }
      }
    }
  }

  if (!want_grad) {
    return value;
  }

  // Reverse sweep through the Euler recursion.
  const ModelParams& mp = inst_.params;
  const double dt = inst_.dt;
  for (std::size_t i = 0; i < na; ++i) {
    StateVector lambda = StateVector::Zero();
    for (std::size_t j = n; j >= 1; --j) {
      // lambda_j = direct_j + A_j^T lambda_{j+1}, A_j = I + dt f_x(x_j, u_j).
      StateVector next = direct_[j * na + i];
      if (j < n) {
        const StateVector& x = traj_[j * na + i];
        const ControlInput u = layout_.input(z, i, j);
        const double sp = std::sin(x(6)), cp = std::cos(x(6));
        const double st = std::sin(x(7)), ct = std::cos(x(7));
        const double t = u.thrust;
        const double lvx = lambda(3), lvy = lambda(4), lvz = lambda(5);
        StateVector fx_t_lambda;
        fx_t_lambda.head<3>().setZero();
        fx_t_lambda(3) = lambda(0) - mp.damp_x * lvx;
        fx_t_lambda(4) = lambda(1) - mp.damp_y * lvy;
        fx_t_lambda(5) = lambda(2) - mp.damp_z * lvz;
        fx_t_lambda(6) = lvx * (-t * st * sp) + lvy * (-t * cp) + lvz * (-t * ct * sp) -
                         lambda(6) / mp.tau_phi;
        fx_t_lambda(7) = lvx * (t * ct * cp) + lvz * (-t * st * cp) - lambda(7) / mp.tau_theta;
        next += lambda + dt * fx_t_lambda;
      }
      lambda = next;

      // dPhi/du_{j-1} += dt f_u(x_{j-1}, u_{j-1})^T lambda_j.
      const StateVector& xp = traj_[(j - 1) * na + i];
      const Eigen::Vector3d dir = thrust_direction(xp(6), xp(7));
      const std::size_t off = layout_.offset(i, j - 1);
      (*grad)(off) += dt * dir.dot(lambda.segment<3>(3));
      (*grad)(off + 1) += dt * lambda(6) * mp.k_phi / mp.tau_phi;
      (*grad)(off + 2) += dt * lambda(7) * mp.k_theta / mp.tau_theta;
    }
  }
  return value;
}

void CostEvaluator::constraints(const Eigen::VectorXd& z, Eigen::VectorXd& out) {
  layout_.check(z);
  simulate(z);
  const std::size_t na = inst_.agent_count();
  const std::size_t n = inst_.horizon;
  const std::size_t no = inst_.obstacles.size();
  out.resize(static_cast<Eigen::Index>(constraint_count(na, n, no)));

  Eigen::Index k = 0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const Eigen::Vector3d p = traj_[j * na + i].head<3>();
      for (const auto& obs : inst_.obstacles) {
        out(k++) = cylinder_violation(p, obs);
      }
    }
  }
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t l = i + 1; l < na; ++l) {
      for (std::size_t j = 1; j <= n; ++j) {
        out(k++) = collision_violation(traj_[j * na + i].head<3>(), traj_[j * na + l].head<3>(),
                                       inst_.collision);
      }
    }
  }
  out.tail(static_cast<Eigen::Index>(4 * n * na)) =
      rate_violations(z, inst_.prev_input, inst_.rates);
}

double CostEvaluator::max_violation(const Eigen::VectorXd& z) {
  Eigen::VectorXd f;
  constraints(z, f);
  return f.size() == 0 ? 0.0 : f.lpNorm<Eigen::Infinity>();
}

}  // namespace cnmpc
