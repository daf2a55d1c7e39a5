#include "cnmpc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cnmpc {
namespace {

constexpr double kGammaLipschitzRatio = 0.95;
constexpr double kMinLipschitz = 1e-8;
constexpr double kProbeRelative = 1e-6;
constexpr double kProbeAbsolute = 1e-6;
constexpr std::size_t kMaxLipschitzUpdates = 30;
constexpr std::size_t kMaxLineSearch = 10;
constexpr double kCurvatureEpsilon = 1e-10;

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

BoxSet BoxSet::replicated(const ControlInput& lo, const ControlInput& hi, std::size_t triples) {
  BoxSet box;
  box.lower.resize(static_cast<Eigen::Index>(kInputDim * triples));
  box.upper.resize(box.lower.size());
  for (std::size_t t = 0; t < triples; ++t) {
    const auto k = static_cast<Eigen::Index>(kInputDim * t);
    box.lower.segment<3>(k) << lo.thrust, lo.phi_ref, lo.theta_ref;
    box.upper.segment<3>(k) << hi.thrust, hi.phi_ref, hi.theta_ref;
  }
  return box;
}

void BoxSet::validate() const {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("BoxSet: lower and upper bounds differ in length");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("BoxSet: lower bound exceeds upper bound");
  }
}

Eigen::VectorXd project_box(const Eigen::VectorXd& z, const BoxSet& box) {
  if (z.size() != box.lower.size() || z.size() != box.upper.size()) {
    throw std::invalid_argument("project_box: length mismatch");
  }
  return z.cwiseMax(box.lower).cwiseMin(box.upper);
}

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged:
      return "converged";
    case SolverStatus::iteration_capped:
      return "iteration_capped";
    case SolverStatus::not_finite:
      return "not_finite";
  }
  return "unknown";
}

void InnerSolverConfig::validate() const {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("InnerSolverConfig: tolerance must be positive");
  }
  if (max_iterations == 0) {
    throw std::invalid_argument("InnerSolverConfig: max_iterations must be at least 1");
  }
}

PanocSolver::PanocSolver(InnerSolverConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void PanocSolver::lbfgs_reset() { memory_.clear(); }

void PanocSolver::lbfgs_update(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  if (cfg_.lbfgs_memory == 0) {
    return;
  }
  const double sy = s.dot(y);
  const double ss = s.squaredNorm();
  if (!(sy > kCurvatureEpsilon * ss) || !std::isfinite(sy)) {
    return;
  }
  if (memory_.size() == cfg_.lbfgs_memory) {
    memory_.pop_back();
  }
  memory_.push_front({s, y, 1.0 / sy});
}

// Two-loop recursion, newest pair first.
void PanocSolver::lbfgs_apply(const Eigen::VectorXd& q, Eigen::VectorXd& out) {
  out = q;
  alpha_.resize(memory_.size());
  for (std::size_t k = 0; k < memory_.size(); ++k) {
    alpha_[k] = memory_[k].rho * memory_[k].s.dot(out);
    out -= alpha_[k] * memory_[k].y;
  }
  const Pair& newest = memory_.front();
  out *= newest.s.dot(newest.y) / newest.y.squaredNorm();
  for (std::size_t k = memory_.size(); k-- > 0;) {
    const double beta = memory_[k].rho * memory_[k].y.dot(out);
    out += (alpha_[k] - beta) * memory_[k].s;
  }
}

InnerResult PanocSolver::solve(const SmoothObjective& f, const BoxSet& box,
                               const Eigen::VectorXd& z0) {
  box.validate();
  if (z0.size() != box.lower.size()) {
    throw std::invalid_argument("inner_solve: start point does not match the box");
  }
  lbfgs_reset();
  envelope_trace_.clear();

  InnerResult result;
  Eigen::VectorXd u = project_box(z0, box);
  Eigen::VectorXd grad(u.size());
  double cost = f(u, &grad);
  if (!std::isfinite(cost) || !all_finite(grad)) {
    result.solution = u;
    result.status = SolverStatus::not_finite;
    return result;
  }

  double gamma = 1.0;
  if (cfg_.initial_step == StepEstimate::gradient_difference) {
    const Eigen::VectorXd h =
        (kProbeRelative * u.cwiseAbs()).cwiseMax(kProbeAbsolute);
    Eigen::VectorXd grad_probe(u.size());
    f(u + h, &grad_probe);
    double lipschitz = (grad_probe - grad).norm() / h.norm();
    if (!std::isfinite(lipschitz) || lipschitz < kMinLipschitz) {
      lipschitz = kMinLipschitz;
    }
    gamma = kGammaLipschitzRatio / lipschitz;
  }
  double sigma = (1.0 - kGammaLipschitzRatio) / (4.0 * gamma);

  Eigen::VectorXd half = project_box(u - gamma * grad, box);
  Eigen::VectorXd fpr = u - half;
  Eigen::VectorXd u_prev, fpr_prev, direction, u_plus, grad_plus(u.size()), half_plus,
      fpr_plus;
  bool have_prev = false;

  auto abort_not_finite = [&](std::size_t it) {
    result.solution = project_box(u, box);
    result.iterations = it;
    result.step = gamma;
    result.residual = fpr.lpNorm<Eigen::Infinity>();
    result.status = SolverStatus::not_finite;
    return result;
  };

  for (std::size_t it = 0; it < cfg_.max_iterations; ++it) {
    // Stopping test, confirmed at the feasible point that would be returned.
    if (fpr.lpNorm<Eigen::Infinity>() <= cfg_.tolerance) {
      const double cost_half = f(half, &grad_plus);
      if (!std::isfinite(cost_half) || !all_finite(grad_plus)) {
        return abort_not_finite(it);
      }
      half_plus = project_box(half - gamma * grad_plus, box);
      const double res_half = (half - half_plus).lpNorm<Eigen::Infinity>();
      if (res_half <= cfg_.tolerance) {
        result.solution = half;
        result.residual = res_half;
        result.iterations = it;
        result.step = gamma;
        result.status = SolverStatus::converged;
        return result;
      }
      u = half;
      cost = cost_half;
      grad = grad_plus;
      half = half_plus;
      fpr = u - half;
      have_prev = false;
      lbfgs_reset();
      continue;
    }

    // Backtrack gamma until the quadratic upper bound holds at the half step.
    bool gamma_changed = false;
    double cost_half = f(half, nullptr);
    for (std::size_t k = 0; k < kMaxLipschitzUpdates; ++k) {
      const double bound = cost + 1e-6 * std::abs(cost) - grad.dot(fpr) +
                           kGammaLipschitzRatio / (2.0 * gamma) * fpr.squaredNorm();
      if (cost_half <= bound) {
        break;
      }
      gamma *= 0.5;
      sigma *= 2.0;
      gamma_changed = true;
      half = project_box(u - gamma * grad, box);
      fpr = u - half;
      cost_half = f(half, nullptr);
    }
    if (gamma_changed) {
      lbfgs_reset();
      have_prev = false;
    }

    if (have_prev) {
      lbfgs_update(u - u_prev, fpr - fpr_prev);
    }
    u_prev = u;
    fpr_prev = fpr;
    have_prev = true;

    const double fbe = cost - grad.dot(fpr) + fpr.squaredNorm() / (2.0 * gamma);
    if (record_envelope_) {
      envelope_trace_.push_back({gamma, fbe});
    }
    const double target = fbe - sigma * fpr.squaredNorm();

    bool accepted = false;
    if (!memory_.empty()) {
      lbfgs_apply(fpr, direction);
      double tau = 1.0;
      for (std::size_t ls = 0; ls < kMaxLineSearch; ++ls, tau *= 0.5) {
        u_plus = u - (1.0 - tau) * fpr - tau * direction;
        const double cost_plus = f(u_plus, &grad_plus);
        if (!std::isfinite(cost_plus) || !all_finite(grad_plus)) {
          continue;
        }
        half_plus = project_box(u_plus - gamma * grad_plus, box);
        fpr_plus = u_plus - half_plus;
        const double fbe_plus =
            cost_plus - grad_plus.dot(fpr_plus) + fpr_plus.squaredNorm() / (2.0 * gamma);
        if (fbe_plus <= target) {
          u = u_plus;
          cost = cost_plus;
          grad = grad_plus;
          half = half_plus;
          fpr = fpr_plus;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      // Plain projected-gradient step.
      u = half;
      cost = f(u, &grad);
      if (!std::isfinite(cost) || !all_finite(grad)) {
        return abort_not_finite(it + 1);
      }
      half = project_box(u - gamma * grad, box);
      fpr = u - half;
    }
  }

  result.solution = half;
  result.residual = fpr.lpNorm<Eigen::Infinity>();
  result.iterations = cfg_.max_iterations;
  result.step = gamma;
  result.status = SolverStatus::iteration_capped;
  return result;
}

InnerResult inner_solve(const SmoothObjective& f, const BoxSet& box, const Eigen::VectorXd& z0,
                        const InnerSolverConfig& cfg) {
  PanocSolver solver(cfg);
  return solver.solve(f, box, z0);
}

}  // namespace cnmpc
