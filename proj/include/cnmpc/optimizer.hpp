#pragma once

#include "cnmpc/problem.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

namespace cnmpc {

/// Rectangle Z = {z : lower <= z <= upper}.
struct BoxSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Repeats the per-input bounds for every (agent, step) triple.
  static BoxSet replicated(const ControlInput& lo, const ControlInput& hi, std::size_t triples);

  std::size_t size() const { return static_cast<std::size_t>(lower.size()); }
  void validate() const;
};

Eigen::VectorXd project_box(const Eigen::VectorXd& z, const BoxSet& box);

enum class SolverStatus { converged, iteration_capped, not_finite };

std::string_view to_string(SolverStatus status);

enum class StepEstimate {
  /// gamma = 0.95 / L with L from a gradient difference at the start point.
  gradient_difference,
  /// gamma starts at 1 and is only reduced by backtracking.
  unit,
};

struct InnerSolverConfig {
  /// Bound on |z - proj(z - gamma * grad f(z))|_inf.
  double tolerance = 1e-3;
  std::size_t max_iterations = 500;
  /// 0 turns the method into plain projected gradient.
  std::size_t lbfgs_memory = 10;
  StepEstimate initial_step = StepEstimate::gradient_difference;

  void validate() const;
};

/// Smooth objective: returns f(z) and writes grad f(z) when `grad` is set.
using SmoothObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct InnerResult {
  Eigen::VectorXd solution;
  double residual = 0.0;
  double step = 0.0;
  std::size_t iterations = 0;
  SolverStatus status = SolverStatus::iteration_capped;
};

/// PANOC over a box: forward-backward steps accelerated by L-BFGS
/// directions, globalized by a line search on the forward-backward
/// envelope. The workspace is reused between solves.
class PanocSolver {
 public:
  explicit PanocSolver(InnerSolverConfig cfg = {});

  const InnerSolverConfig& config() const { return cfg_; }

  InnerResult solve(const SmoothObjective& f, const BoxSet& box, const Eigen::VectorXd& z0);

  struct EnvelopeSample {
    double step;
    double value;
  };

  /// Records the step size and envelope value at every iterate of later
  /// solves (cleared at the start of each solve).
  void record_envelope(bool on) { record_envelope_ = on; }
  const std::vector<EnvelopeSample>& envelope_trace() const { return envelope_trace_; }

 private:
  struct Pair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
  };

  void lbfgs_reset();
  void lbfgs_update(const Eigen::VectorXd& s, const Eigen::VectorXd& y);
  void lbfgs_apply(const Eigen::VectorXd& q, Eigen::VectorXd& out);

  InnerSolverConfig cfg_;
  std::deque<Pair> memory_;
  std::vector<double> alpha_;
  bool record_envelope_ = false;
  std::vector<EnvelopeSample> envelope_trace_;
};

InnerResult inner_solve(const SmoothObjective& f, const BoxSet& box, const Eigen::VectorXd& z0,
                        const InnerSolverConfig& cfg);

enum class PenaltyMode { fixed_count, tolerance_driven };

struct PenaltyConfig {
  double initial_weight = 10.0;
  double update_factor = 10.0;
  /// Number of rounds in fixed-count mode; upper bound otherwise.
  std::size_t outer_iterations = 4;
  double infeasibility_tolerance = 1e-3;
  PenaltyMode mode = PenaltyMode::fixed_count;

  void validate() const;
};

struct SolveResult {
  Eigen::VectorXd solution;
  std::size_t inner_iterations_total = 0;
  std::size_t outer_iterations = 0;
  double fixed_point_residual = 0.0;
  double max_infeasibility = 0.0;
  double wall_time = 0.0;
  SolverStatus status = SolverStatus::converged;
};

/// Problem handed to the penalty loop: l(z) + c |F(z)|^2 and |F(z)|_inf.
class PenalizedProblem {
 public:
  virtual ~PenalizedProblem() = default;
  virtual double value(const Eigen::VectorXd& z, double penalty, Eigen::VectorXd* grad) = 0;
  virtual double infeasibility(const Eigen::VectorXd& z) = 0;
};

/// Quadratic penalty loop around PANOC. Each round multiplies the weight
/// by `update_factor` and warm-starts from the previous round. In
/// fixed-count mode the loop ends early only once F vanishes exactly,
/// since further rounds cannot move a stationary feasible point.
SolveResult penalty_solve(PenalizedProblem& problem, const Eigen::VectorXd& z0,
                          const BoxSet& box, const PenaltyConfig& pcfg, PanocSolver& inner);

SolveResult penalty_solve(const ProblemInstance& inst, const Eigen::VectorXd& z0,
                          const BoxSet& box, const PenaltyConfig& pcfg,
                          const InnerSolverConfig& icfg);

/// Adapter exposing a CostEvaluator to the penalty loop.
class NmpcPenalizedProblem final : public PenalizedProblem {
 public:
  explicit NmpcPenalizedProblem(const ProblemInstance& inst) : eval_(inst) {}
  double value(const Eigen::VectorXd& z, double penalty, Eigen::VectorXd* grad) override {
    return eval_.evaluate(z, penalty, grad);
  }
  double infeasibility(const Eigen::VectorXd& z) override { return eval_.max_violation(z); }
  CostEvaluator& evaluator() { return eval_; }

 private:
  CostEvaluator eval_;
};

}  // namespace cnmpc
