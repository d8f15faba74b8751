#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "soebm/task.hpp"

namespace soebm {

struct SolveConfig {
  std::size_t max_iterations = 5000;
  double step_size = 0.1;
  double backoff = 0.5;
  /// Stop when ||a - P(a - grad)|| falls below this.
  double tolerance = 1e-7;
  /// Extra starts drawn uniformly from the task's decision box.
  std::size_t restarts = 0;
  double armijo = 1e-4;
  double min_step = 1e-14;

  void validate() const;

  static SolveConfig preprocessing() { return {}; }
  static SolveConfig inference() {
    SolveConfig cfg;
    cfg.tolerance = 1e-5;
    return cfg;
  }
};

enum class SolveStatus {
  kConverged,
  /// Backtracking could not find a decrease; typical at a kink of a
  /// nonsmooth cost, where the point is already optimal.
  kStalled,
  kIterationCap,
};

std::string to_string(SolveStatus status);

struct SolveResult {
  Vector decision;
  double cost = 0.0;
  SolveStatus status = SolveStatus::kConverged;
  std::size_t iterations = 0;
  double projected_grad_norm = 0.0;
};

/// Value and (sub)gradient at a point.
using Objective = std::function<double(const Vector& a, Vector& grad)>;
using Projector = std::function<Vector(const Vector& a)>;

/// Projected gradient descent with Armijo backtracking from `start`
/// (projected first). Accepted steps never increase the objective. Throws
/// NumericalError on non-finite values or sustained increase.
SolveResult projected_gradient(const Objective& objective, const Projector& project,
                               const Vector& start, const SolveConfig& cfg);

/// argmin_{a feasible} f(y, a), started at y.
SolveResult argmin_true_cost(const Task& task, const Vector& y, const SolveConfig& cfg);

/// argmin_{a feasible} E_{y ~ pred} f(y, a), started at mu. Without a closed
/// form, one fixed set of draws (common random numbers) is used throughout.
SolveResult argmin_expected_cost(const Task& task, const GaussianPrediction& pred,
                                 const SolveConfig& cfg, const ExpectationConfig& expectation = {},
                                 RngStream* stream = nullptr);

enum class OracleObjective { kTrueCost, kExpectedCost };

struct OracleTarget {
  OracleObjective objective = OracleObjective::kTrueCost;
  Vector y;
  GaussianPrediction pred;

  static OracleTarget true_cost(Vector y) { return {OracleObjective::kTrueCost, std::move(y), {}}; }
  static OracleTarget expected_cost(GaussianPrediction pred) {
    return {OracleObjective::kExpectedCost, {}, std::move(pred)};
  }
  double evaluate(const Task& task, const Vector& a) const;
};

struct GridResult {
  Vector decision;
  double value = 0.0;
};

/// Brute-force minimizer over a regular grid with the given spacing. Uses a
/// per-coordinate search for separable tasks when the result is feasible,
/// otherwise a full feasible grid when d <= 2; UnsupportedError beyond that.
GridResult grid_oracle(const Task& task, const OracleTarget& target, const Box& bounds,
                       double resolution);

}  // namespace soebm
