#pragma once

#include <vector>

#include "soebm/dataset.hpp"
#include "soebm/ebm.hpp"
#include "soebm/solver.hpp"

namespace soebm {

struct ExampleMetrics {
  double task_loss = 0.0;  // f(y, a_model)
  double optimal_cost = 0.0;
  double regret = 0.0;
  double nll = 0.0;
  SolveStatus status = SolveStatus::kConverged;
  Vector decision;
};

struct EvalReport {
  std::vector<ExampleMetrics> examples;
  double mean_task_loss = 0.0;
  double mean_regret = 0.0;
  double mean_nll = 0.0;
  std::size_t flagged = 0;  // solves that hit the iteration cap, excluded from means
};

/// For each (x, y): decide a = argmin E_{p(y|x)} f(y, a), then score f(y, a)
/// and its regret against the best true-cost decision for y.
EvalReport eval_task_loss(const EnergyModel& model, const Dataset& test, const SolveConfig& solve,
                          std::uint64_t seed = 0);

}  // namespace soebm
