#include "soebm/evaluation.hpp"

#include <algorithm>

#include "soebm/error.hpp"

namespace soebm {

EvalReport eval_task_loss(const EnergyModel& model, const Dataset& test, const SolveConfig& solve,
                          std::uint64_t seed) {
  model.validate();
  const Task& task = *model.task;
  const SolveConfig true_solve = SolveConfig::preprocessing();
  EvalReport report;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto fwd = forward_eval(model.params, test.x[i]);
    RngStream stream(seed, {0, static_cast<std::uint32_t>(i), StreamPurpose::kEval});
    const SolveResult decision =
        argmin_expected_cost(task, fwd.prediction, solve, model.expectation, &stream);

    ExampleMetrics ex;
    ex.decision = decision.decision;
    ex.status = decision.status;
    ex.task_loss = task.cost(test.y[i], decision.decision);
    ex.nll = gaussian_nll(fwd.prediction, test.y[i]).loss;

    // The solve from y is the reference. When the model's decision does better
    // (the true cost is nonsmooth, so that solve can stop early), a second
    // solve warm-started at the decision keeps the regret non-negative.
    const Vector& y = test.y[i];
    const SolveResult from_label = argmin_true_cost(task, y, true_solve);
    ex.optimal_cost = from_label.cost;
    if (ex.task_loss < from_label.cost) {
      const SolveResult from_decision = projected_gradient(
          [&](const Vector& a, Vector& grad) {
            grad = task.cost_grad_a(y, a);
            return task.cost(y, a);
          },
          [&](const Vector& a) { return task.project(a); }, decision.decision, true_solve);
      ex.optimal_cost = std::min(from_label.cost, from_decision.cost);
    }
    ex.regret = ex.task_loss - ex.optimal_cost;

    if (decision.status == SolveStatus::kIterationCap) {
      ++report.flagged;
    } else {
      report.mean_task_loss += ex.task_loss;
      report.mean_regret += ex.regret;
      report.mean_nll += ex.nll;
      ++counted;
    }
    report.examples.push_back(std::move(ex));
  }
  if (counted > 0) {
    report.mean_task_loss /= static_cast<double>(counted);
    report.mean_regret /= static_cast<double>(counted);
    report.mean_nll /= static_cast<double>(counted);
  }
  return report;
}

}  // namespace soebm
