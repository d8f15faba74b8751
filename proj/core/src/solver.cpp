#include "soebm/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "soebm/error.hpp"

namespace soebm {

void SolveConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("solver: max_iterations must be at least 1");
  if (!(tolerance > 0.0)) throw ConfigError("solver: tolerance must be positive");
  if (!(step_size > 0.0)) throw ConfigError("solver: step_size must be positive");
  if (!(backoff > 0.0 && backoff < 1.0)) throw ConfigError("solver: backoff must be in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw ConfigError("solver: armijo must be in (0, 1)");
  if (!(min_step > 0.0)) throw ConfigError("solver: min_step must be positive");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kStalled:
      return "stalled";
    case SolveStatus::kIterationCap:
      return "iteration_cap";
  }
  return "unknown";
}

SolveResult projected_gradient(const Objective& objective, const Projector& project,
                               const Vector& start, const SolveConfig& cfg) {
  cfg.validate();
  constexpr int kMaxIncreases = 10;

  SolveResult result;
  Vector x = project(start);
  Vector grad(x.size());
  double fx = objective(x, grad);
  if (!std::isfinite(fx) || !grad.allFinite()) {
    throw NumericalError("solver: non-finite objective at the starting point");
  }

  int increases = 0;
  Vector candidate_grad(x.size());
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    result.iterations = it;
    result.projected_grad_norm = (x - project(x - grad)).norm();
    if (result.projected_grad_norm <= cfg.tolerance) {
      result.status = SolveStatus::kConverged;
      result.decision = std::move(x);
      result.cost = fx;
      return result;
    }

    double step = cfg.step_size;
    bool accepted = false;
    while (step >= cfg.min_step) {
      Vector candidate = project(x - step * grad);
      const double decrease_bound = cfg.armijo * grad.dot(candidate - x);
      const double fc = objective(candidate, candidate_grad);
      if (!std::isfinite(fc)) {
        std::ostringstream msg;
        msg << "solver: non-finite objective at iteration " << it << " (step " << step << ")";
        throw NumericalError(msg.str());
      }
      if (fc <= fx + decrease_bound && (candidate - x).squaredNorm() > 0.0) {
        increases = fc > fx ? increases + 1 : 0;
        if (increases >= kMaxIncreases) {
          throw NumericalError("solver: objective increased for 10 consecutive steps");
        }
        x = std::move(candidate);
        grad = candidate_grad;
        fx = fc;
        accepted = true;
        break;
      }
      step *= cfg.backoff;
    }
    if (!accepted) {
      result.status = SolveStatus::kStalled;
      result.decision = std::move(x);
      result.cost = fx;
      return result;
    }
  }
  result.iterations = cfg.max_iterations;
  result.projected_grad_norm = (x - project(x - grad)).norm();
  result.status = result.projected_grad_norm <= cfg.tolerance ? SolveStatus::kConverged
                                                              : SolveStatus::kIterationCap;
  result.decision = std::move(x);
  result.cost = fx;
  return result;
}

SolveResult argmin_true_cost(const Task& task, const Vector& y, const SolveConfig& cfg) {
  if (!y.allFinite()) throw DomainError("argmin_true_cost: non-finite label");
  Objective objective = [&](const Vector& a, Vector& grad) {
    grad = task.cost_grad_a(y, a);
    return task.cost(y, a);
  };
  Projector project = [&](const Vector& a) { return task.project(a); };
  return projected_gradient(objective, project, y, cfg);
}

SolveResult argmin_expected_cost(const Task& task, const GaussianPrediction& pred,
                                 const SolveConfig& cfg, const ExpectationConfig& expectation,
                                 RngStream* stream) {
  Objective objective;
  Matrix eps;
  if (expectation.mode == ExpectationMode::kClosedForm && task.has_closed_form()) {
    objective = [&](const Vector& a, Vector& grad) {
      auto ec = task.closed_form_expected_cost(pred, a);
      grad = std::move(ec.grad_a);
      return ec.value;
    };
  } else {
    if (stream == nullptr) throw ConfigError("argmin_expected_cost: Monte Carlo mode needs a stream");
    if (expectation.mc_samples < 1) throw ConfigError("argmin_expected_cost: mc_samples must be >= 1");
    eps.resize(static_cast<Eigen::Index>(expectation.mc_samples),
               static_cast<Eigen::Index>(task.label_dim()));
    for (Eigen::Index s = 0; s < eps.rows(); ++s) {
      for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(s, j) = stream->normal();
    }
    objective = [&](const Vector& a, Vector& grad) {
      auto ec = mc_expected_cost(task, pred, a, eps);
      grad = std::move(ec.grad_a);
      return ec.value;
    };
  }
  Projector project = [&](const Vector& a) { return task.project(a); };

  SolveResult best = projected_gradient(objective, project, pred.mu, cfg);
  if (cfg.restarts > 0) {
    if (stream == nullptr) throw ConfigError("argmin_expected_cost: restarts need a stream");
    const Box box = task.decision_box(pred);
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
      Vector start(box.lower.size());
      for (Eigen::Index i = 0; i < start.size(); ++i) {
        start(i) = box.lower(i) + (box.upper(i) - box.lower(i)) * stream->uniform();
      }
      SolveResult candidate = projected_gradient(objective, project, start, cfg);
      if (candidate.cost < best.cost) best = std::move(candidate);
    }
  }
  return best;
}

double OracleTarget::evaluate(const Task& task, const Vector& a) const {
  if (objective == OracleObjective::kTrueCost) return task.cost(y, a);
  if (!task.has_closed_form()) {
    throw UnsupportedError("grid_oracle: expected-cost target needs a closed form");
  }
  return task.closed_form_expected_cost(pred, a).value;
}

namespace {

std::vector<double> axis_points(double lo, double hi, double resolution) {
  if (!(hi >= lo)) throw DomainError("grid_oracle: empty bounds");
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / resolution + 1e-9));
  std::vector<double> pts;
  pts.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) pts.push_back(lo + static_cast<double>(k) * resolution);
  return pts;
}

}  // namespace

GridResult grid_oracle(const Task& task, const OracleTarget& target, const Box& bounds,
                       double resolution) {
  if (!(resolution > 0.0)) throw DomainError("grid_oracle: resolution must be positive");
  const auto d = bounds.lower.size();
  if (d != static_cast<Eigen::Index>(task.decision_dim()) || bounds.upper.size() != d) {
    throw DomainError("grid_oracle: bounds do not match decision dimension");
  }
  std::vector<std::vector<double>> axes;
  for (Eigen::Index i = 0; i < d; ++i) {
    axes.push_back(axis_points(bounds.lower(i), bounds.upper(i), resolution));
  }

  GridResult best;
  best.value = std::numeric_limits<double>::infinity();

  if (task.separable()) {
    Vector a = bounds.lower;
    for (Eigen::Index i = 0; i < d; ++i) {
      double best_value = std::numeric_limits<double>::infinity();
      double best_point = axes[i].front();
      for (double v : axes[i]) {
        a(i) = v;
        const double value = target.evaluate(task, a);
        if (value < best_value) {
          best_value = value;
          best_point = v;
        }
      }
      a(i) = best_point;
    }
    if (task.is_feasible(a, 1e-12)) {
      best.value = target.evaluate(task, a);
      best.decision = std::move(a);
      return best;
    }
  }

  if (d > 2) {
    throw UnsupportedError("grid_oracle: constraints are active and d = " + std::to_string(d) +
                           " > 2");
  }
  Vector a(d);
  const std::size_t n0 = axes[0].size();
  const std::size_t n1 = d == 2 ? axes[1].size() : 1;
  for (std::size_t i = 0; i < n0; ++i) {
    a(0) = axes[0][i];
    for (std::size_t j = 0; j < n1; ++j) {
      if (d == 2) a(1) = axes[1][j];
      if (!task.is_feasible(a, 1e-12)) continue;
      const double value = target.evaluate(task, a);
      if (value < best.value) {
        best.value = value;
        best.decision = a;
      }
    }
  }
  if (best.decision.size() == 0) throw DomainError("grid_oracle: no feasible grid point");
  return best;
}

}  // namespace soebm
