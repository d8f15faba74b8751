#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "soebm/mlp.hpp"
#include "soebm/rng.hpp"

namespace soebm {

/// Expected cost E_{y ~ N(mu, sigma^2)} f(y, a) and its gradients.
struct ExpectedCost {
  double value = 0.0;
  Vector grad_a;
  Vector grad_mu;
  Vector grad_sigma;
};

enum class ExpectationMode { kClosedForm, kMonteCarlo };

struct ExpectationConfig {
  ExpectationMode mode = ExpectationMode::kClosedForm;
  std::size_t mc_samples = 64;
};

struct Box {
  Vector lower;
  Vector upper;
};

/// A stochastic optimization task: cost f(y, a), its expectation under a
/// Gaussian prediction, and the feasible set.
class Task {
 public:
  virtual ~Task() = default;

  virtual std::string name() const = 0;
  virtual std::size_t decision_dim() const = 0;
  virtual std::size_t label_dim() const = 0;

  virtual double cost(const Vector& y, const Vector& a) const = 0;
  /// Subgradients of f; 0 is taken at kinks of |.| and max(., 0).
  virtual Vector cost_grad_a(const Vector& y, const Vector& a) const = 0;
  virtual Vector cost_grad_y(const Vector& y, const Vector& a) const = 0;

  virtual bool has_closed_form() const = 0;
  /// Throws UnsupportedError when has_closed_form() is false.
  virtual ExpectedCost closed_form_expected_cost(const GaussianPrediction& pred,
                                                 const Vector& a) const = 0;

  /// Euclidean projection onto the feasible set.
  virtual Vector project(const Vector& a) const = 0;
  /// Largest constraint violation (0 when feasible).
  virtual double max_violation(const Vector& a) const = 0;
  /// Search box for oracles and landscapes around a prediction.
  virtual Box decision_box(const GaussianPrediction& pred) const = 0;
  /// True when f(y, a) is a sum of per-coordinate terms in (y_i, a_i).
  virtual bool separable() const = 0;

  bool is_feasible(const Vector& a, double slack = 1e-8) const {
    return max_violation(a) <= slack;
  }
};

/// Pathwise Monte Carlo estimate with y = mu + sigma * eps, eps ~ N(0, I).
ExpectedCost mc_expected_cost(const Task& task, const GaussianPrediction& pred, const Vector& a,
                              std::size_t n, RngStream& stream);

/// Same estimator with an explicit set of standard-normal draws (rows are
/// samples). Used for common random numbers.
ExpectedCost mc_expected_cost(const Task& task, const GaussianPrediction& pred, const Vector& a,
                              const Matrix& eps);

/// Closed form when the task has one and the config asks for it, Monte Carlo
/// otherwise.
ExpectedCost expected_cost(const Task& task, const GaussianPrediction& pred, const Vector& a,
                           const ExpectationConfig& cfg, RngStream& stream);

void check_dims(const Task& task, const Vector& y, const Vector& a);

}  // namespace soebm
