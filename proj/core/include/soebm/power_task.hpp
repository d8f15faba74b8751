#pragma once

#include "soebm/task.hpp"

namespace soebm {

/// Generator scheduling with under/over-generation penalties and a ramp limit.
struct PowerTaskParams {
  double under_penalty = 0.4;  // gamma_s
  double over_penalty = 50.0;  // gamma_e
  double ramp_limit = 0.4;     // c_r
  std::size_t horizon = 24;

  void validate() const;
};

/// sum_i gamma_s [y_i - a_i]_+ + gamma_e [a_i - y_i]_+ + (a_i - y_i)^2 / 2
double power_cost(const Vector& y, const Vector& a, const PowerTaskParams& params);

/// Closed-form expectation under independent Gaussians with analytic
/// gradients in a, mu and sigma.
ExpectedCost power_expected_cost(const GaussianPrediction& pred, const Vector& a,
                                 const PowerTaskParams& params);

class PowerTask final : public Task {
 public:
  explicit PowerTask(PowerTaskParams params);

  const PowerTaskParams& params() const { return params_; }

  std::string name() const override { return "power"; }
  std::size_t decision_dim() const override { return params_.horizon; }
  std::size_t label_dim() const override { return params_.horizon; }
  double cost(const Vector& y, const Vector& a) const override;
  Vector cost_grad_a(const Vector& y, const Vector& a) const override;
  Vector cost_grad_y(const Vector& y, const Vector& a) const override;
  bool has_closed_form() const override { return true; }
  ExpectedCost closed_form_expected_cost(const GaussianPrediction& pred,
                                         const Vector& a) const override;
  Vector project(const Vector& a) const override;
  double max_violation(const Vector& a) const override;
  /// [mu - 5 sigma, mu + 5 sigma] per coordinate.
  Box decision_box(const GaussianPrediction& pred) const override;
  bool separable() const override { return true; }

 private:
  PowerTaskParams params_;
};

}  // namespace soebm
