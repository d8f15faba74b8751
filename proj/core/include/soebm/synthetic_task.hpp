#pragma once

#include "soebm/task.hpp"

namespace soebm {

/// f(y, a) = sum_i l1 |a_i - y_i| + quad (a_i - center)^2, unconstrained, d = 2.
struct Synthetic2DParams {
  double l1_weight = 3.0;
  double quad_weight = 0.5;
  double quad_center = 1.5;

  void validate() const;
};

double synthetic2d_cost(const Vector& y, const Vector& a, const Synthetic2DParams& params);

/// E|a - y| for Gaussian y has the closed form (a - mu)(2 Phi(t) - 1) + 2 sigma phi(t).
ExpectedCost synthetic2d_expected_cost(const GaussianPrediction& pred, const Vector& a,
                                       const Synthetic2DParams& params);

class Synthetic2DTask final : public Task {
 public:
  static constexpr std::size_t kDim = 2;

  explicit Synthetic2DTask(Synthetic2DParams params = {});

  const Synthetic2DParams& params() const { return params_; }

  std::string name() const override { return "synthetic2d"; }
  std::size_t decision_dim() const override { return kDim; }
  std::size_t label_dim() const override { return kDim; }
  double cost(const Vector& y, const Vector& a) const override;
  Vector cost_grad_a(const Vector& y, const Vector& a) const override;
  Vector cost_grad_y(const Vector& y, const Vector& a) const override;
  bool has_closed_form() const override { return true; }
  ExpectedCost closed_form_expected_cost(const GaussianPrediction& pred,
                                         const Vector& a) const override;
  Vector project(const Vector& a) const override { return a; }
  double max_violation(const Vector&) const override { return 0.0; }
  /// [-4, 6] per coordinate.
  Box decision_box(const GaussianPrediction& pred) const override;
  bool separable() const override { return true; }

 private:
  Synthetic2DParams params_;
};

}  // namespace soebm
