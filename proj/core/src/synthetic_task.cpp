#include "soebm/synthetic_task.hpp"

#include <cmath>

#include "soebm/error.hpp"
#include "soebm/numerics.hpp"

namespace soebm {

void Synthetic2DParams::validate() const {
  if (!(l1_weight > 0.0 && quad_weight > 0.0)) {
    throw ConfigError("synthetic2d task: coefficients must be positive");
  }
}

double synthetic2d_cost(const Vector& y, const Vector& a, const Synthetic2DParams& params) {
  if (y.size() != a.size()) throw DomainError("synthetic2d_cost: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double q = a(i) - params.quad_center;
    total += params.l1_weight * std::abs(a(i) - y(i)) + params.quad_weight * q * q;
  }
  return total;
}

ExpectedCost synthetic2d_expected_cost(const GaussianPrediction& pred, const Vector& a,
                                       const Synthetic2DParams& params) {
  const auto d = a.size();
  if (pred.mu.size() != d || pred.sigma.size() != d) {
    throw DomainError("synthetic2d_expected_cost: length mismatch");
  }
  ExpectedCost out;
  out.grad_a.resize(d);
  out.grad_mu.resize(d);
  out.grad_sigma.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sigma = pred.sigma(i);
    if (!(sigma > 0.0)) throw DomainError("synthetic2d_expected_cost: sigma must be positive");
    const double u = a(i) - pred.mu(i);
    const double t = u / sigma;
    const double pdf = std_normal_pdf(t);
    const double slope = 2.0 * std_normal_cdf(t) - 1.0;
    const double q = a(i) - params.quad_center;
    out.value += params.l1_weight * (u * slope + 2.0 * sigma * pdf) + params.quad_weight * q * q;
    out.grad_mu(i) = -params.l1_weight * slope;
    out.grad_a(i) = params.l1_weight * slope + 2.0 * params.quad_weight * q;
    out.grad_sigma(i) = 2.0 * params.l1_weight * pdf;
  }
  return out;
}

Synthetic2DTask::Synthetic2DTask(Synthetic2DParams params) : params_(params) {
  params_.validate();
}

double Synthetic2DTask::cost(const Vector& y, const Vector& a) const {
  check_dims(*this, y, a);
  return synthetic2d_cost(y, a, params_);
}

Vector Synthetic2DTask::cost_grad_a(const Vector& y, const Vector& a) const {
  check_dims(*this, y, a);
  Vector g(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double u = a(i) - y(i);
    const double sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    g(i) = params_.l1_weight * sign + 2.0 * params_.quad_weight * (a(i) - params_.quad_center);
  }
  return g;
}

Vector Synthetic2DTask::cost_grad_y(const Vector& y, const Vector& a) const {
  check_dims(*this, y, a);
  Vector g(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double u = a(i) - y(i);
    g(i) = -params_.l1_weight * (u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0));
  }
  return g;
}

ExpectedCost Synthetic2DTask::closed_form_expected_cost(const GaussianPrediction& pred,
                                                        const Vector& a) const {
  check_dims(*this, pred.mu, a);
  return synthetic2d_expected_cost(pred, a, params_);
}

Box Synthetic2DTask::decision_box(const GaussianPrediction&) const {
  return {Vector::Constant(kDim, -4.0), Vector::Constant(kDim, 6.0)};
}

}  // namespace soebm
