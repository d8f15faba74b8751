#include "soebm/power_task.hpp"

#include <cmath>

#include "soebm/error.hpp"
#include "soebm/numerics.hpp"
#include "soebm/projection.hpp"

namespace soebm {

void PowerTaskParams::validate() const {
  if (!(under_penalty > 0.0 && over_penalty > under_penalty)) {
    throw ConfigError("power task: need over_penalty > under_penalty > 0");
  }
  if (!(ramp_limit > 0.0)) throw ConfigError("power task: ramp_limit must be positive");
  if (horizon < 1) throw ConfigError("power task: horizon must be at least 1");
}

double power_cost(const Vector& y, const Vector& a, const PowerTaskParams& params) {
  if (y.size() != a.size()) throw DomainError("power_cost: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double u = a(i) - y(i);
    total += params.under_penalty * std::max(-u, 0.0) + params.over_penalty * std::max(u, 0.0) +
             0.5 * u * u;
  }
  return total;
}

ExpectedCost power_expected_cost(const GaussianPrediction& pred, const Vector& a,
                                 const PowerTaskParams& params) {
  const auto d = a.size();
  if (pred.mu.size() != d || pred.sigma.size() != d) {
    throw DomainError("power_expected_cost: length mismatch");
  }
  const double gs = params.under_penalty;
  const double g = params.under_penalty + params.over_penalty;
  ExpectedCost out;
  out.grad_a.resize(d);
  out.grad_mu.resize(d);
  out.grad_sigma.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sigma = pred.sigma(i);
    if (!(sigma > 0.0)) throw DomainError("power_expected_cost: sigma must be positive");
    const double u = a(i) - pred.mu(i);
    const double t = u / sigma;
    const double pdf = std_normal_pdf(t);
    const double cdf = std_normal_cdf(t);
    // sigma^2 N(a; mu, sigma^2) = sigma * phi(t)
    out.value += g * (sigma * pdf + u * cdf) - gs * u + 0.5 * (u * u + sigma * sigma);
    out.grad_a(i) = g * cdf - gs + u;
    out.grad_mu(i) = -out.grad_a(i);
    out.grad_sigma(i) = g * pdf + sigma;
  }
  return out;
}

PowerTask::PowerTask(PowerTaskParams params) : params_(params) { params_.validate(); }

double PowerTask::cost(const Vector& y, const Vector& a) const {
  check_dims(*this, y, a);
  return power_cost(y, a, params_);
}

Vector PowerTask::cost_grad_a(const Vector& y, const Vector& a) const {
  check_dims(*this, y, a);
  Vector g(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double u = a(i) - y(i);
    const double kink = u > 0.0 ? params_.over_penalty : (u < 0.0 ? -params_.under_penalty : 0.0);
    g(i) = kink + u;
  }
  return g;
}

Vector PowerTask::cost_grad_y(const Vector& y, const Vector& a) const {
  return -cost_grad_a(y, a);
}

ExpectedCost PowerTask::closed_form_expected_cost(const GaussianPrediction& pred,
                                                  const Vector& a) const {
  check_dims(*this, pred.mu, a);
  return power_expected_cost(pred, a, params_);
}

Vector PowerTask::project(const Vector& a) const {
  if (static_cast<std::size_t>(a.size()) != params_.horizon) {
    throw DomainError("power project: length mismatch");
  }
  return project_ramp(a, params_.ramp_limit);
}

double PowerTask::max_violation(const Vector& a) const {
  return ramp_violation(a, params_.ramp_limit);
}

Box PowerTask::decision_box(const GaussianPrediction& pred) const {
  return {pred.mu - 5.0 * pred.sigma, pred.mu + 5.0 * pred.sigma};
}

}  // namespace soebm
