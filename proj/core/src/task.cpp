#include "soebm/task.hpp"

#include <string>

#include "soebm/error.hpp"

namespace soebm {

void check_dims(const Task& task, const Vector& y, const Vector& a) {
  if (static_cast<std::size_t>(y.size()) != task.label_dim() ||
      static_cast<std::size_t>(a.size()) != task.decision_dim()) {
    throw DomainError(task.name() + ": expected label/decision lengths " +
                      std::to_string(task.label_dim()) + "/" +
                      std::to_string(task.decision_dim()) + ", got " + std::to_string(y.size()) +
                      "/" + std::to_string(a.size()));
  }
}

ExpectedCost mc_expected_cost(const Task& task, const GaussianPrediction& pred, const Vector& a,
                              const Matrix& eps) {
  const auto n = eps.rows();
  if (n < 1) throw ConfigError("mc_expected_cost: sample count must be at least 1");
  const auto p = static_cast<Eigen::Index>(task.label_dim());
  if (eps.cols() != p) throw DomainError("mc_expected_cost: noise width mismatch");
  check_dims(task, pred.mu, a);

  ExpectedCost out;
  out.grad_a = Vector::Zero(a.size());
  out.grad_mu = Vector::Zero(p);
  out.grad_sigma = Vector::Zero(p);
  Vector y(p);
  for (Eigen::Index s = 0; s < n; ++s) {
    y = pred.mu + pred.sigma.cwiseProduct(eps.row(s).transpose());
    out.value += task.cost(y, a);
    out.grad_a += task.cost_grad_a(y, a);
    const Vector gy = task.cost_grad_y(y, a);
    out.grad_mu += gy;
    out.grad_sigma += gy.cwiseProduct(eps.row(s).transpose());
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.value *= inv_n;
  out.grad_a *= inv_n;
  out.grad_mu *= inv_n;
  out.grad_sigma *= inv_n;
  return out;
}

ExpectedCost mc_expected_cost(const Task& task, const GaussianPrediction& pred, const Vector& a,
                              std::size_t n, RngStream& stream) {
  if (n < 1) throw ConfigError("mc_expected_cost: sample count must be at least 1");
  const auto p = static_cast<Eigen::Index>(task.label_dim());
  Matrix eps(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index s = 0; s < eps.rows(); ++s) {
    for (Eigen::Index j = 0; j < p; ++j) eps(s, j) = stream.normal();
  }
  return mc_expected_cost(task, pred, a, eps);
}

ExpectedCost expected_cost(const Task& task, const GaussianPrediction& pred, const Vector& a,
                           const ExpectationConfig& cfg, RngStream& stream) {
  if (cfg.mode == ExpectationMode::kClosedForm && task.has_closed_form()) {
    return task.closed_form_expected_cost(pred, a);
  }
  return mc_expected_cost(task, pred, a, cfg.mc_samples, stream);
}

}  // namespace soebm
