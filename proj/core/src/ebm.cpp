#include "soebm/ebm.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "soebm/error.hpp"
#include "soebm/numerics.hpp"

namespace soebm {

void EnergyModel::validate() const {
  if (!task) throw ConfigError("energy model: no task");
  if (params.label_dim != task->label_dim()) {
    throw ConfigError("energy model: predictor label dimension " +
                      std::to_string(params.label_dim) + " does not match task label dimension " +
                      std::to_string(task->label_dim()));
  }
  if (!(cost_scale >= 0.0) || !std::isfinite(cost_scale)) {
    throw ConfigError("energy model: cost_scale must be finite and non-negative");
  }
  if (expectation.mode == ExpectationMode::kMonteCarlo && expectation.mc_samples < 1) {
    throw ConfigError("energy model: mc_samples must be at least 1");
  }
}

Matrix draw_expectation_noise(const EnergyModel& model, RngStream& stream) {
  if (model.expectation.mode == ExpectationMode::kClosedForm && model.task->has_closed_form()) {
    return {};
  }
  Matrix eps(static_cast<Eigen::Index>(model.expectation.mc_samples),
             static_cast<Eigen::Index>(model.task->label_dim()));
  for (Eigen::Index s = 0; s < eps.rows(); ++s) {
    for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(s, j) = stream.normal();
  }
  return eps;
}

EnergyEval energy_at(const EnergyModel& model, const GaussianPrediction& pred, const Vector& a,
                     const Matrix& eps) {
  EnergyEval e = eps.size() == 0 ? model.task->closed_form_expected_cost(pred, a)
                                 : mc_expected_cost(*model.task, pred, a, eps);
  const double tau = model.cost_scale;
  e.value *= tau;
  e.grad_a *= tau;
  e.grad_mu *= tau;
  e.grad_sigma *= tau;
  return e;
}

EnergyEval energy(const EnergyModel& model, const Vector& x, const Vector& a, RngStream& stream) {
  model.validate();
  if (!a.allFinite()) throw DomainError("energy: non-finite decision");
  const auto fwd = forward_eval(model.params, x);
  const Matrix eps = draw_expectation_noise(model, stream);
  return energy_at(model, fwd.prediction, a, eps);
}

void ProposalConfig::validate() const {
  if (sigmas.empty()) throw ConfigError("proposal: need at least one component");
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("proposal: sigmas must be positive");
  }
  if (samples < 2) throw ConfigError("proposal: need at least 2 samples");
}

double proposal_log_density(const Vector& a, const Vector& center, std::span<const double> sigmas) {
  const double d = static_cast<double>(a.size());
  const double sq = (a - center).squaredNorm();
  std::vector<double> terms(sigmas.size());
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const double s = sigmas[k];
    const double r = std::sqrt(sq) / s;  // avoids 0/0 when s*s underflows
    terms[k] = -0.5 * d * (kLog2Pi + 2.0 * std::log(s)) - 0.5 * r * r;
  }
  return log_sum_exp(terms) - std::log(static_cast<double>(sigmas.size()));
}

ProposalSet propose(const Vector& a_star, const ProposalConfig& cfg, RngStream& stream,
                    bool append_anchor) {
  cfg.validate();
  ProposalSet set;
  set.samples.reserve(cfg.samples + 1);
  set.log_density.reserve(cfg.samples + 1);
  const auto k_count = static_cast<std::uint64_t>(cfg.sigmas.size());
  for (std::size_t m = 0; m < cfg.samples; ++m) {
    const double s = cfg.sigmas[static_cast<std::size_t>(stream.below(k_count))];
    Vector a(a_star.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = a_star(i) + s * stream.normal();
    set.log_density.push_back(proposal_log_density(a, a_star, cfg.sigmas));
    set.samples.push_back(std::move(a));
  }
  if (append_anchor) {
    set.samples.push_back(a_star);
    set.log_density.push_back(proposal_log_density(a_star, a_star, cfg.sigmas));
    set.has_anchor = true;
  }
  return set;
}

SnisWeights snis_weights(std::span<const double> energies, std::span<const double> oracle_costs,
                         std::span<const double> log_proposal, double cost_scale) {
  const std::size_t m = energies.size();
  if (m == 0 || oracle_costs.size() != m || log_proposal.size() != m) {
    throw DomainError("snis_weights: input lengths differ or are empty");
  }
  std::vector<double> log_model(m);
  std::vector<double> log_oracle(m);
  for (std::size_t i = 0; i < m; ++i) {
    log_model[i] = -energies[i] - log_proposal[i];
    log_oracle[i] = oracle_costs[i] == std::numeric_limits<double>::infinity()
                        ? -std::numeric_limits<double>::infinity()
                        : -cost_scale * oracle_costs[i] - log_proposal[i];
  }
  SnisWeights w;
  w.model = normalize_log_weights(log_model);
  w.oracle = normalize_log_weights(log_oracle);
  w.ess_model = effective_sample_size(w.model);
  w.ess_oracle = effective_sample_size(w.oracle);
  return w;
}

}  // namespace soebm
