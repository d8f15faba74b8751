#include "soebm/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "soebm/error.hpp"
#include "soebm/evaluation.hpp"
#include "soebm/numerics.hpp"

namespace soebm {

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("train: lambda must be >= 0");
  if (disable_mle && disable_kl) {
    throw ConfigError("train: the MLE and KL terms cannot both be disabled");
  }
  if (disable_mle && lambda == 0.0) {
    throw ConfigError("train: MLE disabled with lambda = 0 leaves no loss term");
  }
  if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  proposal.validate();
}

bool aligned(const Dataset& data, const DecisionDataset& decisions) {
  if (data.size() != decisions.size() || decisions.a.size() != decisions.size()) return false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.x[i].size() != decisions.x[i].size() || data.x[i] != decisions.x[i]) return false;
  }
  return true;
}

ExampleGradient grad_total(const EnergyModel& model, const Vector& x, const Vector& y,
                           const Vector& a_star, const TrainConfig& cfg, RngStream& stream,
                           bool training) {
  const auto fwd = forward(model.params, x, training, stream);
  const GaussianPrediction& pred = fwd.prediction;
  const Matrix eps = draw_expectation_noise(model, stream);
  const ProposalSet set = propose(a_star, cfg.proposal, stream, cfg.mle_active());
  const std::size_t m_count = set.samples.size();
  const auto p = static_cast<Eigen::Index>(model.params.label_dim);

  std::vector<double> energies(m_count);
  std::vector<double> oracle_costs(m_count);
  std::vector<Vector> grad_mu(m_count);
  std::vector<Vector> grad_sigma(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    EnergyEval e = energy_at(model, pred, set.samples[m], eps);
    if (!std::isfinite(e.value) || !e.grad_mu.allFinite() || !e.grad_sigma.allFinite()) {
      std::ostringstream msg;
      msg << "grad_total: non-finite energy " << e.value << " at proposal sample " << m << " [";
      for (Eigen::Index i = 0; i < set.samples[m].size(); ++i) {
        msg << (i ? " " : "") << set.samples[m](i);
      }
      msg << "]";
      throw TrainingError(msg.str());
    }
    energies[m] = e.value;
    grad_mu[m] = std::move(e.grad_mu);
    grad_sigma[m] = std::move(e.grad_sigma);
    const bool is_anchor = set.has_anchor && m + 1 == m_count;
    oracle_costs[m] =
        is_anchor ? std::numeric_limits<double>::infinity() : model.task->cost(y, set.samples[m]);
  }
  const SnisWeights w = snis_weights(energies, oracle_costs, set.log_density, model.cost_scale);

  ExampleGradient out;
  out.mle_grad_mu = Vector::Zero(p);
  out.mle_grad_sigma = Vector::Zero(p);
  Vector total_mu = Vector::Zero(p);
  Vector total_sigma = Vector::Zero(p);

  if (cfg.mle_active()) {
    // dE(a*) - sum_m w~_m dE(a^m), written as sum_m w~_m (dE(a*) - dE(a^m)).
    const Vector& anchor_mu = grad_mu.back();
    const Vector& anchor_sigma = grad_sigma.back();
    for (std::size_t m = 0; m < m_count; ++m) {
      out.mle_grad_mu += w.model[m] * (anchor_mu - grad_mu[m]);
      out.mle_grad_sigma += w.model[m] * (anchor_sigma - grad_sigma[m]);
    }
    total_mu += out.mle_grad_mu;
    total_sigma += out.mle_grad_sigma;
  }
  if (cfg.kl_active()) {
    for (std::size_t m = 0; m < m_count; ++m) {
      const double c = cfg.lambda * (w.oracle[m] - w.model[m]);
      total_mu += c * grad_mu[m];
      total_sigma += c * grad_sigma[m];
    }
  }

  out.grad_mu = total_mu;
  out.grad_log_sigma = total_sigma.cwiseProduct(pred.sigma);
  out.grads = backward(model.params, fwd.cache, out.grad_mu, out.grad_log_sigma).grads;

  std::vector<double> log_terms(m_count);
  double weighted_energy = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    log_terms[m] = -energies[m] - set.log_density[m];
    weighted_energy += w.oracle[m] * energies[m];
  }
  const double log_partition = log_sum_exp(log_terms) - std::log(static_cast<double>(m_count));
  out.diagnostics.energy_at_anchor =
      set.has_anchor ? energies.back() : energy_at(model, pred, a_star, eps).value;
  out.diagnostics.kl_cross = weighted_energy + log_partition;
  out.diagnostics.ess_model = w.ess_model;
  out.diagnostics.ess_oracle = w.ess_oracle;
  return out;
}

LayerSet weighted_energy_gradient(const EnergyModel& model, const Vector& x,
                                  const std::vector<Vector>& decisions,
                                  const std::vector<double>& coefficients, const Matrix& eps) {
  if (decisions.size() != coefficients.size()) {
    throw DomainError("weighted_energy_gradient: length mismatch");
  }
  const auto fwd = forward_eval(model.params, x);
  const auto p = static_cast<Eigen::Index>(model.params.label_dim);
  Vector g_mu = Vector::Zero(p);
  Vector g_sigma = Vector::Zero(p);
  for (std::size_t m = 0; m < decisions.size(); ++m) {
    const EnergyEval e = energy_at(model, fwd.prediction, decisions[m], eps);
    g_mu += coefficients[m] * e.grad_mu;
    g_sigma += coefficients[m] * e.grad_sigma;
  }
  return backward(model.params, fwd.cache, g_mu, g_sigma.cwiseProduct(fwd.prediction.sigma)).grads;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch,
                                     StreamPurpose purpose) {
  RngStream stream(seed, {static_cast<std::uint32_t>(epoch), 0, purpose});
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[stream.below(i)]);
  return order;
}

void apply_update(EnergyModel& model, const LayerSet& grads, AdamState& adam, std::size_t epoch,
                  std::size_t batch_start) {
  try {
    adam_step(model.params, grads, adam);
  } catch (const TrainingError& e) {
    std::ostringstream msg;
    msg << e.what() << " (epoch " << epoch << ", batch starting at position " << batch_start
        << ")";
    throw TrainingError(msg.str());
  }
  if (!all_finite(model.params.layers)) {
    std::ostringstream msg;
    msg << "training diverged: non-finite parameters after epoch " << epoch << ", batch starting at "
        << batch_start;
    throw TrainingError(msg.str());
  }
}

AdamState initial_adam(const EnergyModel& model, const TrainConfig& cfg, const TrainOptions& opts) {
  if (opts.resume_adam) return *opts.resume_adam;
  return make_adam_state(model.params, cfg.learning_rate);
}

}  // namespace

TrainHistory train(EnergyModel& model, const Dataset& data, const DecisionDataset& decisions,
                   const TrainConfig& cfg, const TrainOptions& opts) {
  model.validate();
  cfg.validate();
  if (!(model.cost_scale > 0.0)) throw ConfigError("train: cost_scale must be positive");
  if (data.size() == 0) throw ConfigError("train: empty dataset");
  if (!aligned(data, decisions)) {
    throw ConfigError("train: decision dataset is not index-aligned with the training data");
  }

  TrainHistory history;
  history.adam = initial_adam(model, cfg, opts);
  const std::size_t n = data.size();
  for (std::size_t epoch = opts.start_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = epoch_order(n, cfg.seed, epoch, StreamPurpose::kShuffle);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      LayerSet acc = zeros_like(model.params.layers);
      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t idx = order[pos];
        RngStream stream(cfg.seed, {static_cast<std::uint32_t>(epoch),
                                    static_cast<std::uint32_t>(idx), StreamPurpose::kProposal});
        ExampleGradient g;
        try {
          g = grad_total(model, data.x[idx], data.y[idx], decisions.a[idx], cfg, stream);
        } catch (const TrainingError& e) {
          std::ostringstream msg;
          msg << e.what() << " (epoch " << epoch << ", example " << idx << ")";
          throw TrainingError(msg.str());
        }
        axpy(1.0, g.grads, acc);
        rec.mean_energy_at_astar += g.diagnostics.energy_at_anchor;
        rec.mean_kl_cross += g.diagnostics.kl_cross;
        rec.ess_model_mean += g.diagnostics.ess_model;
        rec.ess_oracle_mean += g.diagnostics.ess_oracle;
      }
      scale_in_place(1.0 / static_cast<double>(stop - start), acc);
      apply_update(model, acc, history.adam, epoch, start);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    rec.mean_energy_at_astar *= inv_n;
    rec.mean_kl_cross *= inv_n;
    rec.ess_model_mean *= inv_n;
    rec.ess_oracle_mean *= inv_n;
    if (opts.eval_set != nullptr) {
      rec.eval_task_loss = eval_task_loss(model, *opts.eval_set, opts.eval_solve, cfg.seed).mean_task_loss;
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    history.epochs.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(rec, model.params, history.adam);
  }
  return history;
}

TrainHistory train_two_stage(EnergyModel& model, const Dataset& data, const TrainConfig& cfg,
                             const TrainOptions& opts) {
  model.validate();
  if (cfg.batch_size < 1) throw ConfigError("train_two_stage: batch_size must be at least 1");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("train_two_stage: learning_rate must be positive");
  if (data.size() == 0) throw ConfigError("train_two_stage: empty dataset");

  TrainHistory history;
  history.adam = initial_adam(model, cfg, opts);
  const std::size_t n = data.size();
  for (std::size_t epoch = opts.start_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = epoch_order(n, cfg.seed, epoch, StreamPurpose::kTwoStageShuffle);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      LayerSet acc = zeros_like(model.params.layers);
      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t idx = order[pos];
        RngStream stream(cfg.seed, {static_cast<std::uint32_t>(epoch),
                                    static_cast<std::uint32_t>(idx), StreamPurpose::kDropout});
        const auto fwd = forward(model.params, data.x[idx], true, stream);
        const NllResult nll = gaussian_nll(fwd.prediction, data.y[idx]);
        rec.mean_nll += nll.loss;
        axpy(1.0, backward(model.params, fwd.cache, nll.grad_mu, nll.grad_log_sigma).grads, acc);
      }
      scale_in_place(1.0 / static_cast<double>(stop - start), acc);
      apply_update(model, acc, history.adam, epoch, start);
    }
    rec.mean_nll /= static_cast<double>(n);
    if (opts.eval_set != nullptr) {
      rec.eval_task_loss = eval_task_loss(model, *opts.eval_set, opts.eval_solve, cfg.seed).mean_task_loss;
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    history.epochs.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(rec, model.params, history.adam);
  }
  return history;
}

}  // namespace soebm
