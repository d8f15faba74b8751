#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "soebm/adam.hpp"
#include "soebm/dataset.hpp"
#include "soebm/ebm.hpp"
#include "soebm/solver.hpp"

namespace soebm {

struct TrainConfig {
  double lambda = 1.0;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 5e-5;
  ProposalConfig proposal;
  std::uint64_t seed = 0;
  bool disable_mle = false;
  bool disable_kl = false;

  void validate() const;
  bool mle_active() const { return !disable_mle; }
  bool kl_active() const { return !disable_kl && lambda != 0.0; }
};

struct GradDiagnostics {
  double energy_at_anchor = 0.0;
  /// Cross-entropy estimate -E_{p(a|y)} log q(a|x) = sum_m w_hat_m E_m + log Z(x).
  double kl_cross = 0.0;
  double ess_model = 0.0;
  double ess_oracle = 0.0;
};

struct ExampleGradient {
  LayerSet grads;
  /// Output-layer gradients the parameter gradient was built from.
  Vector grad_mu;
  Vector grad_log_sigma;
  Vector mle_grad_mu;
  Vector mle_grad_sigma;
  GradDiagnostics diagnostics;
};

/// Per-example gradient of MLE + lambda * KL with SNIS estimates over one
/// shared proposal set:
///   [dE(a*) - sum_m w~_m dE(a^m)] + lambda [sum_m w^_m dE(a^m) - sum_m w~_m dE(a^m)].
/// Weights are constants with respect to theta. The stream drives dropout,
/// the proposal and any Monte Carlo expectation.
ExampleGradient grad_total(const EnergyModel& model, const Vector& x, const Vector& y,
                           const Vector& a_star, const TrainConfig& cfg, RngStream& stream,
                           bool training = true);

/// Gradient of sum_m coef_m E(x, a^m) with the coefficients held fixed, in
/// evaluation mode.
LayerSet weighted_energy_gradient(const EnergyModel& model, const Vector& x,
                                  const std::vector<Vector>& decisions,
                                  const std::vector<double>& coefficients, const Matrix& eps = {});

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_energy_at_astar = 0.0;
  double mean_kl_cross = 0.0;
  double ess_model_mean = 0.0;
  double ess_oracle_mean = 0.0;
  /// Two-stage training: mean Gaussian NLL on the training set.
  double mean_nll = 0.0;
  std::optional<double> eval_task_loss;
  double seconds = 0.0;
};

using EpochCallback =
    std::function<void(const EpochRecord& record, const MlpParams& params, const AdamState& adam)>;

struct TrainOptions {
  const Dataset* eval_set = nullptr;
  SolveConfig eval_solve = SolveConfig::inference();
  /// Resume from this optimizer state after `start_epoch` completed epochs.
  std::optional<AdamState> resume_adam;
  std::size_t start_epoch = 0;
  EpochCallback on_epoch;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  AdamState adam;
};

/// Mini-batch Adam on MLE + lambda * KL. `decisions` must be index-aligned
/// with `data`.
TrainHistory train(EnergyModel& model, const Dataset& data, const DecisionDataset& decisions,
                   const TrainConfig& cfg, const TrainOptions& opts = {});

/// Baseline: mini-batch Adam on the Gaussian NLL, ignoring decisions.
TrainHistory train_two_stage(EnergyModel& model, const Dataset& data, const TrainConfig& cfg,
                             const TrainOptions& opts = {});

/// True when the rows of `decisions` carry the same features, in order.
bool aligned(const Dataset& data, const DecisionDataset& decisions);

}  // namespace soebm
