#pragma once

#include <memory>
#include <span>
#include <vector>

#include "soebm/mlp.hpp"
#include "soebm/task.hpp"

namespace soebm {

/// Predictor bound to a task. The energy of decision a for features x is the
/// scaled expected task cost under the predictor's Gaussian,
///   E(x, a) = cost_scale * E_{y ~ p(y|x)} f(y, a).
/// The partition function is never formed; self-normalization cancels it.
struct EnergyModel {
  MlpParams params;
  std::shared_ptr<const Task> task;
  ExpectationConfig expectation;
  double cost_scale = 1.0;

  void validate() const;
};

/// Energy value with gradients in a, mu and sigma (all scaled by cost_scale).
using EnergyEval = ExpectedCost;

/// Energy of one decision, forward pass in evaluation mode.
EnergyEval energy(const EnergyModel& model, const Vector& x, const Vector& a, RngStream& stream);

/// Energy for an already computed prediction. In Monte Carlo mode the rows
/// of `eps` are the shared standard-normal draws.
EnergyEval energy_at(const EnergyModel& model, const GaussianPrediction& pred, const Vector& a,
                     const Matrix& eps);

/// Draws for energy_at: empty in closed-form mode, mc_samples x label_dim otherwise.
Matrix draw_expectation_noise(const EnergyModel& model, RngStream& stream);

/// Isotropic Gaussian mixture centred on the optimal decision,
///   pi(a | x) = (1/K) sum_k N(a; a*, sigma_k^2 I).
struct ProposalConfig {
  std::vector<double> sigmas{0.02, 0.05, 0.1};
  std::size_t samples = 512;

  void validate() const;
};

struct ProposalSet {
  std::vector<Vector> samples;
  std::vector<double> log_density;
  /// True when a* was appended as the last sample.
  bool has_anchor = false;
};

double proposal_log_density(const Vector& a, const Vector& center, std::span<const double> sigmas);

/// M draws from the mixture; a* is appended as sample M + 1 when `append_anchor`.
ProposalSet propose(const Vector& a_star, const ProposalConfig& cfg, RngStream& stream,
                    bool append_anchor);

struct SnisWeights {
  std::vector<double> model;   // q(a | x): proportional to exp(-E) / pi
  std::vector<double> oracle;  // p(a | y): proportional to exp(-cost_scale * f) / pi
  double ess_model = 0.0;
  double ess_oracle = 0.0;
};

/// `energies` are already scaled; `oracle_costs` are raw f(y, a^m). A
/// +infinity oracle cost excludes that sample from the oracle weights.
SnisWeights snis_weights(std::span<const double> energies, std::span<const double> oracle_costs,
                         std::span<const double> log_proposal, double cost_scale);

}  // namespace soebm
