#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "soebm/rng.hpp"

namespace soebm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kLogSigmaMin = -5.0;
inline constexpr double kLogSigmaMax = 5.0;
/// exp(kLogSigmaMin)
inline constexpr double kSigmaFloor = 0.006737946999085467;
inline constexpr double kInitialSigma = 0.5;

/// Per-dimension Gaussian predictive distribution p(y | x).
struct GaussianPrediction {
  Vector mu;
  Vector sigma;

  std::size_t dim() const { return static_cast<std::size_t>(mu.size()); }
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

/// Layer list with the same shapes as an Mlp's parameters; also used for
/// gradients and Adam moments.
using LayerSet = std::vector<DenseLayer>;

LayerSet zeros_like(const LayerSet& layers);
/// dst += scale * src
void axpy(double scale, const LayerSet& src, LayerSet& dst);
void scale_in_place(double scale, LayerSet& layers);
bool all_finite(const LayerSet& layers);
std::size_t parameter_count(const LayerSet& layers);
/// Flat row-major view used by gradient checks: weights then bias, per layer.
double& parameter_at(LayerSet& layers, std::size_t flat_index);
double parameter_at(const LayerSet& layers, std::size_t flat_index);

/// Feed-forward network x -> (mu, log sigma) with rectifier hidden layers
/// and inverted dropout after each hidden activation.
struct MlpParams {
  LayerSet layers;
  double dropout_rate = 0.0;
  std::size_t label_dim = 0;

  std::size_t input_dim() const { return static_cast<std::size_t>(layers.front().weight.cols()); }
  /// Widths [input, hidden..., 2 * label_dim].
  std::vector<std::size_t> widths() const;
};

struct ForwardCache {
  Vector input;
  std::vector<Vector> pre_activations;  // one per layer
  std::vector<Vector> activations;      // post-ReLU, post-dropout (hidden layers)
  std::vector<Vector> dropout_masks;    // empty when not training
  Vector raw_log_sigma;                 // before clamping
};

struct ForwardResult {
  GaussianPrediction prediction;
  ForwardCache cache;
};

struct BackwardResult {
  LayerSet grads;
  Vector input_grad;
};

/// widths = [input, hidden..., ]; the output layer of width 2 * label_dim is
/// appended. Weights ~ N(0, 1/fan_in), biases zero except the log-std head,
/// which starts at log(initial_sigma).
MlpParams init_params(const std::vector<std::size_t>& widths, std::size_t label_dim,
                      double dropout_rate, RngStream& stream,
                      double initial_sigma = kInitialSigma);

/// The stream is only consumed in training mode (dropout masks).
ForwardResult forward(const MlpParams& params, const Vector& x, bool training,
                      RngStream& stream);
/// Evaluation-mode forward without a stream.
ForwardResult forward_eval(const MlpParams& params, const Vector& x);

BackwardResult backward(const MlpParams& params, const ForwardCache& cache,
                        const Vector& grad_mu, const Vector& grad_log_sigma);

struct NllResult {
  double loss = 0.0;
  Vector grad_mu;
  Vector grad_log_sigma;
};

/// sum_i [log sigma_i + (y_i - mu_i)^2 / (2 sigma_i^2)] + (p/2) log(2 pi)
NllResult gaussian_nll(const GaussianPrediction& pred, const Vector& y);

}  // namespace soebm
