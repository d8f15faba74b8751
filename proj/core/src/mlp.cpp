#include "soebm/mlp.hpp"

#include <cmath>
#include <string>

#include "soebm/error.hpp"
#include "soebm/numerics.hpp"

namespace soebm {

LayerSet zeros_like(const LayerSet& layers) {
  LayerSet out;
  out.reserve(layers.size());
  for (const auto& layer : layers) {
    out.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                   Vector::Zero(layer.bias.size())});
  }
  return out;
}

void axpy(double scale, const LayerSet& src, LayerSet& dst) {
  if (src.size() != dst.size()) throw DomainError("axpy: layer count mismatch");
  for (std::size_t l = 0; l < src.size(); ++l) {
    dst[l].weight += scale * src[l].weight;
    dst[l].bias += scale * src[l].bias;
  }
}

void scale_in_place(double scale, LayerSet& layers) {
  for (auto& layer : layers) {
    layer.weight *= scale;
    layer.bias *= scale;
  }
}

bool all_finite(const LayerSet& layers) {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

std::size_t parameter_count(const LayerSet& layers) {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

namespace {

template <typename Layers>
auto& locate(Layers& layers, std::size_t flat_index) {
  for (auto& layer : layers) {
    const auto rows = static_cast<std::size_t>(layer.weight.rows());
    const auto cols = static_cast<std::size_t>(layer.weight.cols());
    if (flat_index < rows * cols) {
      return layer.weight(static_cast<Eigen::Index>(flat_index / cols),
                          static_cast<Eigen::Index>(flat_index % cols));
    }
    flat_index -= rows * cols;
    if (flat_index < rows) return layer.bias(static_cast<Eigen::Index>(flat_index));
    flat_index -= rows;
  }
  throw DomainError("parameter_at: index out of range");
}

}  // namespace

double& parameter_at(LayerSet& layers, std::size_t flat_index) {
  return locate(layers, flat_index);
}

double parameter_at(const LayerSet& layers, std::size_t flat_index) {
  return locate(layers, flat_index);
}

std::vector<std::size_t> MlpParams::widths() const {
  std::vector<std::size_t> out;
  out.push_back(input_dim());
  for (const auto& layer : layers) out.push_back(static_cast<std::size_t>(layer.weight.rows()));
  return out;
}

MlpParams init_params(const std::vector<std::size_t>& widths, std::size_t label_dim,
                      double dropout_rate, RngStream& stream, double initial_sigma) {
  if (widths.size() < 2) {
    throw ConfigError("init_params: need an input width and at least one hidden layer");
  }
  for (auto w : widths) {
    if (w == 0) throw ConfigError("init_params: layer widths must be positive");
  }
  if (label_dim == 0) throw ConfigError("init_params: label dimension must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("init_params: dropout rate must be in [0, 1)");
  }
  if (!(initial_sigma > 0.0)) throw ConfigError("init_params: initial sigma must be positive");

  std::vector<std::size_t> all = widths;
  all.push_back(2 * label_dim);

  MlpParams params;
  params.dropout_rate = dropout_rate;
  params.label_dim = label_dim;
  for (std::size_t l = 0; l + 1 < all.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(all[l]);
    const auto fan_out = static_cast<Eigen::Index>(all[l + 1]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight(r, c) = scale * stream.normal();
    }
    params.layers.push_back(std::move(layer));
  }
  const auto p = static_cast<Eigen::Index>(label_dim);
  params.layers.back().bias.tail(p).setConstant(std::log(initial_sigma));
  return params;
}

ForwardResult forward(const MlpParams& params, const Vector& x, bool training,
                      RngStream& stream) {
  if (params.layers.empty()) throw DomainError("forward: empty network");
  if (x.size() != params.layers.front().weight.cols()) {
    throw DomainError("forward: feature length " + std::to_string(x.size()) +
                      " does not match input width " +
                      std::to_string(params.layers.front().weight.cols()));
  }
  const bool use_dropout = training && params.dropout_rate > 0.0;
  const double keep = 1.0 - params.dropout_rate;

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input = x;
  Vector h = x;
  const std::size_t n_layers = params.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = params.layers[l];
    Vector z = layer.weight * h + layer.bias;
    cache.pre_activations.push_back(z);
    if (l + 1 == n_layers) {
      h = std::move(z);
      break;
    }
    h = z.cwiseMax(0.0);
    if (use_dropout) {
      Vector mask(h.size());
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask(i) = stream.uniform() < keep ? 1.0 / keep : 0.0;
      }
      h = h.cwiseProduct(mask);
      cache.dropout_masks.push_back(std::move(mask));
    }
    cache.activations.push_back(h);
  }

  const auto p = static_cast<Eigen::Index>(params.label_dim);
  result.prediction.mu = h.head(p);
  cache.raw_log_sigma = h.tail(p);
  result.prediction.sigma =
      cache.raw_log_sigma.cwiseMax(kLogSigmaMin).cwiseMin(kLogSigmaMax).array().exp().matrix();
  return result;
}

ForwardResult forward_eval(const MlpParams& params, const Vector& x) {
  RngStream unused(0, {});
  return forward(params, x, false, unused);
}

BackwardResult backward(const MlpParams& params, const ForwardCache& cache,
                        const Vector& grad_mu, const Vector& grad_log_sigma) {
  const auto p = static_cast<Eigen::Index>(params.label_dim);
  const std::size_t n_layers = params.layers.size();
  if (grad_mu.size() != p || grad_log_sigma.size() != p) {
    throw DomainError("backward: output gradient length does not match label dimension");
  }
  if (cache.pre_activations.size() != n_layers || cache.activations.size() + 1 != n_layers ||
      cache.input.size() != params.layers.front().weight.cols()) {
    throw DomainError("backward: cache does not match network shape");
  }
  const bool has_masks = !cache.dropout_masks.empty();

  Vector delta(2 * p);
  delta.head(p) = grad_mu;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double s = cache.raw_log_sigma(i);
    delta(p + i) = (s < kLogSigmaMin || s > kLogSigmaMax) ? 0.0 : grad_log_sigma(i);
  }

  BackwardResult result;
  result.grads = zeros_like(params.layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    const Vector& layer_input = l == 0 ? cache.input : cache.activations[l - 1];
    result.grads[l].weight.noalias() = delta * layer_input.transpose();
    result.grads[l].bias = delta;
    Vector upstream = params.layers[l].weight.transpose() * delta;
    if (l == 0) {
      result.input_grad = std::move(upstream);
      break;
    }
    const Vector& z = cache.pre_activations[l - 1];
    for (Eigen::Index i = 0; i < upstream.size(); ++i) {
      if (z(i) <= 0.0) upstream(i) = 0.0;
    }
    if (has_masks) upstream = upstream.cwiseProduct(cache.dropout_masks[l - 1]);
    delta = std::move(upstream);
  }
  return result;
}

NllResult gaussian_nll(const GaussianPrediction& pred, const Vector& y) {
  if (pred.mu.size() != y.size() || pred.sigma.size() != y.size()) {
    throw DomainError("gaussian_nll: dimension mismatch");
  }
  const auto p = y.size();
  NllResult out;
  out.grad_mu.resize(p);
  out.grad_log_sigma.resize(p);
  out.loss = 0.5 * static_cast<double>(p) * kLog2Pi;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double r = y(i) - pred.mu(i);
    const double inv_var = 1.0 / (pred.sigma(i) * pred.sigma(i));
    out.loss += std::log(pred.sigma(i)) + 0.5 * r * r * inv_var;
    out.grad_mu(i) = -r * inv_var;
    out.grad_log_sigma(i) = 1.0 - r * r * inv_var;
  }
  return out;
}

}  // namespace soebm
