#include "soebm/adam.hpp"

#include <cmath>

#include "soebm/error.hpp"

namespace soebm {

AdamState make_adam_state(const MlpParams& params, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("Adam: learning rate must be positive");
  AdamState state;
  state.first_moment = zeros_like(params.layers);
  state.second_moment = zeros_like(params.layers);
  state.learning_rate = learning_rate;
  return state;
}

void adam_step(MlpParams& params, const LayerSet& grads, AdamState& state) {
  if (grads.size() != params.layers.size() || state.first_moment.size() != grads.size()) {
    throw DomainError("adam_step: shape mismatch");
  }
  if (!all_finite(grads)) throw TrainingError("adam_step: non-finite gradient");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double lr = state.learning_rate;
  const double eps = state.epsilon;

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < grads.size(); ++l) {
    update(params.layers[l].weight, grads[l].weight, state.first_moment[l].weight,
           state.second_moment[l].weight);
    update(params.layers[l].bias, grads[l].bias, state.first_moment[l].bias,
           state.second_moment[l].bias);
  }
}

}  // namespace soebm
