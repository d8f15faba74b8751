#pragma once

#include <cstdint>

#include "soebm/mlp.hpp"

namespace soebm {

struct AdamState {
  LayerSet first_moment;
  LayerSet second_moment;
  std::uint64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const MlpParams& params, double learning_rate);

/// Bias-corrected Adam update. Throws TrainingError on a non-finite gradient,
/// leaving params and state untouched.
void adam_step(MlpParams& params, const LayerSet& grads, AdamState& state);

}  // namespace soebm
