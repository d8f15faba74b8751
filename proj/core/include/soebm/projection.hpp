#pragma once

#include <cstddef>

#include "soebm/mlp.hpp"

namespace soebm {

struct RampProjectionOptions {
  std::size_t max_sweeps = 500;
  double tolerance = 1e-10;
};

/// Euclidean projection onto {a : |a_i - a_{i-1}| <= ramp_limit}. Exact and
/// finite: a forward pass builds the piecewise-linear derivative of the
/// cost-to-go along the chain, a backward pass clamps each coordinate into the
/// window left by its successor. O(d^2).
Vector project_ramp(const Vector& a, double ramp_limit);

/// The same projection by Dykstra's alternating projections, with the odd and
/// even difference slabs as the two sets. After each sweep the active set the
/// iterate suggests is solved exactly and kept if it passes a KKT check.
/// Throws NumericalError when the sweep cap is reached first.
Vector project_ramp_dykstra(const Vector& a, double ramp_limit,
                            const RampProjectionOptions& opts = {});

/// max_i (|a_i - a_{i-1}| - ramp_limit), floored at 0.
double ramp_violation(const Vector& a, double ramp_limit);

}  // namespace soebm
