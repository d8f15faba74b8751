#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "soebm/mlp.hpp"
#include "soebm/rng.hpp"

namespace soebm::testing {

inline double rel_err(double approx, double exact, double floor = 1e-8) {
  return std::abs(approx - exact) / std::max({std::abs(approx), std::abs(exact), floor});
}

/// Composite Simpson's rule with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline RngStream test_stream(std::uint32_t index = 0, std::uint64_t seed = 1234) {
  return RngStream(seed, {0, index, StreamPurpose::kTest});
}

inline Vector random_vector(RngStream& s, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * s.uniform();
  return v;
}

}  // namespace soebm::testing
