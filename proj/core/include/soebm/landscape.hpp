#pragma once

#include <cstddef>

#include "soebm/ebm.hpp"

namespace soebm {

/// Energies on a 2-D slice a* + d1 v1 + d2 v2 through decision space.
struct LandscapeGrid {
  Vector center;
  Vector v1;
  Vector v2;
  double cos_angle = 0.0;  // v1 . v2; the directions are random, not orthogonalized
  double extent = 1.0;     // d1, d2 in [-extent, extent]
  std::size_t points = 41; // per axis, odd so (0, 0) is a grid node
  Matrix model_energy;     // E(x, a); row = d1 index, column = d2 index
  Matrix true_cost;        // f(y, a)

  double offset(std::size_t k) const;
  Vector decision(std::size_t i, std::size_t j) const;
};

/// Two random unit directions from the stream. Pairs with |v1 . v2| > max_cos
/// are redrawn so the slice is not degenerate.
std::pair<Vector, Vector> landscape_directions(std::size_t dim, RngStream& stream,
                                               double max_cos = 0.8);

LandscapeGrid compute_landscape(const EnergyModel& model, const Vector& x, const Vector& y,
                                const Vector& center, const Vector& v1, const Vector& v2,
                                double extent, std::size_t points, RngStream& stream);

}  // namespace soebm
