#include "soebm/landscape.hpp"

#include <cmath>

#include "soebm/error.hpp"

namespace soebm {

double LandscapeGrid::offset(std::size_t k) const {
  if (points == 1) return 0.0;
  const double half = static_cast<double>(points - 1) / 2.0;
  return extent * (static_cast<double>(k) - half) / half;
}

Vector LandscapeGrid::decision(std::size_t i, std::size_t j) const {
  return center + offset(i) * v1 + offset(j) * v2;
}

std::pair<Vector, Vector> landscape_directions(std::size_t dim, RngStream& stream,
                                               double max_cos) {
  if (dim < 1) throw DomainError("landscape_directions: dimension must be positive");
  auto unit = [&] {
    Vector v(static_cast<Eigen::Index>(dim));
    for (;;) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = stream.normal();
      const double n = v.norm();
      if (n > 1e-12) return Vector(v / n);
    }
  };
  Vector v1 = unit();
  Vector v2 = unit();
  if (dim > 1) {
    while (std::abs(v1.dot(v2)) > max_cos) v2 = unit();
  }
  return {std::move(v1), std::move(v2)};
}

LandscapeGrid compute_landscape(const EnergyModel& model, const Vector& x, const Vector& y,
                                const Vector& center, const Vector& v1, const Vector& v2,
                                double extent, std::size_t points, RngStream& stream) {
  model.validate();
  if (points < 1 || points % 2 == 0) throw DomainError("landscape: points must be odd");
  if (!(extent > 0.0)) throw DomainError("landscape: extent must be positive");
  const auto d = static_cast<Eigen::Index>(model.task->decision_dim());
  if (center.size() != d || v1.size() != d || v2.size() != d) {
    throw DomainError("landscape: vectors do not match decision dimension");
  }
  LandscapeGrid grid;
  grid.center = center;
  grid.v1 = v1;
  grid.v2 = v2;
  grid.cos_angle = v1.dot(v2);
  grid.extent = extent;
  grid.points = points;
  const auto n = static_cast<Eigen::Index>(points);
  grid.model_energy.resize(n, n);
  grid.true_cost.resize(n, n);

  const auto fwd = forward_eval(model.params, x);
  const Matrix eps = draw_expectation_noise(model, stream);
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = 0; j < points; ++j) {
      const Vector a = grid.decision(i, j);
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      grid.model_energy(r, c) = energy_at(model, fwd.prediction, a, eps).value;
      grid.true_cost(r, c) = model.task->cost(y, a);
    }
  }
  return grid;
}

}  // namespace soebm
