#include "soebm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "soebm/error.hpp"

namespace soebm {

double ramp_violation(const Vector& a, double ramp_limit) {
  double worst = 0.0;
  for (Eigen::Index i = 1; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a(i) - a(i - 1)) - ramp_limit);
  }
  return worst;
}

namespace {

// Exact projection for a guessed active set. Differences with
// |x_i - x_{i-1}| >= c - guess_tol are fixed to sign * c; coordinates linked
// by fixed differences form blocks that shift together, each block placed at
// the mean of (a - offsets). The result is returned only if it is feasible and
// its multipliers have the right signs (KKT), which certifies optimality.
std::optional<Vector> polish_active_set(const Vector& a, const Vector& x, double c) {
  const Eigen::Index d = a.size();
  const double guess_tol = 1e-6 * c;
  const double kkt_tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
  std::vector<double> sign(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index i = 1; i < d; ++i) {
    const double diff = x(i) - x(i - 1);
    if (std::abs(diff) >= c - guess_tol) sign[static_cast<std::size_t>(i)] = diff > 0 ? 1.0 : -1.0;
  }
  Vector p(d);
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && sign[static_cast<std::size_t>(end)] != 0.0) ++end;
    Vector offset(end - start);
    offset(0) = 0.0;
    for (Eigen::Index i = start + 1; i < end; ++i) {
      offset(i - start) = offset(i - start - 1) + sign[static_cast<std::size_t>(i)] * c;
    }
    const double base = (a.segment(start, end - start) - offset).mean();
    p.segment(start, end - start) = offset.array() + base;
    // Multiplier of constraint i is the running sum of -(a - p) over the block.
    double nu = 0.0;
    for (Eigen::Index i = start + 1; i < end; ++i) {
      nu -= a(i - 1) - p(i - 1);
      if (nu * sign[static_cast<std::size_t>(i)] < -kkt_tol) return std::nullopt;
    }
    start = end;
  }
  if (ramp_violation(p, c) > kkt_tol) return std::nullopt;
  return p;
}

}  // namespace

Vector project_ramp_dykstra(const Vector& a, double ramp_limit, const RampProjectionOptions& opts) {
  if (!(ramp_limit > 0.0)) throw DomainError("project_ramp_dykstra: ramp limit must be positive");
  if (!a.allFinite()) throw DomainError("project_ramp_dykstra: non-finite input");
  const Eigen::Index d = a.size();
  if (d < 2) return a;

  // The difference slabs |a_i - a_{i-1}| <= c split into two groups, odd i and
  // even i, whose slabs touch disjoint coordinate pairs. The projection onto
  // each group is therefore exact pairwise clamping, and Dykstra alternates
  // between the two groups. After every sweep the active set suggested by the
  // iterate is tried for an exact, certified finish.
  auto project_group = [&](Vector& v, Eigen::Index first) {
    for (Eigen::Index i = first; i < d; i += 2) {
      const double diff = v(i) - v(i - 1);
      const double excess = std::abs(diff) - ramp_limit;
      if (excess > 0.0) {
        const double shift = std::copysign(0.5 * excess, diff);
        v(i) -= shift;
        v(i - 1) += shift;
      }
    }
  };

  Vector x = a;
  Vector corr_odd = Vector::Zero(d);
  Vector corr_even = Vector::Zero(d);
  double movement = 0.0;
  for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    Vector y = x + corr_odd;
    project_group(y, 1);
    corr_odd = x + corr_odd - y;
    Vector z = y + corr_even;
    project_group(z, 2);
    corr_even = y + corr_even - z;
    movement = (z - x).cwiseAbs().maxCoeff();
    x = std::move(z);
    if (movement < opts.tolerance && ramp_violation(x, ramp_limit) <= opts.tolerance) return x;
    if (auto exact = polish_active_set(a, x, ramp_limit)) return *exact;
  }
  std::ostringstream msg;
  msg << "project_ramp_dykstra: Dykstra did not converge in " << opts.max_sweeps
      << " sweeps (last movement " << movement << ", violation "
      << ramp_violation(x, ramp_limit) << ")";
  throw NumericalError(msg.str());
}

namespace {

// Derivative of the cost-to-go along the chain: continuous, piecewise linear
// and strictly increasing. Knots are sorted; outside them the function
// continues with the given end slopes.
struct PiecewiseLinear {
  std::vector<double> x;
  std::vector<double> h;
  double left_slope = 1.0;
  double right_slope = 1.0;

  double root() const {
    if (h.front() >= 0.0) return x.front() - h.front() / left_slope;
    if (h.back() <= 0.0) return x.back() - h.back() / right_slope;
    std::size_t k = 1;
    while (h[k] < 0.0) ++k;
    const double t = -h[k - 1] / (h[k] - h[k - 1]);
    return x[k - 1] + t * (x[k] - x[k - 1]);
  }
};

}  // namespace

Vector project_ramp(const Vector& a, double ramp_limit) {
  if (!(ramp_limit > 0.0)) throw DomainError("project_ramp: ramp limit must be positive");
  if (!a.allFinite()) throw DomainError("project_ramp: non-finite input");
  const Eigen::Index d = a.size();
  if (d < 2) return a;
  const double c = ramp_limit;

  // F_i(v) = (v - a_i)^2 / 2 + min_{|u - v| <= c} F_{i-1}(u). The inner
  // minimum is F_{i-1} shifted outward by c on each side of its minimizer and
  // flat in between, so its derivative is the old derivative split at the
  // root with a zero segment of width 2c inserted.
  PiecewiseLinear deriv{{a(0)}, {0.0}};
  std::vector<double> minimizer(static_cast<std::size_t>(d));
  for (Eigen::Index i = 1; i < d; ++i) {
    const double u = deriv.root();
    minimizer[static_cast<std::size_t>(i - 1)] = u;
    PiecewiseLinear next;
    next.left_slope = deriv.left_slope + 1.0;
    next.right_slope = deriv.right_slope + 1.0;
    auto push = [&](double x, double h) {
      next.x.push_back(x);
      next.h.push_back(h + x - a(i));
    };
    for (std::size_t k = 0; k < deriv.x.size() && deriv.x[k] < u; ++k) push(deriv.x[k] - c, deriv.h[k]);
    push(u - c, 0.0);
    push(u + c, 0.0);
    for (std::size_t k = 0; k < deriv.x.size(); ++k) {
      if (deriv.x[k] > u) push(deriv.x[k] + c, deriv.h[k]);
    }
    deriv = std::move(next);
  }

  Vector p(d);
  p(d - 1) = deriv.root();
  for (Eigen::Index i = d - 1; i > 0; --i) {
    p(i - 1) = std::clamp(minimizer[static_cast<std::size_t>(i - 1)], p(i) - c, p(i) + c);
  }
  if (!p.allFinite()) throw NumericalError("project_ramp: non-finite result");
  return p;
}

}  // namespace soebm
