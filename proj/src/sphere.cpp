#include "veesa/sphere.hpp"

#include "veesa/errors.hpp"

#include <algorithm>
#include <cmath>

namespace veesa::sphere {

double distance(const Grid& grid, const Vector& a, const Vector& b) {
  return std::acos(std::clamp(inner(grid, a, b), -1.0, 1.0));
}

Vector log_map(const Grid& grid, const Vector& base, const Vector& point) {
  const double theta = distance(grid, base, point);
  if (theta < 1e-10) return point - base;
  return (theta / std::sin(theta)) * (point - std::cos(theta) * base);
}

Vector exp_map(const Grid& grid, const Vector& base, const Vector& v) {
  const double len = l2_norm(grid, v);
  if (len < 1e-14) return base;
  Vector out = std::cos(len) * base + (std::sin(len) / len) * v;
  return out / l2_norm(grid, out);
}

Vector karcher_mean(const Grid& grid, const std::vector<Vector>& points, const MeanOptions& opts) {
  if (points.empty()) throw PreconditionError("sphere mean of an empty set");
  Vector mu = Vector::Zero(grid.size());
  for (const auto& p : points) mu += p;
  mu /= static_cast<double>(points.size());
  const double len = l2_norm(grid, mu);
  if (len < 1e-14) return points.front();
  mu /= len;

  for (int it = 0; it < opts.max_iter; ++it) {
    Vector step = Vector::Zero(grid.size());
    for (const auto& p : points) step += log_map(grid, mu, p);
    step /= static_cast<double>(points.size());
    if (l2_norm(grid, step) < opts.tol) break;
    mu = exp_map(grid, mu, step);
  }
  return mu;
}

}  // namespace veesa::sphere
