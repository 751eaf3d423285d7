#pragma once

#include "veesa/fdata.hpp"

#include <vector>

namespace veesa::sphere {

// Geometry of the unit Hilbert sphere that holds psi = sqrt(gamma'), with the
// L2 inner product taken on the normalized grid.

/// Arc length between two points on the sphere.
double distance(const Grid& grid, const Vector& a, const Vector& b);

/// Inverse exponential map: tangent vector at `base` pointing to `point`.
Vector log_map(const Grid& grid, const Vector& base, const Vector& point);

/// Exponential map of tangent vector `v` at `base`.
Vector exp_map(const Grid& grid, const Vector& base, const Vector& v);

struct MeanOptions {
  int max_iter = 20;
  double tol = 1e-6;
};

/// Karcher mean by averaging in the tangent space and mapping back.
Vector karcher_mean(const Grid& grid, const std::vector<Vector>& points, const MeanOptions& opts = {});

}  // namespace veesa::sphere
