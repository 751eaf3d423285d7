#pragma once

#include "veesa/align.hpp"
#include "veesa/fdata.hpp"
#include "veesa/random.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace veesa::testing {

inline FunctionalSample sample_of(const Vector& v) { return FunctionalSample{v}; }

inline Vector gaussian_bump(const Vector& t, double height, double center, double width) {
  return t.unaryExpr([=](double x) { return height * std::exp(-(x - center) * (x - center) / (2 * width * width)); });
}

inline Vector sinusoid(const Vector& t, double amp, double freq, double phase) {
  return t.unaryExpr([=](double x) { return amp * std::sin(2 * std::numbers::pi * freq * x + phase); });
}

// Smooth random function on [0,1]: two bumps plus a slow trend.
inline Vector random_smooth(const Vector& t, Rng& rng) {
  const double h1 = rng.normal(1.0, 0.3), c1 = 0.2 + 0.25 * rng.uniform();
  const double h2 = rng.normal(0.6, 0.2), c2 = 0.55 + 0.25 * rng.uniform();
  const double slope = rng.normal(0.0, 0.3);
  return gaussian_bump(t, h1, c1, 0.06) + gaussian_bump(t, h2, c2, 0.08) + slope * t;
}

// gamma(t) = t + a t (1 - t), monotone for |a| < 1.
inline WarpingFunction quadratic_warp(const Grid& g, double a) {
  const Vector& t = g.normalized();
  return WarpingFunction(g, t.unaryExpr([a](double x) { return x + a * x * (1 - x); }));
}

// Minimum lattice-path cost by exhaustive enumeration, summing segment costs
// from the start so the additions happen in the same order as a forward DP.
inline double brute_force(const SegmentCost& cost, const StepSet& steps, int m) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int, double)> walk = [&](int i, int j, double acc) {
    if (i == m - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    for (auto [di, dj] : steps.steps) {
      if (i + di < m && j + dj < m) walk(i + di, j + dj, acc + cost(i, j, i + di, j + dj));
    }
  };
  walk(0, 0, 0.0);
  return best;
}

inline double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace veesa::testing
