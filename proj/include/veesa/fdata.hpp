#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace veesa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sampling abscissae shared by every function in a dataset. Keeps the
/// user's points and an affine copy on [0, 1] where all computation happens.
class Grid {
 public:
  Grid() = default;
  explicit Grid(Vector points);

  static Grid uniform(double lo, double hi, Eigen::Index m);

  const Vector& points() const { return points_; }
  const Vector& normalized() const { return normalized_; }
  Eigen::Index size() const { return points_.size(); }

  /// Maps a normalized abscissa back to original units.
  double to_original(double u) const { return lo_ + u * (hi_ - lo_); }
  double span() const { return hi_ - lo_; }

  /// Largest gap between normalized points.
  double max_spacing() const;

  bool operator==(const Grid& other) const { return points_ == other.points_; }

 private:
  Vector points_;
  Vector normalized_;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

struct FunctionalSample {
  Vector values;
  double initial_value() const { return values.size() > 0 ? values[0] : 0.0; }
};

/// Square-root velocity representation. The constant of integration lost by
/// differentiation is kept in initial_value.
struct SrvfCurve {
  Vector values;
  double initial_value = 0.0;
};

struct FunctionalDataset {
  Grid grid;
  std::vector<FunctionalSample> samples;
  std::optional<std::vector<std::string>> labels;

  std::size_t size() const { return samples.size(); }
  bool labeled() const { return labels.has_value(); }

  /// Throws DimensionError / PreconditionError when the invariants fail.
  void validate() const;

  FunctionalDataset subset(const std::vector<std::size_t>& rows) const;
  /// n x m matrix of sample values, one row per function.
  Matrix values_matrix() const;
};

// Quadrature and interpolation on arbitrary increasing abscissae.
double trapz(const Vector& x, const Vector& y);
Vector cumtrapz(const Vector& x, const Vector& y);
/// Piecewise-linear interpolation of (x, y) at xq; clamps outside [x0, xn].
Vector interp(const Vector& x, const Vector& y, const Vector& xq);
double interp(const Vector& x, const Vector& y, double xq);

/// L2 inner product and norm on the normalized grid.
double inner(const Grid& grid, const Vector& a, const Vector& b);
double l2_norm(const Grid& grid, const Vector& a);

/// Centered 3-point moving average applied `runs` times; endpoints use the
/// 2-point window that fits.
FunctionalSample box_filter(const FunctionalSample& f, int runs);
FunctionalDataset box_filter(const FunctionalDataset& data, int runs);

/// Centered differences inside, one-sided at the ends, on the normalized grid.
Vector derivative(const Grid& grid, const Vector& values);

SrvfCurve to_srvf(const Grid& grid, const FunctionalSample& f);
FunctionalSample from_srvf(const Grid& grid, const SrvfCurve& q);

}  // namespace veesa
