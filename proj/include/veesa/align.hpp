#pragma once

#include "veesa/fdata.hpp"

#include <utility>
#include <vector>

namespace veesa {

/// Orientation-preserving reparameterization of [0, 1], sampled on the
/// normalized grid, together with psi = sqrt(gamma').
class WarpingFunction {
 public:
  WarpingFunction() = default;
  /// Pins the endpoints to exactly 0 and 1. Throws if the values leave
  /// [0, 1] by more than rounding, or decrease anywhere.
  WarpingFunction(const Grid& grid, Vector gamma);

  static WarpingFunction identity(const Grid& grid);
  /// gamma(t) = int_0^t psi^2, rescaled to end at 1.
  static WarpingFunction from_psi(const Grid& grid, const Vector& psi);

  const Vector& values() const { return gamma_; }
  const Vector& psi() const { return psi_; }

 private:
  Vector gamma_;
  Vector psi_;
};

/// gamma1 o gamma2.
WarpingFunction compose(const Grid& grid, const WarpingFunction& outer, const WarpingFunction& inner);
WarpingFunction invert(const Grid& grid, const WarpingFunction& g);

/// f o gamma on the grid.
FunctionalSample warp_function(const Grid& grid, const FunctionalSample& f, const WarpingFunction& g);
/// (q o gamma) sqrt(gamma').
SrvfCurve warp_srvf(const Grid& grid, const SrvfCurve& q, const WarpingFunction& g);

/// Local slope steps (di, dj) allowed in the dynamic-programming lattice.
struct StepSet {
  std::vector<std::pair<int, int>> steps;

  /// {(1,1),(1,2),(2,1),(1,3),(3,1),(2,3),(3,2)}
  static StepSet standard();
  /// Every coprime (a, b) with 1 <= a, b <= max_step.
  static StepSet coprime(int max_step);
  int max_span() const;
};

/// Cost of matching q1 on grid cells [k, i] against q2 on cells [l, j] with
/// a linear warp: both curves sampled at max(i-k, j-l)+1 evenly spaced
/// index positions, trapezoid rule in t. Exposed for oracle testing.
class SegmentCost {
 public:
  SegmentCost(const Grid& grid, const Vector& q1, const Vector& q2, const StepSet& steps);
  /// Any (di, dj) with di, dj >= 1 whose span fits the step set's tables.
  double operator()(int k, int l, int i, int j) const;
  /// Cost of steps.steps[step] arriving from (k, l).
  double step_cost(std::size_t step, int k, int l) const;

 private:
  struct Plan {
    int di = 0, dj = 0;
    // Per sample s: base pointers already offset by the whole-cell shift.
    std::vector<const double*> q1, q2;
  };
  Plan make_plan(int di, int dj) const;
  double evaluate(const Plan& plan, int k, int l) const;

  const Vector& t_;
  int max_span_ = 1;
  // table[span][remainder]: curve at fractional index c + remainder/span.
  std::vector<std::vector<Vector>> q1_at_;
  std::vector<std::vector<Vector>> q2_at_;
  std::vector<Plan> plans_;
};

struct WarpResult {
  WarpingFunction warp;
  /// Squared L2 mismatch accumulated along the optimal lattice path.
  double cost_squared = 0.0;
  double distance() const;
  /// Lattice nodes (i, j) of the path from (0, 0) to (m-1, m-1).
  std::vector<std::pair<int, int>> path;
};

/// gamma* = argmin ||q1 - (q2 o gamma) sqrt(gamma')|| over lattice paths.
WarpResult optimal_warp(const Grid& grid, const SrvfCurve& q1, const SrvfCurve& q2,
                        const StepSet& steps = StepSet::standard());

/// arccos of the psi inner product, clamped; psi taken per grid cell.
double phase_distance(const Grid& grid, const WarpingFunction& g1, const WarpingFunction& g2);

double amplitude_distance(const Grid& grid, const FunctionalSample& f1, const FunctionalSample& f2,
                          const StepSet& steps = StepSet::standard());

struct AlignmentOptions {
  int max_iter = 20;
  double tol = 1e-4;
  StepSet steps = StepSet::standard();
  /// When the warps are recentered so their sphere mean is the identity.
  enum class Recenter { none, final, every_iteration };
  Recenter recenter = Recenter::final;
};

struct AlignmentResult {
  Grid grid;
  SrvfCurve karcher_mean_srvf;
  FunctionalSample karcher_mean_f;
  std::vector<FunctionalSample> aligned;
  std::vector<SrvfCurve> aligned_srvf;
  std::vector<WarpingFunction> warps;
  int iterations = 0;
  bool converged = false;
  /// Sum of squared amplitude distances to the mean at each iteration.
  std::vector<double> objective;
  /// Same sum for the final pass against the (recentered) mean.
  double final_objective = 0.0;
  /// Relative L2 change of the mean SRVF at each iteration.
  std::vector<double> mean_change;
};

AlignmentResult karcher_mean(const FunctionalDataset& data, const AlignmentOptions& opts = {});

struct TestAlignment {
  std::vector<SrvfCurve> aligned_srvf;
  std::vector<WarpingFunction> warps;
};

/// Aligns each function's SRVF to a fixed mean (the training Karcher mean).
TestAlignment align_to_mean(const FunctionalDataset& test, const Grid& train_grid, const SrvfCurve& mean_srvf,
                            const StepSet& steps = StepSet::standard());

}  // namespace veesa
