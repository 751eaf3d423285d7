#pragma once

#include "veesa/align.hpp"
#include "veesa/fdata.hpp"

#include <optional>
#include <string>
#include <vector>

namespace veesa {

enum class PcaVariant { vertical, horizontal, joint };

std::string to_string(PcaVariant v);
PcaVariant parse_variant(const std::string& name);

/// Fitted elastic functional PCA. Representation vectors z are the aligned
/// SRVF (vertical), the shooting vector of psi at the training psi mean
/// (horizontal), or both stacked with the phase block scaled by C (joint).
struct ElasticPcaModel {
  PcaVariant variant = PcaVariant::joint;
  Grid grid;
  Vector mean_z;
  /// Columns are principal directions, orthonormal in R^d.
  Matrix basis;
  /// Eigenvalues of the sample covariance of z, nonincreasing.
  Vector singular_values;
  Vector proportion_variance;
  double c_constant = 1.0;
  bool degenerate = false;

  // Training-alignment context needed for test projection and reconstruction.
  SrvfCurve mean_srvf;
  FunctionalSample mean_f;
  Vector mean_psi;
  double mean_initial_value = 0.0;

  Eigen::Index rank() const { return basis.cols(); }
  Eigen::Index dimension() const { return basis.rows(); }
};

/// n x p matrix of principal coefficients.
using PcScores = Matrix;

/// Representation vectors z_i stacked as rows, using the model's tangent
/// base point and C.
Matrix representation(const ElasticPcaModel& model, const std::vector<SrvfCurve>& aligned_srvf,
                      const std::vector<WarpingFunction>& warps);

/// Total amplitude sd over total phase sd: scales the two joint blocks to
/// comparable variance. Falls back to 1 when the phase block has no spread.
double default_c_constant(const Grid& grid, const std::vector<SrvfCurve>& aligned_srvf,
                          const std::vector<Vector>& shooting);

ElasticPcaModel fit_efpca(const AlignmentResult& alignment, PcaVariant variant, std::optional<double> c = std::nullopt);

PcScores transform(const ElasticPcaModel& model, const std::vector<SrvfCurve>& aligned_srvf,
                   const std::vector<WarpingFunction>& warps);

struct DirectionCurve {
  int tau = 0;
  /// -1, 0 (mean) or +1.
  int sign = 0;
  FunctionalSample curve;
};

/// Curves mean_z +/- sqrt(tau * lambda_j) u_j mapped back to function
/// space; the tau = 0 mean curve comes first. `component` is zero-based.
std::vector<DirectionCurve> principal_directions(const ElasticPcaModel& model, Eigen::Index component,
                                                 const std::vector<int>& taus);

}  // namespace veesa
