#include "veesa/efpca.hpp"

#include "veesa/errors.hpp"
#include "veesa/sphere.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace veesa {

std::string to_string(PcaVariant v) {
  switch (v) {
    case PcaVariant::vertical:
      return "vertical";
    case PcaVariant::horizontal:
      return "horizontal";
    case PcaVariant::joint:
      return "joint";
  }
  return "joint";
}

PcaVariant parse_variant(const std::string& name) {
  if (name == "vertical" || name == "vfpca") return PcaVariant::vertical;
  if (name == "horizontal" || name == "hfpca") return PcaVariant::horizontal;
  if (name == "joint" || name == "jfpca") return PcaVariant::joint;
  throw ParameterError("unknown efPCA variant '" + name + "' (expected vertical, horizontal or joint)");
}

namespace {

std::vector<Vector> shooting_vectors(const Grid& grid, const Vector& mean_psi, const std::vector<WarpingFunction>& warps) {
  std::vector<Vector> v;
  v.reserve(warps.size());
  for (const auto& w : warps) v.push_back(sphere::log_map(grid, mean_psi, w.psi()));
  return v;
}

Matrix stack(const ElasticPcaModel& model, const std::vector<SrvfCurve>& aligned_srvf,
             const std::vector<Vector>& shooting) {
  const Eigen::Index m = model.grid.size();
  const auto n = static_cast<Eigen::Index>(std::max(aligned_srvf.size(), shooting.size()));
  const Eigen::Index d = model.variant == PcaVariant::joint ? 2 * m : m;
  Matrix z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    switch (model.variant) {
      case PcaVariant::vertical:
        z.row(i) = aligned_srvf[k].values.transpose();
        break;
      case PcaVariant::horizontal:
        z.row(i) = shooting[k].transpose();
        break;
      case PcaVariant::joint:
        z.row(i).head(m) = aligned_srvf[k].values.transpose();
        z.row(i).tail(m) = model.c_constant * shooting[k].transpose();
        break;
    }
  }
  return z;
}

void check_inputs(const Grid& grid, const std::vector<SrvfCurve>& aligned_srvf, const std::vector<WarpingFunction>& warps) {
  if (aligned_srvf.size() != warps.size()) throw DimensionError("aligned SRVF and warp counts differ");
  for (const auto& q : aligned_srvf)
    if (q.values.size() != grid.size()) throw DimensionError("aligned SRVF does not match the model grid");
  for (const auto& w : warps)
    if (w.values().size() != grid.size()) throw DimensionError("warp does not match the model grid");
}

}  // namespace

double default_c_constant(const Grid& grid, const std::vector<SrvfCurve>& aligned_srvf, const std::vector<Vector>& shooting) {
  const auto n = aligned_srvf.size();
  if (n < 2) return 1.0;
  const Eigen::Index m = grid.size();
  Vector mq = Vector::Zero(m), mv = Vector::Zero(m);
  for (std::size_t i = 0; i < n; ++i) {
    mq += aligned_srvf[i].values;
    mv += shooting[i];
  }
  mq /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double var_q = 0.0, var_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    var_q += (aligned_srvf[i].values - mq).squaredNorm();
    var_v += (shooting[i] - mv).squaredNorm();
  }
  if (!(var_v > 1e-300) || !(var_q > 0.0)) return 1.0;
  return std::sqrt(var_q / var_v);
}

Matrix representation(const ElasticPcaModel& model, const std::vector<SrvfCurve>& aligned_srvf,
                      const std::vector<WarpingFunction>& warps) {
  check_inputs(model.grid, aligned_srvf, warps);
  std::vector<Vector> shooting;
  if (model.variant != PcaVariant::vertical) shooting = shooting_vectors(model.grid, model.mean_psi, warps);
  return stack(model, aligned_srvf, shooting);
}

ElasticPcaModel fit_efpca(const AlignmentResult& alignment, PcaVariant variant, std::optional<double> c) {
  const std::size_t n = alignment.aligned_srvf.size();
  if (n < 2) throw PreconditionError("efPCA needs at least 2 aligned samples");
  if (c && !(*c > 0.0)) throw ParameterError("joint efPCA constant C must be positive");
  const Grid& grid = alignment.grid;
  check_inputs(grid, alignment.aligned_srvf, alignment.warps);

  ElasticPcaModel model;
  model.variant = variant;
  model.grid = grid;
  model.mean_srvf = alignment.karcher_mean_srvf;
  model.mean_f = alignment.karcher_mean_f;
  model.mean_initial_value = 0.0;
  for (const auto& q : alignment.aligned_srvf) model.mean_initial_value += q.initial_value;
  model.mean_initial_value /= static_cast<double>(n);

  std::vector<Vector> psis(n);
  for (std::size_t i = 0; i < n; ++i) psis[i] = alignment.warps[i].psi();
  model.mean_psi = sphere::karcher_mean(grid, psis);

  std::vector<Vector> shooting;
  if (variant != PcaVariant::vertical) shooting = shooting_vectors(grid, model.mean_psi, alignment.warps);
  if (variant == PcaVariant::joint) model.c_constant = c ? *c : default_c_constant(grid, alignment.aligned_srvf, shooting);

  const Matrix z = stack(model, alignment.aligned_srvf, shooting);
  model.mean_z = z.colwise().mean().transpose();
  const Matrix centered = z.rowwise() - model.mean_z.transpose();

  const auto rows = static_cast<Eigen::Index>(n);
  const Eigen::Index rank = std::min(rows - 1, z.cols());
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  model.basis = svd.matrixV().leftCols(rank);
  // Singular values below rounding level relative to the data are zero.
  Vector sv = svd.singularValues().head(rank);
  const double floor = 1e-12 * std::max(z.norm(), std::numeric_limits<double>::min());
  sv = sv.unaryExpr([floor](double x) { return x <= floor ? 0.0 : x; });
  model.singular_values = sv.array().square() / static_cast<double>(rows - 1);

  for (Eigen::Index j = 0; j < rank; ++j) {
    Eigen::Index arg = 0;
    model.basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (model.basis(arg, j) < 0.0) model.basis.col(j) *= -1.0;
  }

  const double total = model.singular_values.sum();
  if (total > 0.0 && std::isfinite(total)) {
    model.proportion_variance = model.singular_values / total;
  } else {
    model.proportion_variance = Vector::Zero(rank);
    model.degenerate = true;
  }
  return model;
}

PcScores transform(const ElasticPcaModel& model, const std::vector<SrvfCurve>& aligned_srvf,
                   const std::vector<WarpingFunction>& warps) {
  const Matrix z = representation(model, aligned_srvf, warps);
  return (z.rowwise() - model.mean_z.transpose()) * model.basis;
}

namespace {

FunctionalSample reconstruct(const ElasticPcaModel& model, const Vector& z) {
  const Grid& grid = model.grid;
  const Eigen::Index m = grid.size();
  const auto amplitude = [&](const Vector& q) { return from_srvf(grid, SrvfCurve{q, model.mean_initial_value}); };
  const auto phase = [&](const Vector& v) {
    return WarpingFunction::from_psi(grid, sphere::exp_map(grid, model.mean_psi, v));
  };
  switch (model.variant) {
    case PcaVariant::vertical:
      return amplitude(z);
    case PcaVariant::horizontal:
      return warp_function(grid, model.mean_f, phase(z));
    case PcaVariant::joint:
      return warp_function(grid, amplitude(z.head(m)), phase(z.tail(m) / model.c_constant));
  }
  return amplitude(z);
}

}  // namespace

std::vector<DirectionCurve> principal_directions(const ElasticPcaModel& model, Eigen::Index component,
                                                 const std::vector<int>& taus) {
  if (component < 0 || component >= model.rank())
    throw ParameterError("principal component " + std::to_string(component + 1) + " out of range (rank " +
                         std::to_string(model.rank()) + ")");
  std::vector<DirectionCurve> out;
  out.push_back({0, 0, reconstruct(model, model.mean_z)});
  const double lambda = std::max(model.singular_values[component], 0.0);
  for (int tau : taus) {
    if (tau <= 0) throw ParameterError("tau values must be positive integers");
    const Vector step = std::sqrt(tau * lambda) * model.basis.col(component);
    out.push_back({tau, -1, reconstruct(model, model.mean_z - step)});
    out.push_back({tau, +1, reconstruct(model, model.mean_z + step)});
  }
  return out;
}

}  // namespace veesa
