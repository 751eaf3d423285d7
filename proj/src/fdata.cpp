#include "veesa/fdata.hpp"

#include "veesa/errors.hpp"

#include <algorithm>
#include <cmath>

namespace veesa {

Grid::Grid(Vector points) : points_(std::move(points)) {
  if (points_.size() < 3) throw PreconditionError("grid needs at least 3 points");
  for (Eigen::Index i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw PreconditionError("grid points must be finite");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw PreconditionError("grid points must be strictly increasing");
  }
  lo_ = points_[0];
  hi_ = points_[points_.size() - 1];
  normalized_ = (points_.array() - lo_) / (hi_ - lo_);
  normalized_[0] = 0.0;
  normalized_[normalized_.size() - 1] = 1.0;
}

Grid Grid::uniform(double lo, double hi, Eigen::Index m) {
  if (m < 3) throw PreconditionError("grid needs at least 3 points");
  return Grid(Vector::LinSpaced(m, lo, hi));
}

double Grid::max_spacing() const {
  double h = 0.0;
  for (Eigen::Index i = 1; i < normalized_.size(); ++i)
    h = std::max(h, normalized_[i] - normalized_[i - 1]);
  return h;
}

void FunctionalDataset::validate() const {
  if (grid.size() < 3) throw PreconditionError("dataset grid needs at least 3 points");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& v = samples[i].values;
    if (v.size() != grid.size())
      throw DimensionError("sample " + std::to_string(i) + " has " + std::to_string(v.size()) +
                           " values but the grid has " + std::to_string(grid.size()));
    if (!v.allFinite()) throw PreconditionError("sample " + std::to_string(i) + " has non-finite values");
  }
  if (labels && labels->size() != samples.size())
    throw DimensionError("label count does not match sample count");
}

FunctionalDataset FunctionalDataset::subset(const std::vector<std::size_t>& rows) const {
  FunctionalDataset out;
  out.grid = grid;
  out.samples.reserve(rows.size());
  if (labels) out.labels.emplace();
  for (auto r : rows) {
    out.samples.push_back(samples.at(r));
    if (labels) out.labels->push_back(labels->at(r));
  }
  return out;
}

Matrix FunctionalDataset::values_matrix() const {
  Matrix m(static_cast<Eigen::Index>(samples.size()), grid.size());
  for (std::size_t i = 0; i < samples.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = samples[i].values.transpose();
  return m;
}

double trapz(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

Vector cumtrapz(const Vector& x, const Vector& y) {
  Vector out(x.size());
  if (x.size() == 0) return out;
  out[0] = 0.0;
  for (Eigen::Index i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

double interp(const Vector& x, const Vector& y, double xq) {
  const Eigen::Index n = x.size();
  if (xq <= x[0]) return y[0];
  if (xq >= x[n - 1]) return y[n - 1];
  const double* begin = x.data();
  const auto it = std::upper_bound(begin, begin + n, xq);
  const Eigen::Index hi = it - begin;
  const Eigen::Index lo = hi - 1;
  const double w = (xq - x[lo]) / (x[hi] - x[lo]);
  return (1.0 - w) * y[lo] + w * y[hi];
}

Vector interp(const Vector& x, const Vector& y, const Vector& xq) {
  Vector out(xq.size());
  for (Eigen::Index i = 0; i < xq.size(); ++i) out[i] = interp(x, y, xq[i]);
  return out;
}

double inner(const Grid& grid, const Vector& a, const Vector& b) {
  return trapz(grid.normalized(), a.cwiseProduct(b));
}

double l2_norm(const Grid& grid, const Vector& a) { return std::sqrt(std::max(0.0, inner(grid, a, a))); }

FunctionalSample box_filter(const FunctionalSample& f, int runs) {
  if (runs < 0) throw ParameterError("box filter runs must be nonnegative");
  FunctionalSample out = f;
  const Eigen::Index m = out.values.size();
  if (m < 2) return out;
  Vector next(m);
  for (int r = 0; r < runs; ++r) {
    const Vector& v = out.values;
    next[0] = (v[0] + v[1]) / 2.0;
    for (Eigen::Index i = 1; i + 1 < m; ++i) next[i] = (v[i - 1] + v[i] + v[i + 1]) / 3.0;
    next[m - 1] = (v[m - 2] + v[m - 1]) / 2.0;
    out.values.swap(next);
  }
  return out;
}

FunctionalDataset box_filter(const FunctionalDataset& data, int runs) {
  FunctionalDataset out = data;
  if (runs == 0) return out;
  for (auto& s : out.samples) s = box_filter(s, runs);
  return out;
}

Vector derivative(const Grid& grid, const Vector& values) {
  if (values.size() != grid.size()) throw DimensionError("derivative: values do not match grid");
  const Vector& t = grid.normalized();
  const Eigen::Index m = t.size();
  Vector d(m);
  d[0] = (values[1] - values[0]) / (t[1] - t[0]);
  for (Eigen::Index i = 1; i + 1 < m; ++i) d[i] = (values[i + 1] - values[i - 1]) / (t[i + 1] - t[i - 1]);
  d[m - 1] = (values[m - 1] - values[m - 2]) / (t[m - 1] - t[m - 2]);
  return d;
}

SrvfCurve to_srvf(const Grid& grid, const FunctionalSample& f) {
  const Vector d = derivative(grid, f.values);
  SrvfCurve q;
  q.values = d.unaryExpr([](double x) { return std::copysign(std::sqrt(std::abs(x)), x); });
  q.initial_value = f.initial_value();
  return q;
}

FunctionalSample from_srvf(const Grid& grid, const SrvfCurve& q) {
  if (q.values.size() != grid.size()) throw DimensionError("from_srvf: curve does not match grid");
  const Vector speed = q.values.cwiseProduct(q.values.cwiseAbs());
  FunctionalSample f;
  f.values = cumtrapz(grid.normalized(), speed).array() + q.initial_value;
  return f;
}

}  // namespace veesa
