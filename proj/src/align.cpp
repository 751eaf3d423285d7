#include "veesa/align.hpp"

#include "veesa/errors.hpp"
#include "veesa/parallel.hpp"
#include "veesa/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace veesa {

namespace {

void require_same_size(const Grid& grid, const Vector& v, const char* what) {
  if (v.size() != grid.size())
    throw DimensionError(std::string(what) + ": expected " + std::to_string(grid.size()) + " values, got " +
                         std::to_string(v.size()));
}

Vector psi_of(const Grid& grid, const Vector& gamma) {
  return derivative(grid, gamma).unaryExpr([](double d) { return std::sqrt(std::max(d, 0.0)); });
}

}  // namespace

WarpingFunction::WarpingFunction(const Grid& grid, Vector gamma) : gamma_(std::move(gamma)) {
  require_same_size(grid, gamma_, "warping function");
  constexpr double slack = 1e-9;
  const Eigen::Index m = gamma_.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::isfinite(gamma_[i]) || gamma_[i] < -slack || gamma_[i] > 1.0 + slack)
      throw PreconditionError("warping function leaves [0, 1]");
    if (i > 0 && gamma_[i] < gamma_[i - 1] - slack) throw PreconditionError("warping function must be nondecreasing");
  }
  gamma_[0] = 0.0;
  gamma_[m - 1] = 1.0;
  for (Eigen::Index i = 1; i < m; ++i) gamma_[i] = std::clamp(gamma_[i], gamma_[i - 1], 1.0);
  psi_ = psi_of(grid, gamma_);
}

WarpingFunction WarpingFunction::identity(const Grid& grid) { return WarpingFunction(grid, grid.normalized()); }

WarpingFunction WarpingFunction::from_psi(const Grid& grid, const Vector& psi) {
  require_same_size(grid, psi, "psi");
  Vector gamma = cumtrapz(grid.normalized(), psi.cwiseProduct(psi));
  const double total = gamma[gamma.size() - 1];
  if (!(total > 0.0)) return identity(grid);
  return WarpingFunction(grid, gamma / total);
}

WarpingFunction compose(const Grid& grid, const WarpingFunction& outer, const WarpingFunction& inner) {
  return WarpingFunction(grid, interp(grid.normalized(), outer.values(), inner.values()));
}

WarpingFunction invert(const Grid& grid, const WarpingFunction& g) {
  return WarpingFunction(grid, interp(g.values(), grid.normalized(), grid.normalized()));
}

FunctionalSample warp_function(const Grid& grid, const FunctionalSample& f, const WarpingFunction& g) {
  require_same_size(grid, f.values, "warp_function");
  return FunctionalSample{interp(grid.normalized(), f.values, g.values())};
}

SrvfCurve warp_srvf(const Grid& grid, const SrvfCurve& q, const WarpingFunction& g) {
  require_same_size(grid, q.values, "warp_srvf");
  SrvfCurve out;
  out.values = interp(grid.normalized(), q.values, g.values()).cwiseProduct(g.psi());
  out.initial_value = q.initial_value;
  return out;
}

StepSet StepSet::standard() { return StepSet{{{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}, {2, 3}, {3, 2}}}; }

StepSet StepSet::coprime(int max_step) {
  if (max_step < 1) throw ParameterError("step set needs max_step >= 1");
  StepSet s;
  s.steps.emplace_back(1, 1);
  for (int a = 1; a <= max_step; ++a)
    for (int b = 1; b <= max_step; ++b)
      if ((a != 1 || b != 1) && std::gcd(a, b) == 1) s.steps.emplace_back(a, b);
  return s;
}

int StepSet::max_span() const {
  int s = 1;
  for (auto [a, b] : steps) s = std::max({s, a, b});
  return s;
}

namespace {

// table[span][r][c] = v at fractional index c + r/span.
std::vector<std::vector<Vector>> fractional_table(const Vector& v, int max_span) {
  const Eigen::Index m = v.size();
  std::vector<std::vector<Vector>> table(static_cast<std::size_t>(max_span) + 1);
  for (int span = 1; span <= max_span; ++span) {
    auto& rows = table[static_cast<std::size_t>(span)];
    rows.resize(static_cast<std::size_t>(span));
    rows[0] = v;
    for (int r = 1; r < span; ++r) {
      const double w = static_cast<double>(r) / span;
      Vector at(m);
      for (Eigen::Index c = 0; c + 1 < m; ++c) at[c] = (1.0 - w) * v[c] + w * v[c + 1];
      at[m - 1] = v[m - 1];
      rows[static_cast<std::size_t>(r)] = std::move(at);
    }
  }
  return table;
}

}  // namespace

SegmentCost::SegmentCost(const Grid& grid, const Vector& q1, const Vector& q2, const StepSet& steps)
    : t_(grid.normalized()) {
  require_same_size(grid, q1, "optimal_warp q1");
  require_same_size(grid, q2, "optimal_warp q2");
  max_span_ = steps.max_span();
  q1_at_ = fractional_table(q1, max_span_);
  q2_at_ = fractional_table(q2, max_span_);
  for (auto [di, dj] : steps.steps) plans_.push_back(make_plan(di, dj));
}

SegmentCost::Plan SegmentCost::make_plan(int di, int dj) const {
  if (di < 1 || dj < 1 || std::max(di, dj) > max_span_) throw ParameterError("segment step outside the lattice");
  const int span = std::max(di, dj);
  Plan p;
  p.di = di;
  p.dj = dj;
  const auto& t1 = q1_at_[static_cast<std::size_t>(span)];
  const auto& t2 = q2_at_[static_cast<std::size_t>(span)];
  for (int s = 0; s <= span; ++s) {
    p.q1.push_back(t1[static_cast<std::size_t>((s * di) % span)].data() + (s * di) / span);
    p.q2.push_back(t2[static_cast<std::size_t>((s * dj) % span)].data() + (s * dj) / span);
  }
  return p;
}

double SegmentCost::evaluate(const Plan& plan, int k, int l) const {
  const int i = k + plan.di;
  const int j = l + plan.dj;
  const auto span = plan.q1.size() - 1;
  const double dt = t_[i] - t_[k];
  const double root_slope = std::sqrt((t_[j] - t_[l]) / dt);
  const double h = dt / static_cast<double>(span);
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t s = 0; s <= span; ++s) {
    const double e = plan.q1[s][k] - root_slope * plan.q2[s][l];
    const double e2 = e * e;
    if (s > 0) total += 0.5 * h * (prev + e2);
    prev = e2;
  }
  return total;
}

double SegmentCost::step_cost(std::size_t step, int k, int l) const { return evaluate(plans_[step], k, l); }

double SegmentCost::operator()(int k, int l, int i, int j) const {
  for (const auto& p : plans_)
    if (p.di == i - k && p.dj == j - l) return evaluate(p, k, l);
  return evaluate(make_plan(i - k, j - l), k, l);
}

double WarpResult::distance() const { return std::sqrt(std::max(cost_squared, 0.0)); }

WarpResult optimal_warp(const Grid& grid, const SrvfCurve& q1, const SrvfCurve& q2, const StepSet& steps) {
  if (steps.steps.empty()) throw ParameterError("empty step set");
  const SegmentCost cost(grid, q1.values, q2.values, steps);
  const int m = static_cast<int>(grid.size());
  const auto idx = [m](int i, int j) { return static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j); };
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), inf);
  std::vector<std::uint8_t> from(best.size(), 0xFF);
  best[0] = 0.0;

  double min_ratio = inf, max_ratio = 0.0;
  for (auto [di, dj] : steps.steps) {
    min_ratio = std::min(min_ratio, static_cast<double>(dj) / di);
    max_ratio = std::max(max_ratio, static_cast<double>(dj) / di);
  }
  for (int i = 1; i < m; ++i) {
    for (int j = 1; j < m; ++j) {
      // Nodes outside the slope cone of the end point cannot lie on a path.
      const double rest_i = m - 1 - i, rest_j = m - 1 - j;
      if (rest_j > max_ratio * rest_i + 1e-9 || rest_j < min_ratio * rest_i - 1e-9) continue;
      double b = inf;
      std::uint8_t arg = 0xFF;
      for (std::size_t s = 0; s < steps.steps.size(); ++s) {
        const auto [di, dj] = steps.steps[s];
        const int k = i - di;
        const int l = j - dj;
        if (k < 0 || l < 0) continue;
        const double base = best[idx(k, l)];
        if (base == inf) continue;
        const double c = base + cost.step_cost(s, k, l);
        if (c < b) {
          b = c;
          arg = static_cast<std::uint8_t>(s);
        }
      }
      best[idx(i, j)] = b;
      from[idx(i, j)] = arg;
    }
  }

  WarpResult out;
  out.cost_squared = best[idx(m - 1, m - 1)];
  if (out.cost_squared == inf) throw ParameterError("step set cannot reach the end of the grid");
  int i = m - 1;
  int j = m - 1;
  out.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    const auto s = from[idx(i, j)];
    const auto [di, dj] = steps.steps[s];
    i -= di;
    j -= dj;
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());

  const Vector& t = grid.normalized();
  Vector xs(static_cast<Eigen::Index>(out.path.size()));
  Vector ys(xs.size());
  for (std::size_t p = 0; p < out.path.size(); ++p) {
    xs[static_cast<Eigen::Index>(p)] = t[out.path[p].first];
    ys[static_cast<Eigen::Index>(p)] = t[out.path[p].second];
  }
  out.warp = WarpingFunction(grid, interp(xs, ys, t));
  return out;
}

double phase_distance(const Grid& grid, const WarpingFunction& g1, const WarpingFunction& g2) {
  require_same_size(grid, g1.values(), "phase_distance");
  require_same_size(grid, g2.values(), "phase_distance");
  // psi is constant on each cell of a piecewise-linear warp, so the inner
  // product is a sum of sqrt(dgamma1 * dgamma2); exact at kinks, unlike the
  // centered-difference psi.
  const Vector& a = g1.values();
  const Vector& b = g2.values();
  double ip = 0.0;
  for (Eigen::Index c = 1; c < a.size(); ++c) ip += std::sqrt(std::max(a[c] - a[c - 1], 0.0) * std::max(b[c] - b[c - 1], 0.0));
  return std::acos(std::clamp(ip, -1.0, 1.0));
}

double amplitude_distance(const Grid& grid, const FunctionalSample& f1, const FunctionalSample& f2,
                          const StepSet& steps) {
  return optimal_warp(grid, to_srvf(grid, f1), to_srvf(grid, f2), steps).distance();
}

namespace {

// Warp whose psi is the sphere mean of the warps' psi.
WarpingFunction warp_center(const Grid& grid, const std::vector<WarpingFunction>& warps) {
  std::vector<Vector> psis;
  psis.reserve(warps.size());
  for (const auto& w : warps) psis.push_back(w.psi());
  return WarpingFunction::from_psi(grid, sphere::karcher_mean(grid, psis));
}

}  // namespace

AlignmentResult karcher_mean(const FunctionalDataset& data, const AlignmentOptions& opts) {
  if (data.samples.empty()) throw PreconditionError("karcher_mean needs at least one function");
  if (opts.max_iter < 1) throw ParameterError("karcher_mean needs max_iter >= 1");
  data.validate();
  const Grid& grid = data.grid;
  const std::size_t n = data.size();

  std::vector<SrvfCurve> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = to_srvf(grid, data.samples[i]);

  Vector cross_mean = Vector::Zero(grid.size());
  double mean_start = 0.0;
  for (const auto& s : data.samples) {
    cross_mean += s.values;
    mean_start += s.initial_value();
  }
  cross_mean /= static_cast<double>(n);
  mean_start /= static_cast<double>(n);

  std::size_t closest = 0;
  double closest_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = l2_norm(grid, data.samples[i].values - cross_mean);
    if (d < closest_dist) {
      closest_dist = d;
      closest = i;
    }
  }

  AlignmentResult res;
  res.grid = grid;
  res.warps.resize(n);
  res.aligned_srvf.resize(n);
  Vector mu = q[closest].values;
  std::vector<double> costs(n);

  for (int it = 0; it < opts.max_iter; ++it) {
    const SrvfCurve target{mu, mean_start};
    parallel_for(n, [&](std::size_t i) {
      auto w = optimal_warp(grid, target, q[i], opts.steps);
      costs[i] = w.cost_squared;
      res.warps[i] = std::move(w.warp);
    });
    res.objective.push_back(std::accumulate(costs.begin(), costs.end(), 0.0));

    if (opts.recenter == AlignmentOptions::Recenter::every_iteration) {
      const auto center_inv = invert(grid, warp_center(grid, res.warps));
      parallel_for(n, [&](std::size_t i) { res.warps[i] = compose(grid, res.warps[i], center_inv); });
    }

    Vector next = Vector::Zero(grid.size());
    for (std::size_t i = 0; i < n; ++i) {
      res.aligned_srvf[i] = warp_srvf(grid, q[i], res.warps[i]);
      next += res.aligned_srvf[i].values;
    }
    next /= static_cast<double>(n);

    const double scale = l2_norm(grid, mu);
    const double change = l2_norm(grid, next - mu) / (scale > 1e-12 ? scale : 1.0);
    res.mean_change.push_back(change);
    mu = std::move(next);
    res.iterations = it + 1;
    if (change < opts.tol) {
      res.converged = true;
      break;
    }
  }

  if (opts.recenter == AlignmentOptions::Recenter::final) {
    const auto center_inv = invert(grid, warp_center(grid, res.warps));
    mu = warp_srvf(grid, SrvfCurve{mu, mean_start}, center_inv).values;
  }
  res.karcher_mean_srvf = SrvfCurve{mu, mean_start};
  // Final pass against the settled mean: training warps are then exactly
  // what align_to_mean returns for the same functions.
  parallel_for(n, [&](std::size_t i) {
    auto w = optimal_warp(grid, res.karcher_mean_srvf, q[i], opts.steps);
    costs[i] = w.cost_squared;
    res.aligned_srvf[i] = warp_srvf(grid, q[i], w.warp);
    res.warps[i] = std::move(w.warp);
  });
  res.final_objective = std::accumulate(costs.begin(), costs.end(), 0.0);
  res.karcher_mean_f = from_srvf(grid, res.karcher_mean_srvf);
  res.aligned.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.aligned[i] = warp_function(grid, data.samples[i], res.warps[i]);
  return res;
}

TestAlignment align_to_mean(const FunctionalDataset& test, const Grid& train_grid, const SrvfCurve& mean_srvf,
                            const StepSet& steps) {
  if (!(test.grid == train_grid)) throw DimensionError("test grid does not match the training grid");
  test.validate();
  require_same_size(train_grid, mean_srvf.values, "align_to_mean");
  const std::size_t n = test.size();
  TestAlignment out;
  out.aligned_srvf.resize(n);
  out.warps.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const SrvfCurve q = to_srvf(train_grid, test.samples[i]);
    auto w = optimal_warp(train_grid, mean_srvf, q, steps);
    out.aligned_srvf[i] = warp_srvf(train_grid, q, w.warp);
    out.warps[i] = std::move(w.warp);
  });
  return out;
}

}  // namespace veesa
