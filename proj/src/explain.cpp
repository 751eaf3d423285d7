#include "veesa/explain.hpp"

#include "veesa/errors.hpp"
#include "veesa/parallel.hpp"
#include "veesa/random.hpp"

#include <cmath>
#include <numeric>

namespace veesa {

namespace {

void check_model(const Classifier& model, const Matrix& features, const Labels& labels) {
  if (!model.trained()) throw PreconditionError("PFI needs a trained model");
  if (features.cols() != model.n_features())
    throw DimensionError("feature width " + std::to_string(features.cols()) + " does not match the model width " +
                         std::to_string(model.n_features()));
  if (labels.size() != static_cast<std::size_t>(features.rows()))
    throw DimensionError("label count does not match feature rows");
}

void check_permutation(const std::vector<std::size_t>& permutation, std::size_t n) {
  if (permutation.size() != n) throw ParameterError("permutation length does not match the row count");
  std::vector<bool> seen(n, false);
  for (auto p : permutation) {
    if (p >= n || seen[p]) throw ParameterError("permutation is not a rearrangement of the row indices");
    seen[p] = true;
  }
}

}  // namespace

std::vector<std::size_t> pfi_permutation(std::uint64_t seed, Eigen::Index column, int replicate, std::size_t n_rows) {
  std::vector<std::size_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(column), static_cast<std::uint64_t>(replicate)));
  rng.shuffle(perm);
  return perm;
}

double pfi_single(const Classifier& model, const Matrix& features, const Labels& labels, MetricKind metric,
                  Eigen::Index column, const std::vector<std::size_t>& permutation) {
  check_model(model, features, labels);
  if (column < 0 || column >= features.cols()) throw DimensionError("feature index out of range");
  check_permutation(permutation, static_cast<std::size_t>(features.rows()));
  const double baseline = evaluate(metric, labels, model.predict_proba(features));
  const auto predictor = model.permuted_predictor(features);
  return baseline - evaluate(metric, labels, predictor->predict_proba(column, permutation));
}

PfiReport pfi(const Classifier& model, const Matrix& features, const Labels& labels, MetricKind metric, int replicates,
              std::uint64_t seed) {
  if (replicates < 1) throw ParameterError("PFI needs at least one replicate");
  check_model(model, features, labels);
  PfiReport report;
  report.metric = metric;
  report.replicates = replicates;
  report.seed = seed;
  report.baseline_metric = evaluate(metric, labels, model.predict_proba(features));

  const Eigen::Index p = features.cols();
  const auto n = static_cast<std::size_t>(features.rows());
  const auto predictor = model.permuted_predictor(features);
  report.per_feature.assign(static_cast<std::size_t>(p), {});
  for (auto& f : report.per_feature) f.replicates.assign(static_cast<std::size_t>(replicates), 0.0);

  const std::size_t cells = static_cast<std::size_t>(p) * static_cast<std::size_t>(replicates);
  parallel_for(cells, [&](std::size_t cell) {
    const auto j = static_cast<Eigen::Index>(cell / static_cast<std::size_t>(replicates));
    const int r = static_cast<int>(cell % static_cast<std::size_t>(replicates));
    const auto perm = pfi_permutation(seed, j, r, n);
    const double permuted = evaluate(metric, labels, predictor->predict_proba(j, perm));
    report.per_feature[static_cast<std::size_t>(j)].replicates[static_cast<std::size_t>(r)] =
        report.baseline_metric - permuted;
  });

  for (auto& f : report.per_feature) {
    double sum = 0.0;
    for (double v : f.replicates) sum += v;
    f.mean = sum / replicates;
    double ss = 0.0;
    for (double v : f.replicates) ss += (v - f.mean) * (v - f.mean);
    f.sd = replicates > 1 ? std::sqrt(ss / (replicates - 1)) : 0.0;
  }
  return report;
}

}  // namespace veesa
