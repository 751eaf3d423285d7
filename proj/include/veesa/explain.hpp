#pragma once

#include "veesa/model.hpp"

#include <cstdint>
#include <vector>

namespace veesa {

struct FeatureImportance {
  /// I_{j,r} = baseline - metric with column j permuted, one per replicate.
  std::vector<double> replicates;
  double mean = 0.0;
  /// Sample standard deviation across replicates (0 when R = 1).
  double sd = 0.0;
};

struct PfiReport {
  double baseline_metric = 0.0;
  std::vector<FeatureImportance> per_feature;
  int replicates = 0;
  MetricKind metric = MetricKind::accuracy;
  std::uint64_t seed = 0;
};

/// Row permutation used for feature `column`, replicate `replicate`.
/// Seeded Fisher-Yates on a stream derived from (seed, column, replicate).
std::vector<std::size_t> pfi_permutation(std::uint64_t seed, Eigen::Index column, int replicate, std::size_t n_rows);

/// Single-replicate importance with a caller-supplied permutation.
double pfi_single(const Classifier& model, const Matrix& features, const Labels& labels, MetricKind metric,
                  Eigen::Index column, const std::vector<std::size_t>& permutation);

/// Permutation feature importance over every column, `replicates` fresh
/// permutations each. Negative importances are kept as is.
PfiReport pfi(const Classifier& model, const Matrix& features, const Labels& labels, MetricKind metric, int replicates,
              std::uint64_t seed);

}  // namespace veesa
