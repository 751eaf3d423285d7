#pragma once

#include "veesa/align.hpp"
#include "veesa/efpca.hpp"
#include "veesa/explain.hpp"
#include "veesa/fdata.hpp"
#include "veesa/model.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace veesa {

struct PipelineConfig {
  int smoothing_runs = 0;
  PcaVariant variant = PcaVariant::joint;
  /// Leading PCs fed to the classifier; all retained PCs when unset.
  std::optional<int> n_pcs_used;
  ForestParams forest;
  MetricKind metric = MetricKind::accuracy;
  /// 0 skips PFI.
  int pfi_replicates = 10;
  std::uint64_t seed = 1;
  std::vector<int> taus{1, 2};
  int align_max_iter = 20;
  double align_tol = 1e-4;
  std::optional<double> c_constant;

  /// Throws ParameterError on out-of-range values.
  void validate() const;
  AlignmentOptions alignment_options() const;
  /// Forest parameters with the seed derived from `seed`.
  ForestParams forest_params() const;
  std::uint64_t train_pfi_seed() const;
  std::uint64_t test_pfi_seed() const;
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>(const PipelineConfig&)>;

/// Random forest built from config.forest_params().
std::unique_ptr<Classifier> default_classifier(const PipelineConfig& config);

/// Sorted distinct labels; position = encoded class index.
std::vector<std::string> class_names(const std::vector<std::string>& labels);
Labels encode_labels(const std::vector<std::string>& labels, const std::vector<std::string>& classes);

struct TrainedPipeline {
  PipelineConfig config;
  std::vector<std::string> classes;
  AlignmentResult alignment;
  ElasticPcaModel pca;
  std::shared_ptr<Classifier> classifier;
  PcScores train_scores;
  double train_metric = 0.0;
  std::optional<PfiReport> train_pfi;

  Eigen::Index n_pcs() const { return train_scores.cols(); }
};

struct TestReport {
  /// Classifier inputs for the scored rows.
  Matrix features;
  Matrix probabilities;
  Labels predictions;
  std::vector<std::string> classes;
  MetricKind metric = MetricKind::accuracy;
  /// Set when the scored data carry labels.
  std::optional<double> metric_value;
  std::optional<double> accuracy;
  std::optional<PfiReport> pfi;
};

struct ShiftedPeaksParams {
  int per_group = 250;
  int grid_points = 150;
  double t_min = -15.0;
  double t_max = 15.0;
  std::array<double, 2> mean_height{1.0, 1.25};
  std::array<double, 2> mean_location{-3.0, 3.0};
  double sd_height = 0.05;
  double sd_location = 1.25;
  /// Held out per group; 50 + 50 gives the 400/100 split.
  int test_per_group = 50;
};

struct ShiftedPeaks {
  FunctionalDataset train;
  FunctionalDataset test;
  /// Per function, in generation order (group-major): drawn height and location.
  std::vector<double> heights;
  std::vector<double> locations;
};

/// y = z exp(-(t - a)^2 / 2), groups labeled "1" and "2", split stratified by group.
ShiftedPeaks generate_shifted_peaks(std::uint64_t seed, const ShiftedPeaksParams& params = {});

TrainedPipeline train_pipeline(const FunctionalDataset& data, const PipelineConfig& config,
                               const ClassifierFactory& factory = default_classifier);

/// Scores new data against frozen training artifacts. Labels are optional;
/// metric and PFI are filled in only when present.
TestReport test_pipeline(const TrainedPipeline& tp, const FunctionalDataset& test, bool compute_pfi = true);

/// Grid-point values as features, same classifier/metric/PFI machinery.
TestReport cross_sectional_pipeline(const FunctionalDataset& train, const FunctionalDataset& test,
                                    const PipelineConfig& config, const ClassifierFactory& factory = default_classifier);

struct CvCell {
  PipelineConfig config;
  /// Fraction of correct held-out predictions over all folds and repeats.
  double accuracy = 0.0;
};

/// Stratified k-fold cross-validation of the full pipeline for every config.
std::vector<CvCell> cross_validate(const FunctionalDataset& data, int folds, int repeats,
                                   const std::vector<PipelineConfig>& grid, std::uint64_t seed,
                                   const ClassifierFactory& factory = default_classifier);

/// Fold index per sample for one repeat: each label's rows are shuffled and
/// dealt round-robin, continuing the deal across labels.
std::vector<int> assign_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed);

}  // namespace veesa
