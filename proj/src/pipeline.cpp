#include "veesa/pipeline.hpp"

#include "veesa/errors.hpp"
#include "veesa/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace veesa {

void PipelineConfig::validate() const {
  if (smoothing_runs < 0) throw ParameterError("smoothing_runs must be >= 0");
  if (n_pcs_used && *n_pcs_used < 1) throw ParameterError("n_pcs_used must be >= 1");
  if (forest.n_trees < 1) throw ParameterError("forest.n_trees must be >= 1");
  if (forest.mtry < 0) throw ParameterError("forest.mtry must be >= 0 (0 = floor(sqrt(p)))");
  if (forest.min_node_size < 1) throw ParameterError("forest.min_node_size must be >= 1");
  if (pfi_replicates < 0) throw ParameterError("pfi_replicates must be >= 0");
  for (int t : taus)
    if (t < 1) throw ParameterError("taus must be positive integers");
  if (align_max_iter < 1) throw ParameterError("align_max_iter must be >= 1");
  if (!(align_tol > 0.0)) throw ParameterError("align_tol must be positive");
  if (c_constant && !(*c_constant > 0.0)) throw ParameterError("c_constant must be positive");
}

AlignmentOptions PipelineConfig::alignment_options() const {
  AlignmentOptions o;
  o.max_iter = align_max_iter;
  o.tol = align_tol;
  return o;
}

ForestParams PipelineConfig::forest_params() const {
  ForestParams p = forest;
  p.seed = derive_seed(seed, 1);
  return p;
}

std::uint64_t PipelineConfig::train_pfi_seed() const { return derive_seed(seed, 2); }
std::uint64_t PipelineConfig::test_pfi_seed() const { return derive_seed(seed, 3); }

std::unique_ptr<Classifier> default_classifier(const PipelineConfig& config) {
  return std::make_unique<RandomForest>(config.forest_params());
}

std::vector<std::string> class_names(const std::vector<std::string>& labels) {
  std::set<std::string> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

Labels encode_labels(const std::vector<std::string>& labels, const std::vector<std::string>& classes) {
  Labels out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = std::find(classes.begin(), classes.end(), l);
    if (it == classes.end()) throw PreconditionError("label '" + l + "' was not seen in training");
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

namespace {

// Re-throws module errors with the pipeline step prepended, keeping the type.
template <typename F>
auto step(const char* name, F&& fn) -> decltype(fn()) {
  const auto prefix = std::string(name) + ": ";
  try {
    return fn();
  } catch (const DimensionError& e) {
    throw DimensionError(prefix + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(prefix + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(prefix + e.what());
  }
}

void check_uncorrelated(const Matrix& scores, const Vector& eigenvalues) {
  if (scores.rows() < 3) return;
  const Matrix centered = scores.rowwise() - scores.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(scores.rows() - 1);
  const double top = eigenvalues.size() > 0 ? eigenvalues[0] : 0.0;
  const double floor = 1e-10 * std::max(top, 1e-300);
  for (Eigen::Index a = 0; a < cov.cols(); ++a) {
    if (eigenvalues[a] <= floor) continue;
    for (Eigen::Index b = a + 1; b < cov.cols(); ++b) {
      if (eigenvalues[b] <= floor) continue;
      const double corr = cov(a, b) / std::sqrt(cov(a, a) * cov(b, b));
      if (std::abs(corr) > 1e-6)
        throw std::logic_error("principal coefficients " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                               " are correlated (" + std::to_string(corr) + ")");
    }
  }
}

std::optional<Labels> labels_of(const FunctionalDataset& data, const std::vector<std::string>& classes) {
  if (!data.labels) return std::nullopt;
  return encode_labels(*data.labels, classes);
}

void score(TestReport& report, const Classifier& model, const std::optional<Labels>& y, MetricKind metric,
           int replicates, std::uint64_t pfi_seed, bool compute_pfi) {
  report.probabilities = model.predict_proba(report.features);
  report.predictions = argmax_rows(report.probabilities);
  report.metric = metric;
  if (!y) return;
  report.metric_value = evaluate(metric, *y, report.probabilities);
  report.accuracy = evaluate(MetricKind::accuracy, *y, report.probabilities);
  if (compute_pfi && replicates > 0) report.pfi = pfi(model, report.features, *y, metric, replicates, pfi_seed);
}

}  // namespace

ShiftedPeaks generate_shifted_peaks(std::uint64_t seed, const ShiftedPeaksParams& params) {
  if (params.per_group < 1 || params.test_per_group < 0 || params.test_per_group > params.per_group)
    throw ParameterError("shifted peaks: invalid group sizes");
  const Grid grid = Grid::uniform(params.t_min, params.t_max, params.grid_points);
  Rng rng(derive_seed(seed, 0x5eed));
  ShiftedPeaks out;
  std::vector<FunctionalSample> all;
  std::vector<std::string> labels;
  for (int g = 0; g < 2; ++g) {
    for (int i = 0; i < params.per_group; ++i) {
      const double z = rng.normal(params.mean_height[static_cast<std::size_t>(g)], params.sd_height);
      const double a = rng.normal(params.mean_location[static_cast<std::size_t>(g)], params.sd_location);
      out.heights.push_back(z);
      out.locations.push_back(a);
      const Vector& t = grid.points();
      all.push_back({(z * (-(t.array() - a).square() / 2.0).exp()).matrix()});
      labels.push_back(std::to_string(g + 1));
    }
  }

  std::vector<std::size_t> train_rows, test_rows;
  for (int g = 0; g < 2; ++g) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(params.per_group));
    std::iota(rows.begin(), rows.end(), static_cast<std::size_t>(g * params.per_group));
    rng.shuffle(rows);
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + params.test_per_group);
    train_rows.insert(train_rows.end(), rows.begin() + params.test_per_group, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  FunctionalDataset full{grid, std::move(all), std::move(labels)};
  out.train = full.subset(train_rows);
  out.test = full.subset(test_rows);
  return out;
}

TrainedPipeline train_pipeline(const FunctionalDataset& data, const PipelineConfig& config,
                               const ClassifierFactory& factory) {
  config.validate();
  if (!data.labels) throw PreconditionError("training data must be labeled");
  step("input", [&] { data.validate(); });

  TrainedPipeline tp;
  tp.config = config;
  tp.classes = class_names(*data.labels);
  if (tp.classes.size() < 2) throw PreconditionError("training data need at least 2 classes");
  const Labels y = encode_labels(*data.labels, tp.classes);

  const FunctionalDataset smoothed = step("smoothing", [&] { return box_filter(data, config.smoothing_runs); });
  tp.alignment = step("alignment", [&] { return karcher_mean(smoothed, config.alignment_options()); });
  tp.pca = step("efPCA", [&] { return fit_efpca(tp.alignment, config.variant, config.c_constant); });

  const Eigen::Index rank = tp.pca.rank();
  const Eigen::Index used = config.n_pcs_used ? *config.n_pcs_used : rank;
  if (used > rank)
    throw ParameterError("n_pcs_used (" + std::to_string(used) + ") exceeds the retained rank (" +
                         std::to_string(rank) + ")");
  const PcScores all = transform(tp.pca, tp.alignment.aligned_srvf, tp.alignment.warps);
  tp.train_scores = all.leftCols(used);
  check_uncorrelated(tp.train_scores, tp.pca.singular_values);

  auto model = factory(config);
  step("model training", [&] { model->train(tp.train_scores, y); });
  tp.classifier = std::move(model);
  tp.train_metric = evaluate(config.metric, y, tp.classifier->predict_proba(tp.train_scores));
  if (config.pfi_replicates > 0)
    tp.train_pfi = step("PFI", [&] {
      return pfi(*tp.classifier, tp.train_scores, y, config.metric, config.pfi_replicates, config.train_pfi_seed());
    });
  return tp;
}

TestReport test_pipeline(const TrainedPipeline& tp, const FunctionalDataset& test, bool compute_pfi) {
  if (!tp.classifier) throw PreconditionError("pipeline has no trained classifier");
  if (!(test.grid == tp.pca.grid)) throw DimensionError("test grid does not match the training grid");
  const auto y = labels_of(test, tp.classes);
  const FunctionalDataset smoothed = step("smoothing", [&] { return box_filter(test, tp.config.smoothing_runs); });
  const TestAlignment aligned = step("alignment", [&] {
    return align_to_mean(smoothed, tp.pca.grid, tp.pca.mean_srvf, tp.config.alignment_options().steps);
  });
  TestReport report;
  report.classes = tp.classes;
  report.features = step("efPCA", [&] {
    return PcScores(transform(tp.pca, aligned.aligned_srvf, aligned.warps).leftCols(tp.n_pcs()));
  });
  step("model", [&] {
    score(report, *tp.classifier, y, tp.config.metric, tp.config.pfi_replicates, tp.config.test_pfi_seed(), compute_pfi);
  });
  return report;
}

TestReport cross_sectional_pipeline(const FunctionalDataset& train, const FunctionalDataset& test,
                                    const PipelineConfig& config, const ClassifierFactory& factory) {
  config.validate();
  if (!train.labels) throw PreconditionError("training data must be labeled");
  train.validate();
  test.validate();
  if (!(train.grid == test.grid)) throw DimensionError("test grid does not match the training grid");
  const auto classes = class_names(*train.labels);
  if (classes.size() < 2) throw PreconditionError("training data need at least 2 classes");
  const Labels y = encode_labels(*train.labels, classes);
  const auto y_test = labels_of(test, classes);

  const Matrix x_train = box_filter(train, config.smoothing_runs).values_matrix();
  auto model = factory(config);
  step("model training", [&] { model->train(x_train, y); });

  TestReport report;
  report.classes = classes;
  report.features = box_filter(test, config.smoothing_runs).values_matrix();
  score(report, *model, y_test, config.metric, config.pfi_replicates, config.test_pfi_seed(), true);
  return report;
}

std::vector<int> assign_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > labels.size())
    throw ParameterError("fold count (" + std::to_string(folds) + ") exceeds the sample count (" +
                         std::to_string(labels.size()) + ")");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t dealt = 0;
  for (auto& [label, rows] : by_label) {
    rng.shuffle(rows);
    for (auto r : rows) fold[r] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

std::vector<CvCell> cross_validate(const FunctionalDataset& data, int folds, int repeats,
                                   const std::vector<PipelineConfig>& grid, std::uint64_t seed,
                                   const ClassifierFactory& factory) {
  if (!data.labels) throw PreconditionError("cross-validation needs labeled data");
  if (repeats < 1) throw ParameterError("cross-validation needs at least 1 repeat");
  if (grid.empty()) throw ParameterError("cross-validation grid is empty");
  data.validate();
  for (const auto& c : grid) c.validate();

  std::vector<CvCell> cells;
  for (const auto& c : grid) cells.push_back({c, 0.0});
  std::vector<double> hits(grid.size(), 0.0);

  for (int r = 0; r < repeats; ++r) {
    const auto fold = assign_folds(*data.labels, folds, derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (int k = 0; k < folds; ++k) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == k ? test_rows : train_rows).push_back(i);
      if (test_rows.empty()) continue;
      const auto train = data.subset(train_rows);
      const auto held_out = data.subset(test_rows);
      for (std::size_t c = 0; c < grid.size(); ++c) {
        PipelineConfig cfg = grid[c];
        cfg.pfi_replicates = 0;
        const auto tp = train_pipeline(train, cfg, factory);
        const auto report = test_pipeline(tp, held_out, false);
        for (std::size_t i = 0; i < test_rows.size(); ++i)
          if (tp.classes[static_cast<std::size_t>(report.predictions[i])] == (*held_out.labels)[i]) hits[c] += 1.0;
      }
    }
  }
  const double denom = static_cast<double>(repeats) * static_cast<double>(data.size());
  for (std::size_t c = 0; c < grid.size(); ++c) cells[c].accuracy = hits[c] / denom;
  return cells;
}

}  // namespace veesa
