#pragma once

#include "veesa/fdata.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace veesa {

/// Class labels are encoded as 0..n_classes-1.
using Labels = std::vector<int>;

/// Predicts class-probability rows for feature rows with one column replaced
/// by a permutation of itself. Implementations may cache per-row work.
class PermutedPredictor {
 public:
  virtual ~PermutedPredictor() = default;
  virtual Matrix predict_proba(Eigen::Index column, std::span<const std::size_t> permutation) const = 0;
};

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual void train(const Matrix& features, const Labels& labels) = 0;
  /// Rows are nonnegative and sum to 1.
  virtual Matrix predict_proba(const Matrix& features) const = 0;
  virtual bool trained() const = 0;
  virtual Eigen::Index n_features() const = 0;
  virtual int n_classes() const = 0;

  /// Hard predictions: argmax of predict_proba, lowest class on ties.
  Labels predict(const Matrix& features) const;

  /// Default copies the features per call; models with cheaper incremental
  /// prediction override it.
  virtual std::unique_ptr<PermutedPredictor> permuted_predictor(const Matrix& features) const;
};

struct ForestParams {
  int n_trees = 500;
  /// 0 means floor(sqrt(p)).
  int mtry = 0;
  int min_node_size = 1;
  std::uint64_t seed = 1;
};

/// Classification forest: bootstrap samples, axis-aligned Gini splits over
/// mtry random features per node, probabilities as vote fractions.
class RandomForest final : public Classifier {
 public:
  struct Node {
    /// -1 marks a leaf.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };
  using Tree = std::vector<Node>;

  RandomForest() = default;
  explicit RandomForest(ForestParams params) : params_(params) {}

  void train(const Matrix& features, const Labels& labels) override;
  Matrix predict_proba(const Matrix& features) const override;
  bool trained() const override { return !trees_.empty(); }
  Eigen::Index n_features() const override { return n_features_; }
  int n_classes() const override { return n_classes_; }
  std::unique_ptr<PermutedPredictor> permuted_predictor(const Matrix& features) const override;

  const ForestParams& params() const { return params_; }
  int effective_mtry() const { return mtry_; }
  const std::vector<Tree>& trees() const { return trees_; }

  /// Leaf label reached by one row.
  static int predict_tree(const Tree& tree, const Matrix& features, Eigen::Index row);

  /// Restores a forest from its parts (deserialization).
  static RandomForest from_parts(ForestParams params, int mtry, Eigen::Index n_features, int n_classes,
                                 std::vector<Tree> trees);

 private:
  ForestParams params_;
  int mtry_ = 0;
  Eigen::Index n_features_ = 0;
  int n_classes_ = 0;
  std::vector<Tree> trees_;
};

enum class MetricKind { accuracy, logloss };

std::string to_string(MetricKind m);
MetricKind parse_metric(const std::string& name);

/// Higher is better for both metrics. Log-loss uses class 1 as the positive
/// class and clamps p to [1e-12, 1 - 1e-12].
double evaluate(MetricKind metric, const Labels& labels, const Matrix& proba);

/// Index of the largest entry in each row; lowest index wins ties.
Labels argmax_rows(const Matrix& proba);

}  // namespace veesa
