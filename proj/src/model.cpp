#include "veesa/model.hpp"

#include "veesa/errors.hpp"
#include "veesa/parallel.hpp"
#include "veesa/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace veesa {

Labels argmax_rows(const Matrix& proba) {
  Labels out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < proba.cols(); ++c)
      if (proba(i, c) > proba(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Labels Classifier::predict(const Matrix& features) const { return argmax_rows(predict_proba(features)); }

namespace {

class CopyingPermutedPredictor final : public PermutedPredictor {
 public:
  CopyingPermutedPredictor(const Classifier& model, const Matrix& features) : model_(model), features_(features) {}

  Matrix predict_proba(Eigen::Index column, std::span<const std::size_t> permutation) const override {
    Matrix x = features_;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      x(i, column) = features_(static_cast<Eigen::Index>(permutation[static_cast<std::size_t>(i)]), column);
    return model_.predict_proba(x);
  }

 private:
  const Classifier& model_;
  const Matrix& features_;
};

}  // namespace

std::unique_ptr<PermutedPredictor> Classifier::permuted_predictor(const Matrix& features) const {
  return std::make_unique<CopyingPermutedPredictor>(*this, features);
}

namespace {

struct Candidate {
  double score = -1.0;
  int feature = -1;
  double threshold = 0.0;
};

int majority(const std::vector<int>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Labels& y, int n_classes, int mtry, int min_node_size, std::uint64_t seed)
      : x_(x), y_(y), n_classes_(n_classes), mtry_(mtry), min_node_size_(min_node_size), rng_(seed) {
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  RandomForest::Tree build() {
    const auto n = static_cast<std::size_t>(x_.rows());
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng_.below(n);

    RandomForest::Tree tree;
    tree.emplace_back();
    struct Pending {
      int node;
      std::size_t begin, end;
    };
    std::vector<Pending> stack{{0, 0, n}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
      for (std::size_t k = p.begin; k < p.end; ++k) ++counts[static_cast<std::size_t>(y_[rows[k]])];
      const std::size_t size = p.end - p.begin;
      tree[static_cast<std::size_t>(p.node)].label = majority(counts);
      const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
      if (pure || size <= static_cast<std::size_t>(min_node_size_)) continue;

      const Candidate best = best_split(rows, p.begin, p.end, counts);
      if (best.feature < 0) continue;

      const auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                         rows.begin() + static_cast<std::ptrdiff_t>(p.end), [&](std::size_t r) {
                                           return x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold;
                                         });
      const auto mid = static_cast<std::size_t>(mid_it - rows.begin());
      if (mid == p.begin || mid == p.end) continue;

      const int left = static_cast<int>(tree.size());
      const int right = left + 1;
      tree.emplace_back();
      tree.emplace_back();
      auto& node = tree[static_cast<std::size_t>(p.node)];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = left;
      node.right = right;
      stack.push_back({right, mid, p.end});
      stack.push_back({left, p.begin, mid});
    }
    return tree;
  }

 private:
  // Maximizes sum_c L_c^2/n_L + sum_c R_c^2/n_R, i.e. minimizes weighted Gini.
  Candidate best_split(const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
                       const std::vector<int>& counts) {
    const std::size_t size = end - begin;
    double parent = 0.0;
    for (int c : counts) parent += static_cast<double>(c) * c;
    parent /= static_cast<double>(size);

    // Partial Fisher-Yates draws mtry distinct features.
    const std::size_t p = features_.size();
    for (std::size_t k = 0; k < static_cast<std::size_t>(mtry_); ++k) {
      const std::size_t pick = k + rng_.below(p - k);
      std::swap(features_[k], features_[pick]);
    }

    Candidate best;
    best.score = parent + 1e-12 * std::max(1.0, parent);
    std::vector<std::pair<double, int>> column(size);
    std::vector<int> left(static_cast<std::size_t>(n_classes_));
    for (std::size_t k = 0; k < static_cast<std::size_t>(mtry_); ++k) {
      const int f = features_[k];
      for (std::size_t s = 0; s < size; ++s) {
        const std::size_t r = rows[begin + s];
        column[s] = {x_(static_cast<Eigen::Index>(r), f), y_[r]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left.begin(), left.end(), 0);
      double left_sq = 0.0;
      double right_sq = 0.0;
      for (int c : counts) right_sq += static_cast<double>(c) * c;
      for (std::size_t s = 0; s + 1 < size; ++s) {
        const auto c = static_cast<std::size_t>(column[s].second);
        const double l = left[c];
        const double r = counts[c] - l;
        left_sq += 2.0 * l + 1.0;
        right_sq -= 2.0 * r - 1.0;
        ++left[c];
        if (column[s].first == column[s + 1].first) continue;
        const double nl = static_cast<double>(s + 1);
        const double nr = static_cast<double>(size - s - 1);
        const double score = left_sq / nl + right_sq / nr;
        if (score > best.score) {
          best.score = score;
          best.feature = f;
          const double lo = column[s].first;
          const double hi = column[s + 1].first;
          double thr = lo + (hi - lo) / 2.0;
          if (!(thr < hi)) thr = lo;
          best.threshold = thr;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const Labels& y_;
  int n_classes_;
  int mtry_;
  int min_node_size_;
  Rng rng_;
  std::vector<int> features_;
};

}  // namespace

void RandomForest::train(const Matrix& features, const Labels& labels) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (static_cast<std::size_t>(n) != labels.size())
    throw DimensionError("feature rows (" + std::to_string(n) + ") and labels (" + std::to_string(labels.size()) +
                         ") differ");
  if (n < 2) throw PreconditionError("random forest needs at least 2 rows");
  if (p < 1) throw PreconditionError("random forest needs at least 1 feature");
  if (!features.allFinite()) throw PreconditionError("features contain missing or non-finite values");
  if (params_.n_trees < 1) throw ParameterError("n_trees must be >= 1");
  if (params_.min_node_size < 1) throw ParameterError("min_node_size must be >= 1");
  if (params_.mtry < 0 || params_.mtry > p) throw ParameterError("mtry must lie in [1, feature count]");
  int max_label = 0;
  std::set<int> seen;
  for (int y : labels) {
    if (y < 0) throw ParameterError("labels must be encoded as nonnegative class indices");
    max_label = std::max(max_label, y);
    seen.insert(y);
  }
  if (seen.size() < 2) throw PreconditionError("random forest needs at least 2 classes");

  n_classes_ = max_label + 1;
  n_features_ = p;
  mtry_ = params_.mtry > 0 ? params_.mtry : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
  trees_.assign(static_cast<std::size_t>(params_.n_trees), {});
  parallel_for(trees_.size(), [&](std::size_t t) {
    TreeBuilder builder(features, labels, n_classes_, mtry_, params_.min_node_size, derive_seed(params_.seed, t));
    trees_[t] = builder.build();
  });
}

int RandomForest::predict_tree(const Tree& tree, const Matrix& features, Eigen::Index row) {
  int k = 0;
  while (tree[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& node = tree[static_cast<std::size_t>(k)];
    k = features(row, node.feature) <= node.threshold ? node.left : node.right;
  }
  return tree[static_cast<std::size_t>(k)].label;
}

Matrix RandomForest::predict_proba(const Matrix& features) const {
  if (!trained()) throw PreconditionError("random forest is not trained");
  if (features.cols() != n_features_)
    throw DimensionError("feature width " + std::to_string(features.cols()) + " does not match the trained width " +
                         std::to_string(n_features_));
  Matrix proba = Matrix::Zero(features.rows(), n_classes_);
  parallel_for(static_cast<std::size_t>(features.rows()), [&](std::size_t r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (const auto& tree : trees_) proba(row, predict_tree(tree, features, row)) += 1.0;
  });
  return proba / static_cast<double>(trees_.size());
}

namespace {

int predict_tree_override(const RandomForest::Tree& tree, const Matrix& features, Eigen::Index row, int column,
                          double value) {
  int k = 0;
  while (tree[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& node = tree[static_cast<std::size_t>(k)];
    const double x = node.feature == column ? value : features(row, node.feature);
    k = x <= node.threshold ? node.left : node.right;
  }
  return tree[static_cast<std::size_t>(k)].label;
}

// Only trees that split on the permuted column can change their vote, so
// the baseline votes are cached and just those trees are re-walked.
class ForestPermutedPredictor final : public PermutedPredictor {
 public:
  ForestPermutedPredictor(const RandomForest& forest, const Matrix& features)
      : forest_(forest), features_(features), trees_by_feature_(static_cast<std::size_t>(forest.n_features())) {
    const auto& trees = forest.trees();
    const Eigen::Index n = features.rows();
    leaf_labels_.resize(trees.size());
    votes_ = Matrix::Zero(n, forest.n_classes());
    for (std::size_t t = 0; t < trees.size(); ++t) {
      leaf_labels_[t].resize(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        const int label = RandomForest::predict_tree(trees[t], features, i);
        leaf_labels_[t][static_cast<std::size_t>(i)] = label;
        votes_(i, label) += 1.0;
      }
      std::set<int> used;
      for (const auto& node : trees[t])
        if (node.feature >= 0) used.insert(node.feature);
      for (int f : used) trees_by_feature_[static_cast<std::size_t>(f)].push_back(t);
    }
  }

  Matrix predict_proba(Eigen::Index column, std::span<const std::size_t> permutation) const override {
    if (column < 0 || column >= forest_.n_features()) throw DimensionError("permuted column out of range");
    const Eigen::Index n = features_.rows();
    if (permutation.size() != static_cast<std::size_t>(n)) throw DimensionError("permutation length mismatch");
    Matrix votes = votes_;
    const auto& trees = forest_.trees();
    for (std::size_t t : trees_by_feature_[static_cast<std::size_t>(column)]) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double value = features_(static_cast<Eigen::Index>(permutation[static_cast<std::size_t>(i)]), column);
        const int label = predict_tree_override(trees[t], features_, i, static_cast<int>(column), value);
        const int base = leaf_labels_[t][static_cast<std::size_t>(i)];
        if (label != base) {
          votes(i, base) -= 1.0;
          votes(i, label) += 1.0;
        }
      }
    }
    return votes / static_cast<double>(trees.size());
  }

 private:
  const RandomForest& forest_;
  const Matrix& features_;
  std::vector<std::vector<int>> leaf_labels_;
  std::vector<std::vector<std::size_t>> trees_by_feature_;
  Matrix votes_;
};

}  // namespace

std::unique_ptr<PermutedPredictor> RandomForest::permuted_predictor(const Matrix& features) const {
  if (!trained()) throw PreconditionError("random forest is not trained");
  if (features.cols() != n_features_) throw DimensionError("feature width does not match the trained width");
  return std::make_unique<ForestPermutedPredictor>(*this, features);
}

RandomForest RandomForest::from_parts(ForestParams params, int mtry, Eigen::Index n_features, int n_classes,
                                      std::vector<Tree> trees) {
  RandomForest rf(params);
  rf.mtry_ = mtry;
  rf.n_features_ = n_features;
  rf.n_classes_ = n_classes;
  rf.trees_ = std::move(trees);
  return rf;
}

std::string to_string(MetricKind m) { return m == MetricKind::accuracy ? "accuracy" : "logloss"; }

MetricKind parse_metric(const std::string& name) {
  if (name == "accuracy") return MetricKind::accuracy;
  if (name == "logloss" || name == "log-loss") return MetricKind::logloss;
  throw ParameterError("unknown metric '" + name + "' (expected accuracy or logloss)");
}

double evaluate(MetricKind metric, const Labels& labels, const Matrix& proba) {
  if (labels.size() != static_cast<std::size_t>(proba.rows()))
    throw DimensionError("label count does not match probability rows");
  if (labels.empty()) throw PreconditionError("cannot evaluate a metric on zero rows");
  const double n = static_cast<double>(labels.size());
  if (metric == MetricKind::accuracy) {
    const Labels hat = argmax_rows(proba);
    double hits = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += hat[i] == labels[i] ? 1.0 : 0.0;
    return hits / n;
  }
  if (proba.cols() > 2) throw ParameterError("log-loss is only supported for binary labels");
  constexpr double eps = 1e-12;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw ParameterError("log-loss is only supported for binary labels");
    const double p1 = proba.cols() == 2 ? proba(static_cast<Eigen::Index>(i), 1) : 0.0;
    const double p = std::clamp(p1, eps, 1.0 - eps);
    total += y == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return total / n;
}

}  // namespace veesa
