#include "doctest.h"
#include "support.hpp"

#include "veesa/errors.hpp"
#include "veesa/model.hpp"
#include "veesa/parallel.hpp"

#include <cmath>

using namespace veesa;
using namespace veesa::testing;

namespace {

struct Toy {
  Matrix x;
  Labels y;
};

// Two noisy Gaussian classes in `p` dimensions, separated along the first two.
Toy gaussian_classes(int n, int p, double gap, std::uint64_t seed) {
  Rng rng(seed);
  Toy t{Matrix(n, p), Labels(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    const int c = i % 2;
    t.y[static_cast<std::size_t>(i)] = c;
    for (int j = 0; j < p; ++j) t.x(i, j) = rng.normal() + (j < 2 && c == 1 ? gap : 0.0);
  }
  return t;
}

// Weighted Gini impurity of splitting `rows` on feature f at threshold thr.
double weighted_gini(const Matrix& x, const Labels& y, const std::vector<std::size_t>& rows, int f, double thr,
                     int n_classes) {
  std::vector<double> l(static_cast<std::size_t>(n_classes)), r(l.size());
  for (auto row : rows) (x(static_cast<Eigen::Index>(row), f) <= thr ? l : r)[static_cast<std::size_t>(y[row])] += 1;
  const auto gini = [](const std::vector<double>& c) {
    double n = 0, s = 0;
    for (double v : c) n += v;
    for (double v : c) s += (v / n) * (v / n);
    return std::pair{n, 1.0 - s};
  };
  const auto [nl, gl] = gini(l);
  const auto [nr, gr] = gini(r);
  return (nl * gl + nr * gr) / (nl + nr);
}

}  // namespace

TEST_CASE("perfectly separable single feature") {
  Matrix x(6, 1);
  x << 1, 2, 3, 10, 11, 12;
  const Labels y{0, 0, 0, 1, 1, 1};
  RandomForest rf(ForestParams{100, 0, 1, 7});
  rf.train(x, y);
  CHECK(rf.effective_mtry() == 1);
  CHECK(evaluate(MetricKind::accuracy, y, rf.predict_proba(x)) == 1.0);
  for (const auto& tree : rf.trees()) {
    // A bootstrap sample of one class is a single leaf; otherwise one split
    // between the classes.
    CHECK((tree.size() == 1 || tree.size() == 3));
    if (tree.size() == 3) {
      CHECK(tree[0].feature == 0);
      CHECK(tree[0].threshold > 1.0);
      CHECK(tree[0].threshold < 12.0);
      CHECK(tree[static_cast<std::size_t>(tree[0].left)].label == 0);
      CHECK(tree[static_cast<std::size_t>(tree[0].right)].label == 1);
    }
  }
}

TEST_CASE("root split is Gini optimal") {
  const Toy t = gaussian_classes(40, 3, 1.0, 4);
  ForestParams params{12, 3, 1, 99};
  RandomForest rf(params);
  rf.train(t.x, t.y);
  for (std::size_t k = 0; k < rf.trees().size(); ++k) {
    // Rebuild the tree's bootstrap sample from its stream.
    Rng rng(derive_seed(params.seed, k));
    std::vector<std::size_t> rows(40);
    for (auto& r : rows) r = rng.below(40);

    double best = std::numeric_limits<double>::infinity();
    for (int f = 0; f < 3; ++f)
      for (auto a : rows)
        for (auto b : rows) {
          const double lo = t.x(static_cast<Eigen::Index>(a), f), hi = t.x(static_cast<Eigen::Index>(b), f);
          if (!(lo < hi)) continue;
          bool adjacent = true;
          for (auto c : rows) {
            const double v = t.x(static_cast<Eigen::Index>(c), f);
            if (v > lo && v < hi) adjacent = false;
          }
          if (adjacent) best = std::min(best, weighted_gini(t.x, t.y, rows, f, (lo + hi) / 2, 2));
        }
    const auto& root = rf.trees()[k][0];
    REQUIRE(root.feature >= 0);
    CHECK(weighted_gini(t.x, t.y, rows, root.feature, root.threshold, 2) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("probabilities") {
  const Toy t = gaussian_classes(60, 5, 1.5, 8);
  RandomForest rf(ForestParams{50, 0, 1, 3});
  rf.train(t.x, t.y);
  CHECK(rf.effective_mtry() == 2);
  const Toy fresh = gaussian_classes(30, 5, 1.5, 9);
  const Matrix p = rf.predict_proba(fresh.x);
  CHECK((p.array() >= 0).all());
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
  // Vote fractions are multiples of 1/n_trees.
  CHECK(((p * 50.0).array() - (p * 50.0).array().round()).abs().maxCoeff() < 1e-9);
  CHECK(rf.predict(fresh.x) == argmax_rows(p));
  CHECK_THROWS_AS(rf.predict_proba(Matrix::Zero(3, 4)), DimensionError);

  // Every tree voting class 0 gives (1, 0).
  RandomForest::Tree leaf{RandomForest::Node{}};
  const auto unanimous = RandomForest::from_parts(ForestParams{}, 1, 2, 2, {leaf, leaf, leaf});
  const Matrix q = unanimous.predict_proba(Matrix::Zero(2, 2));
  CHECK(q(0, 0) == 1.0);
  CHECK(q(0, 1) == 0.0);
}

TEST_CASE("determinism across runs and thread counts") {
  const Toy t = gaussian_classes(80, 6, 1.0, 12);
  const int saved = num_threads();
  set_num_threads(1);
  RandomForest serial(ForestParams{40, 0, 1, 5});
  serial.train(t.x, t.y);
  set_num_threads(4);
  RandomForest threaded(ForestParams{40, 0, 1, 5});
  threaded.train(t.x, t.y);
  set_num_threads(saved);
  CHECK(serial.predict_proba(t.x) == threaded.predict_proba(t.x));
  for (std::size_t k = 0; k < serial.trees().size(); ++k) {
    REQUIRE(serial.trees()[k].size() == threaded.trees()[k].size());
    for (std::size_t n = 0; n < serial.trees()[k].size(); ++n) {
      CHECK(serial.trees()[k][n].feature == threaded.trees()[k][n].feature);
      CHECK(serial.trees()[k][n].threshold == threaded.trees()[k][n].threshold);
    }
  }
  RandomForest other(ForestParams{40, 0, 1, 6});
  other.train(t.x, t.y);
  CHECK(other.predict_proba(t.x) != serial.predict_proba(t.x));
}

TEST_CASE("permuted prediction fast path") {
  const Toy t = gaussian_classes(50, 4, 1.0, 2);
  RandomForest rf(ForestParams{60, 0, 1, 1});
  rf.train(t.x, t.y);
  const auto fast = rf.permuted_predictor(t.x);
  const auto slow = rf.Classifier::permuted_predictor(t.x);
  Rng rng(77);
  for (Eigen::Index col = 0; col < 4; ++col) {
    std::vector<std::size_t> perm(50);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    CHECK(fast->predict_proba(col, perm) == slow->predict_proba(col, perm));
  }
}

TEST_CASE("duplicated training rows") {
  const Toy t = gaussian_classes(30, 3, 0.5, 5);
  RandomForest base(ForestParams{100, 0, 1, 2});
  base.train(t.x, t.y);
  const double before = evaluate(MetricKind::accuracy, t.y, base.predict_proba(t.x));

  Matrix x2(33, 3);
  x2 << t.x, t.x.topRows(3);
  Labels y2 = t.y;
  y2.insert(y2.end(), t.y.begin(), t.y.begin() + 3);
  RandomForest dup(ForestParams{100, 0, 1, 2});
  dup.train(x2, y2);
  const Labels hat = dup.predict(t.x.topRows(3));
  for (int i = 0; i < 3; ++i) CHECK(hat[static_cast<std::size_t>(i)] == t.y[static_cast<std::size_t>(i)]);
  CHECK(before == 1.0);
}

TEST_CASE("training preconditions") {
  RandomForest rf;
  CHECK_THROWS_AS(rf.train(Matrix::Zero(4, 2), Labels{0, 0, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(rf.train(Matrix::Zero(4, 2), Labels{0, 1, 0}), DimensionError);
  Matrix nan = Matrix::Zero(4, 2);
  nan(1, 1) = std::nan("");
  CHECK_THROWS_AS(rf.train(nan, Labels{0, 1, 0, 1}), PreconditionError);
  RandomForest wide(ForestParams{10, 3, 1, 1});
  CHECK_THROWS_AS(wide.train(Matrix::Zero(4, 2), Labels{0, 1, 0, 1}), ParameterError);
  CHECK_THROWS_AS(rf.predict_proba(Matrix::Zero(1, 2)), PreconditionError);
}

TEST_CASE("metrics") {
  Matrix p(3, 2);
  p << 0.9, 0.1, 0.2, 0.8, 0.4, 0.6;
  CHECK(evaluate(MetricKind::accuracy, {0, 1, 1}, p) == 1.0);
  CHECK(evaluate(MetricKind::accuracy, {1, 1, 1}, p) == doctest::Approx(2.0 / 3));
  CHECK(evaluate(MetricKind::logloss, {0, 1, 1}, p) ==
        doctest::Approx((std::log(0.9) + std::log(0.8) + std::log(0.6)) / 3).epsilon(1e-14));

  Matrix half(1, 2);
  half << 0.5, 0.5;
  CHECK(evaluate(MetricKind::logloss, {1}, half) == doctest::Approx(-0.6931471805599453).epsilon(1e-14));
  // Ties go to the lowest class.
  CHECK(argmax_rows(half)[0] == 0);

  Matrix sure(2, 2);
  sure << 0, 1, 1, 0;
  const double best = evaluate(MetricKind::logloss, {1, 0}, sure);
  CHECK(best <= 0.0);
  CHECK(best > -1e-11);
  CHECK(evaluate(MetricKind::logloss, {0, 1}, sure) == doctest::Approx(std::log(1e-12)));

  // Accuracy is invariant to a consistent relabeling.
  Matrix swapped(3, 2);
  swapped.col(0) = p.col(1);
  swapped.col(1) = p.col(0);
  CHECK(evaluate(MetricKind::accuracy, {1, 0, 1}, p) == evaluate(MetricKind::accuracy, {0, 1, 0}, swapped));

  CHECK_THROWS_AS(evaluate(MetricKind::logloss, {0, 1, 2}, Matrix::Constant(3, 3, 1.0 / 3)), ParameterError);
  CHECK_THROWS_AS(evaluate(MetricKind::accuracy, {0, 1}, p), DimensionError);
  CHECK(parse_metric("logloss") == MetricKind::logloss);
  CHECK(to_string(MetricKind::accuracy) == "accuracy");
  CHECK_THROWS_AS(parse_metric("auc"), ParameterError);
}
