#include "doctest.h"
#include "support.hpp"

#include "veesa/errors.hpp"
#include "veesa/explain.hpp"
#include "veesa/parallel.hpp"

#include <algorithm>
#include <numeric>

using namespace veesa;
using namespace veesa::testing;

namespace {

// p(class 1) = lo + (hi - lo) * [x0 > 0.5]; other columns ignored.
class ThresholdModel final : public Classifier {
 public:
  ThresholdModel(Eigen::Index width, double lo, double hi) : width_(width), lo_(lo), hi_(hi) {}
  void train(const Matrix&, const Labels&) override {}
  Matrix predict_proba(const Matrix& x) const override {
    Matrix p(x.rows(), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      p(i, 1) = x(i, 0) > 0.5 ? hi_ : lo_;
      p(i, 0) = 1.0 - p(i, 1);
    }
    return p;
  }
  bool trained() const override { return true; }
  Eigen::Index n_features() const override { return width_; }
  int n_classes() const override { return 2; }

 private:
  Eigen::Index width_;
  double lo_, hi_;
};

std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

TEST_CASE("three-row exhaustive oracle") {
  Matrix x(3, 2);
  x << 0, 5, 1, 6, 1, 7;
  const Labels y{0, 1, 0};
  const ThresholdModel model(2, 0.0, 1.0);

  // By hand: baseline predictions (0,1,1) score 2/3. Moving the 0 of column 0
  // to row 1 or 2 gives (1,0,1) or (1,1,0); only (1,0,1) scores 0.
  const auto perms = all_permutations(3);
  const std::vector<double> expected{0, 0, 2.0 / 3, 0, 2.0 / 3, 0};
  double sum = 0.0;
  for (std::size_t k = 0; k < perms.size(); ++k) {
    const double v = pfi_single(model, x, y, MetricKind::accuracy, 0, perms[k]);
    CHECK(v == doctest::Approx(expected[k]).epsilon(1e-15));
    sum += v;
    // The ignored column never matters.
    CHECK(pfi_single(model, x, y, MetricKind::accuracy, 1, perms[k]) == 0.0);
  }
  CHECK(sum / 6 == doctest::Approx(2.0 / 9));

  // Log-loss with soft probabilities, each permutation written out.
  const ThresholdModel soft(2, 0.2, 0.7);
  const auto ll = [](const std::vector<double>& p1, const Labels& lab) {
    double s = 0;
    for (std::size_t i = 0; i < p1.size(); ++i) s += lab[i] == 1 ? std::log(p1[i]) : std::log(1 - p1[i]);
    return s / static_cast<double>(p1.size());
  };
  const double base = ll({0.2, 0.7, 0.7}, y);
  for (const auto& perm : perms) {
    std::vector<double> p1(3);
    for (std::size_t i = 0; i < 3; ++i) p1[i] = x(static_cast<Eigen::Index>(perm[i]), 0) > 0.5 ? 0.7 : 0.2;
    CHECK(pfi_single(soft, x, y, MetricKind::logloss, 0, perm) == doctest::Approx(base - ll(p1, y)).epsilon(1e-14));
  }
}

TEST_CASE("identity and constant models") {
  Rng rng(4);
  Matrix x(12, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  Labels y(12);
  for (std::size_t i = 0; i < 12; ++i) y[i] = static_cast<int>(i % 2);
  std::vector<std::size_t> id(12);
  std::iota(id.begin(), id.end(), 0);

  const ThresholdModel model(3, 0.1, 0.8);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(pfi_single(model, x, y, MetricKind::logloss, j, id) == 0.0);

  const ThresholdModel constant(3, 0.4, 0.4);
  for (int r = 0; r < 5; ++r) {
    const auto perm = pfi_permutation(9, 0, r, 12);
    CHECK(pfi_single(constant, x, y, MetricKind::accuracy, 0, perm) == 0.0);
    CHECK(pfi_single(constant, x, y, MetricKind::logloss, 0, perm) == 0.0);
  }
}

TEST_CASE("negative importance is kept") {
  Matrix x(3, 1);
  x << 0, 1, 1;
  const Labels y{1, 0, 1};
  const ThresholdModel model(1, 0.0, 1.0);
  // Baseline (0,1,1) scores 1/3; permutation (1,0,2) predicts (1,0,1), all right.
  CHECK(pfi_single(model, x, y, MetricKind::accuracy, 0, {1, 0, 2}) == doctest::Approx(-2.0 / 3));
}

TEST_CASE("invalid permutations") {
  Matrix x = Matrix::Zero(3, 1);
  const Labels y{0, 1, 0};
  const ThresholdModel model(1, 0.0, 1.0);
  CHECK_THROWS_AS(pfi_single(model, x, y, MetricKind::accuracy, 0, {0, 0, 1}), ParameterError);
  CHECK_THROWS_AS(pfi_single(model, x, y, MetricKind::accuracy, 0, {0, 1, 3}), ParameterError);
  CHECK_THROWS_AS(pfi_single(model, x, y, MetricKind::accuracy, 0, {0, 1}), ParameterError);
  CHECK_THROWS_AS(pfi_single(model, x, y, MetricKind::accuracy, 1, {0, 1, 2}), DimensionError);
  CHECK_THROWS_AS(pfi(model, x, y, MetricKind::accuracy, 0, 1), ParameterError);
  CHECK_THROWS_AS(pfi(model, Matrix::Zero(3, 2), y, MetricKind::accuracy, 2, 1), DimensionError);
}

TEST_CASE("permutation streams") {
  const auto a = pfi_permutation(5, 2, 3, 50);
  CHECK(a == pfi_permutation(5, 2, 3, 50));
  CHECK(a != pfi_permutation(5, 2, 4, 50));
  CHECK(a != pfi_permutation(5, 3, 3, 50));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("report decomposes into single replicates") {
  Rng rng(31);
  Matrix x(40, 4);
  Labels y(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = rng.normal() + (j == 0 ? 2.0 * (i % 2) : 0.0);
  }
  x.col(3).setConstant(1.5);
  RandomForest rf(ForestParams{80, 0, 1, 3});
  rf.train(x, y);

  for (auto metric : {MetricKind::accuracy, MetricKind::logloss}) {
    const auto report = pfi(rf, x, y, metric, 6, 1234);
    CHECK(report.seed == 1234);
    CHECK(report.replicates == 6);
    CHECK(report.per_feature.size() == 4);
    CHECK(report.baseline_metric == evaluate(metric, y, rf.predict_proba(x)));
    for (Eigen::Index j = 0; j < 4; ++j) {
      const auto& f = report.per_feature[static_cast<std::size_t>(j)];
      double sum = 0.0;
      for (int r = 0; r < 6; ++r) {
        const double single = pfi_single(rf, x, y, metric, j, pfi_permutation(1234, j, r, 40));
        CHECK(f.replicates[static_cast<std::size_t>(r)] == single);
        sum += single;
      }
      CHECK(std::abs(f.mean - sum / 6) < 1e-12);
      double ss = 0.0;
      for (double v : f.replicates) ss += (v - f.mean) * (v - f.mean);
      CHECK(f.sd == doctest::Approx(std::sqrt(ss / 5)));
    }
    // A constant column carries no information.
    for (double v : report.per_feature[3].replicates) CHECK(v == 0.0);
  }

  const auto one = pfi(rf, x, y, MetricKind::accuracy, 1, 7);
  for (const auto& f : one.per_feature) CHECK(f.sd == 0.0);

  const int saved = num_threads();
  set_num_threads(1);
  const auto serial = pfi(rf, x, y, MetricKind::logloss, 4, 99);
  set_num_threads(3);
  const auto threaded = pfi(rf, x, y, MetricKind::logloss, 4, 99);
  set_num_threads(saved);
  for (std::size_t j = 0; j < 4; ++j) CHECK(serial.per_feature[j].replicates == threaded.per_feature[j].replicates);
}

TEST_CASE("single row") {
  Matrix x(1, 2);
  x << 0.7, 0.1;
  const ThresholdModel model(2, 0.0, 1.0);
  const auto report = pfi(model, x, {1}, MetricKind::accuracy, 5, 3);
  for (const auto& f : report.per_feature) {
    CHECK(f.mean == 0.0);
    for (double v : f.replicates) CHECK(v == 0.0);
  }
}
