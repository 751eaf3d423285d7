#include "doctest.h"
#include "support.hpp"

#include "veesa/efpca.hpp"
#include "veesa/errors.hpp"
#include "veesa/sphere.hpp"

#include <Eigen/Eigenvalues>

using namespace veesa;
using namespace veesa::testing;

namespace {

const AlignmentResult& bumps_alignment() {
  static const AlignmentResult res = [] {
    const Grid g = Grid::uniform(-5, 5, 60);
    Rng rng(21);
    FunctionalDataset d{g, {}, std::nullopt};
    for (int i = 0; i < 30; ++i)
      d.samples.push_back(
          sample_of(gaussian_bump(g.normalized(), rng.normal(1.0, 0.15), rng.normal(0.5, 0.06), 0.07)));
    return karcher_mean(d);
  }();
  return res;
}

constexpr PcaVariant kVariants[] = {PcaVariant::vertical, PcaVariant::horizontal, PcaVariant::joint};

}  // namespace

TEST_CASE("variant names") {
  for (auto v : kVariants) CHECK(parse_variant(to_string(v)) == v);
  CHECK(parse_variant("jfpca") == PcaVariant::joint);
  CHECK_THROWS_AS(parse_variant("diagonal"), ParameterError);
}

TEST_CASE("efpca algebra") {
  const auto& al = bumps_alignment();
  const auto n = static_cast<Eigen::Index>(al.aligned_srvf.size());
  for (auto variant : kVariants) {
    CAPTURE(to_string(variant));
    const auto model = fit_efpca(al, variant);
    const Eigen::Index p = model.rank();
    CHECK(p == std::min(n - 1, model.dimension()));
    CHECK_FALSE(model.degenerate);

    CHECK((model.basis.transpose() * model.basis - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(model.proportion_variance.sum() - 1.0) < 1e-8);
    CHECK((model.proportion_variance.array() >= 0).all());
    for (Eigen::Index j = 1; j < p; ++j) CHECK(model.singular_values[j] <= model.singular_values[j - 1]);

    // Independent oracle: eigen-decompose the covariance formed explicitly.
    const Matrix z = representation(model, al.aligned_srvf, al.warps);
    const Matrix zc = z.rowwise() - z.colwise().mean();
    const Matrix K = zc.transpose() * zc / static_cast<double>(n - 1);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
    const Vector ev = eig.eigenvalues().reverse();
    CHECK(ev.minCoeff() >= -1e-8);
    CHECK(std::abs(model.singular_values.sum() - K.trace()) <= 1e-6 * K.trace());
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(model.singular_values[j] == doctest::Approx(ev[j]).epsilon(1e-8));

    // Sign convention: largest-magnitude entry of every column is positive.
    for (Eigen::Index j = 0; j < p; ++j) {
      Eigen::Index arg = 0;
      model.basis.col(j).cwiseAbs().maxCoeff(&arg);
      CHECK(model.basis(arg, j) > 0.0);
    }

    const PcScores s = transform(model, al.aligned_srvf, al.warps);
    CHECK(s.rows() == n);
    CHECK(s.colwise().mean().cwiseAbs().maxCoeff() < 1e-8);
    const Matrix cov = s.transpose() * s / static_cast<double>(n - 1);
    const double top = model.singular_values[0];
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = 0; b < p; ++b) {
        const double expected = a == b ? model.singular_values[a] : 0.0;
        CHECK(std::abs(cov(a, b) - expected) <= 1e-6 * top);
      }

    // Full-rank roundtrip.
    const Matrix back = (s * model.basis.transpose()).rowwise() + model.mean_z.transpose();
    CHECK((back - z).cwiseAbs().maxCoeff() < 1e-8);

    // Deterministic and idempotent.
    CHECK(transform(model, al.aligned_srvf, al.warps) == s);
    CHECK(fit_efpca(al, variant).basis == model.basis);
  }
}

TEST_CASE("mean representation scores zero") {
  const auto& al = bumps_alignment();
  const auto model = fit_efpca(al, PcaVariant::vertical);
  const SrvfCurve mean_q{model.mean_z, 0.0};
  const PcScores s = transform(model, {mean_q}, {WarpingFunction::identity(model.grid)});
  CHECK(s.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("joint constant") {
  const auto& al = bumps_alignment();
  const auto model = fit_efpca(al, PcaVariant::joint);
  const Eigen::Index m = model.grid.size();

  // Default C balances the total variance of the two blocks.
  const Matrix z = representation(model, al.aligned_srvf, al.warps);
  const Matrix zc = z.rowwise() - z.colwise().mean();
  CHECK(zc.leftCols(m).squaredNorm() == doctest::Approx(zc.rightCols(m).squaredNorm()).epsilon(1e-10));

  const auto fixed = fit_efpca(al, PcaVariant::joint, 2.5);
  CHECK(fixed.c_constant == 2.5);
  const Matrix zf = representation(fixed, al.aligned_srvf, al.warps);
  CHECK((zf.rightCols(m) * model.c_constant - z.rightCols(m) * 2.5).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(fit_efpca(al, PcaVariant::joint, 0.0), ParameterError);
  CHECK_THROWS_AS(fit_efpca(al, PcaVariant::joint, -1.0), ParameterError);
}

TEST_CASE("horizontal tangent vectors") {
  const auto& al = bumps_alignment();
  const auto model = fit_efpca(al, PcaVariant::horizontal);
  const Matrix z = representation(model, al.aligned_srvf, al.warps);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Vector v = z.row(i).transpose();
    // Tangent at the mean and mapped back onto the warp's psi.
    CHECK(std::abs(inner(model.grid, v, model.mean_psi)) < 1e-8);
    const Vector back = sphere::exp_map(model.grid, model.mean_psi, v);
    CHECK(max_abs(back - al.warps[static_cast<std::size_t>(i)].psi()) < 1e-8);
  }
}

TEST_CASE("rank and degenerate cases") {
  const Grid g = Grid::uniform(0, 1, 40);
  const Vector& t = g.normalized();
  const auto align_rows = [&](const std::vector<Vector>& rows) {
    FunctionalDataset d{g, {}, std::nullopt};
    for (const auto& r : rows) d.samples.push_back(sample_of(r));
    return karcher_mean(d);
  };

  const auto two = align_rows({gaussian_bump(t, 1.0, 0.5, 0.1), gaussian_bump(t, 1.4, 0.5, 0.1)});
  for (auto variant : {PcaVariant::vertical, PcaVariant::joint}) {
    const auto model = fit_efpca(two, variant);
    CHECK(model.rank() == 1);
    CHECK(model.proportion_variance[0] == doctest::Approx(1.0));
  }

  const auto same = align_rows(std::vector<Vector>(3, gaussian_bump(t, 1.0, 0.5, 0.1)));
  const auto flat = fit_efpca(same, PcaVariant::vertical);
  CHECK(flat.degenerate);
  CHECK(flat.singular_values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(flat.proportion_variance.cwiseAbs().maxCoeff() == 0.0);
  const auto curves = principal_directions(flat, 0, {1, 2});
  for (const auto& c : curves) CHECK(c.curve.values == curves[0].curve.values);

  const auto one = align_rows({gaussian_bump(t, 1.0, 0.5, 0.1)});
  CHECK_THROWS_AS(fit_efpca(one, PcaVariant::vertical), PreconditionError);
}

TEST_CASE("principal directions") {
  const auto& al = bumps_alignment();
  for (auto variant : kVariants) {
    CAPTURE(to_string(variant));
    const auto model = fit_efpca(al, variant);
    const auto curves = principal_directions(model, 0, {1, 2});
    REQUIRE(curves.size() == 5);
    CHECK(curves[0].tau == 0);
    CHECK(curves[0].sign == 0);
    for (std::size_t k = 1; k < curves.size(); ++k) {
      CHECK(curves[k].tau == (k <= 2 ? 1 : 2));
      CHECK(curves[k].sign == (k % 2 == 1 ? -1 : 1));
      CHECK(curves[k].curve.values.allFinite());
    }
    // The tau = 0 curve is the PCA center mapped back; it sits on the
    // Karcher mean up to the final alignment pass.
    CHECK(max_abs(curves[0].curve.values - model.mean_f.values) < 0.05);
    // Larger tau moves further from the mean.
    const double d1 = l2_norm(model.grid, curves[2].curve.values - curves[0].curve.values);
    const double d2 = l2_norm(model.grid, curves[4].curve.values - curves[0].curve.values);
    CHECK(d2 > d1);
    CHECK(d1 > 0.0);

    CHECK_THROWS_AS(principal_directions(model, model.rank(), {1}), ParameterError);
    CHECK_THROWS_AS(principal_directions(model, 0, {0}), ParameterError);
  }

  // Vertical reconstruction is exactly the inverse SRVF of mean_z.
  const auto vm = fit_efpca(al, PcaVariant::vertical);
  const auto vc = principal_directions(vm, 0, {});
  CHECK(vc.size() == 1);
  CHECK(max_abs(vc[0].curve.values - from_srvf(vm.grid, SrvfCurve{vm.mean_z, vm.mean_initial_value}).values) == 0.0);
}

TEST_CASE("transform validates shapes") {
  const auto& al = bumps_alignment();
  const auto model = fit_efpca(al, PcaVariant::joint);
  const Grid other = Grid::uniform(0, 1, 10);
  CHECK_THROWS_AS(transform(model, {SrvfCurve{Vector::Zero(10), 0}}, {WarpingFunction::identity(other)}),
                  DimensionError);
  CHECK_THROWS_AS(transform(model, al.aligned_srvf, {}), DimensionError);
}
