#include "veesa/errors.hpp"
#include "veesa/io.hpp"
#include "veesa/parallel.hpp"
#include "veesa/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace veesa;

namespace {

using OptLabels = std::optional<std::vector<std::string>>;

FunctionalDataset dataset(const Vector& t, const Matrix& values, const OptLabels& labels) {
  if (values.cols() != t.size())
    throw DimensionError("values have " + std::to_string(values.cols()) + " columns but the grid has " +
                         std::to_string(t.size()) + " points");
  FunctionalDataset d{Grid(t), {}, labels};
  for (Eigen::Index i = 0; i < values.rows(); ++i) d.samples.push_back({values.row(i).transpose()});
  d.validate();
  return d;
}

py::dict dataset_dict(const FunctionalDataset& d) {
  py::dict out;
  out["t"] = d.grid.points();
  out["values"] = d.values_matrix();
  out["labels"] = d.labels ? py::cast(*d.labels) : py::none();
  return out;
}

Matrix stack(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

py::dict pfi_dict(const PfiReport& r, const std::vector<std::string>& names) {
  Matrix reps(static_cast<Eigen::Index>(r.per_feature.size()), r.replicates);
  Vector mean(reps.rows()), sd(reps.rows());
  for (std::size_t j = 0; j < r.per_feature.size(); ++j) {
    const auto& f = r.per_feature[j];
    for (int k = 0; k < r.replicates; ++k) reps(static_cast<Eigen::Index>(j), k) = f.replicates[static_cast<std::size_t>(k)];
    mean[static_cast<Eigen::Index>(j)] = f.mean;
    sd[static_cast<Eigen::Index>(j)] = f.sd;
  }
  py::dict out;
  out["features"] = names;
  out["mean"] = mean;
  out["sd"] = sd;
  out["replicates"] = reps;
  out["baseline_metric"] = r.baseline_metric;
  out["metric"] = to_string(r.metric);
  out["seed"] = r.seed;
  return out;
}

py::dict report_dict(const TestReport& r, const std::vector<std::string>& names) {
  py::dict out;
  out["features"] = r.features;
  out["probabilities"] = r.probabilities;
  std::vector<std::string> predicted;
  for (int p : r.predictions) predicted.push_back(r.classes[static_cast<std::size_t>(p)]);
  out["predictions"] = predicted;
  out["classes"] = r.classes;
  out["metric"] = to_string(r.metric);
  out["metric_value"] = r.metric_value ? py::cast(*r.metric_value) : py::none();
  out["accuracy"] = r.accuracy ? py::cast(*r.accuracy) : py::none();
  out["pfi"] = r.pfi ? py::object(pfi_dict(*r.pfi, names)) : py::none();
  return out;
}

std::vector<std::string> pc_names(const TrainedPipeline& tp) { return io::pc_feature_names(tp.pca.variant, tp.n_pcs()); }

}  // namespace

PYBIND11_MODULE(_veesa, m) {
  m.doc() = "Elastic functional data pipeline: alignment, efPCA, random forest, permutation importance";

  // FormatError and friends derive from std::runtime_error / std::invalid_argument,
  // which pybind11 already maps to RuntimeError / ValueError.

  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);

  m.def(
      "simulate",
      [](std::uint64_t seed) {
        const auto sp = generate_shifted_peaks(seed);
        py::dict out;
        out["train"] = dataset_dict(sp.train);
        out["test"] = dataset_dict(sp.test);
        return out;
      },
      py::arg("seed") = 1, "Shifted-peaks train/test split (400/100 functions on 150 points).");

  m.def(
      "to_srvf",
      [](const Vector& t, const Vector& f) {
        const auto q = to_srvf(Grid(t), FunctionalSample{f});
        return py::make_tuple(q.values, q.initial_value);
      },
      py::arg("t"), py::arg("f"), "Returns (q, f(t0)).");
  m.def(
      "from_srvf", [](const Vector& t, const Vector& q, double f0) { return from_srvf(Grid(t), SrvfCurve{q, f0}).values; },
      py::arg("t"), py::arg("q"), py::arg("f0") = 0.0);

  m.def(
      "optimal_warp",
      [](const Vector& t, const Vector& f1, const Vector& f2) {
        const Grid g(t);
        const auto r = optimal_warp(g, to_srvf(g, FunctionalSample{f1}), to_srvf(g, FunctionalSample{f2}));
        return py::make_tuple(r.warp.values(), r.distance());
      },
      py::arg("t"), py::arg("f1"), py::arg("f2"), "Warp aligning f2 to f1 on [0, 1], and the amplitude distance.");
  m.def(
      "amplitude_distance",
      [](const Vector& t, const Vector& f1, const Vector& f2) {
        return amplitude_distance(Grid(t), FunctionalSample{f1}, FunctionalSample{f2});
      },
      py::arg("t"), py::arg("f1"), py::arg("f2"));
  m.def(
      "phase_distance",
      [](const Vector& t, const Vector& g1, const Vector& g2) {
        const Grid g(t);
        return phase_distance(g, WarpingFunction(g, g1), WarpingFunction(g, g2));
      },
      py::arg("t"), py::arg("gamma1"), py::arg("gamma2"));

  m.def(
      "karcher_mean",
      [](const Vector& t, const Matrix& values, int max_iter, double tol) {
        AlignmentOptions opts;
        opts.max_iter = max_iter;
        opts.tol = tol;
        const auto r = karcher_mean(dataset(t, values, std::nullopt), opts);
        std::vector<Vector> warps, aligned;
        for (std::size_t i = 0; i < r.warps.size(); ++i) {
          warps.push_back(r.warps[i].values());
          aligned.push_back(r.aligned[i].values);
        }
        py::dict out;
        out["mean"] = r.karcher_mean_f.values;
        out["mean_srvf"] = r.karcher_mean_srvf.values;
        out["aligned"] = stack(aligned);
        out["warps"] = stack(warps);
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["objective"] = r.objective;
        return out;
      },
      py::arg("t"), py::arg("values"), py::arg("max_iter") = 20, py::arg("tol") = 1e-4);

  py::class_<TrainedPipeline>(m, "Pipeline")
      .def_static(
          "train",
          [](const Vector& t, const Matrix& values, const std::vector<std::string>& labels, const std::string& config) {
            return train_pipeline(dataset(t, values, labels), io::parse_config(config));
          },
          py::arg("t"), py::arg("values"), py::arg("labels"), py::arg("config") = "{}",
          "Train from a (functions x grid points) matrix; config is JSON text.")
      .def_static("load", &io::load_pipeline, py::arg("directory"))
      .def("save", [](const TrainedPipeline& tp, const std::filesystem::path& dir) { io::save_pipeline(tp, dir); },
           py::arg("directory"))
      .def(
          "test",
          [](const TrainedPipeline& tp, const Matrix& values, const OptLabels& labels, bool pfi) {
            const auto report = test_pipeline(tp, dataset(tp.pca.grid.points(), values, labels), pfi);
            return report_dict(report, pc_names(tp));
          },
          py::arg("values"), py::arg("labels") = py::none(), py::arg("pfi") = true)
      .def(
          "principal_directions",
          [](const TrainedPipeline& tp, int pc, const std::vector<int>& taus) {
            py::list out;
            for (const auto& c : principal_directions(tp.pca, pc - 1, taus))
              out.append(py::make_tuple(c.tau, c.sign, c.curve.values));
            return out;
          },
          py::arg("pc") = 1, py::arg("taus") = std::vector<int>{1, 2}, "List of (tau, sign, curve); pc is 1-based.")
      .def_property_readonly("classes", [](const TrainedPipeline& tp) { return tp.classes; })
      .def_property_readonly("feature_names", &pc_names)
      .def_property_readonly("train_scores", [](const TrainedPipeline& tp) { return tp.train_scores; })
      .def_property_readonly("train_metric", [](const TrainedPipeline& tp) { return tp.train_metric; })
      .def_property_readonly("train_pfi",
                             [](const TrainedPipeline& tp) {
                               return tp.train_pfi ? py::object(pfi_dict(*tp.train_pfi, pc_names(tp))) : py::none();
                             })
      .def_property_readonly("proportion_variance", [](const TrainedPipeline& tp) { return tp.pca.proportion_variance; })
      .def_property_readonly("karcher_mean", [](const TrainedPipeline& tp) { return tp.alignment.karcher_mean_f.values; })
      .def_property_readonly("config", [](const TrainedPipeline& tp) { return io::format_config(tp.config); })
      .def_property_readonly("grid", [](const TrainedPipeline& tp) { return tp.pca.grid.points(); });

  m.def(
      "baseline",
      [](const Vector& t, const Matrix& train, const std::vector<std::string>& train_labels, const Matrix& test,
         const OptLabels& test_labels, const std::string& config) {
        const auto report =
            cross_sectional_pipeline(dataset(t, train, train_labels), dataset(t, test, test_labels), io::parse_config(config));
        std::vector<std::string> names;
        for (Eigen::Index i = 0; i < t.size(); ++i) names.push_back("t=" + io::format_double(t[i]));
        return report_dict(report, names);
      },
      py::arg("t"), py::arg("train"), py::arg("train_labels"), py::arg("test"), py::arg("test_labels") = py::none(),
      py::arg("config") = "{}", "Cross-sectional baseline: grid values as features.");

  m.def(
      "cross_validate",
      [](const Vector& t, const Matrix& values, const std::vector<std::string>& labels, const std::string& config,
         std::optional<int> folds, std::optional<int> repeats, std::optional<std::uint64_t> seed) {
        auto cv = io::parse_cv_settings(config);
        if (folds) cv.folds = *folds;
        if (repeats) cv.repeats = *repeats;
        const auto cells =
            cross_validate(dataset(t, values, labels), cv.folds, cv.repeats, cv.grid, seed.value_or(cv.grid.front().seed));
        py::list out;
        for (const auto& c : cells) out.append(py::make_tuple(io::format_config(c.config), c.accuracy));
        return out;
      },
      py::arg("t"), py::arg("values"), py::arg("labels"), py::arg("config") = "{}", py::arg("folds") = py::none(),
      py::arg("repeats") = py::none(), py::arg("seed") = py::none(),
      "List of (config JSON, accuracy), one per grid cell of the config's cv block.");
}
