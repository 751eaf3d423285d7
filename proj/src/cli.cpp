#include "veesa/cli.hpp"

#include "veesa/errors.hpp"
#include "veesa/io.hpp"
#include "veesa/parallel.hpp"
#include "veesa/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>

namespace veesa::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
  std::string test_data;
  std::string pipeline = "veesa-pipeline";
  int threads = 0;
  int pc = 1;
  std::vector<int> taus;
  std::optional<int> replicates;
  std::string metric;
  std::optional<int> folds;
  std::optional<int> repeats;
};

PipelineConfig load_config(const Options& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : io::read_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.replicates) c.pfi_replicates = *o.replicates;
  if (!o.metric.empty()) c.metric = parse_metric(o.metric);
  if (!o.taus.empty()) c.taus = o.taus;
  c.validate();
  return c;
}

FunctionalDataset require_data(const std::string& path, const char* flag) {
  if (path.empty()) throw CLI::RequiredError(flag);
  return io::read_dataset_csv(path);
}

fs::path out_dir(const Options& o, const fs::path& fallback) {
  const fs::path dir = o.out.empty() ? fallback : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

void cmd_simulate(const Options& o) {
  const auto sp = generate_shifted_peaks(o.seed.value_or(1));
  const fs::path dir = out_dir(o, ".");
  io::write_dataset_csv(dir / "train.csv", sp.train);
  io::write_dataset_csv(dir / "test.csv", sp.test);
}

void cmd_train(const Options& o, std::ostream& err) {
  const auto data = require_data(o.data, "--data");
  const auto config = load_config(o);
  const auto tp = train_pipeline(data, config);
  const fs::path dir = out_dir(o, o.pipeline);
  io::save_pipeline(tp, dir);
  err << "trained on " << data.size() << " functions; " << to_string(config.metric) << " = " << tp.train_metric
      << "; pipeline written to " << dir.string() << "\n";
}

void cmd_test(const Options& o, std::ostream& err) {
  const auto data = require_data(o.data, "--data");
  const auto tp = io::load_pipeline(o.pipeline);
  const auto report = test_pipeline(tp, data);
  const fs::path dir = out_dir(o, o.pipeline);
  io::write_text(dir / "test_report.json", io::format_test_report_json(report));
  if (report.pfi) {
    const auto names = io::pc_feature_names(tp.pca.variant, tp.n_pcs());
    io::write_text(dir / "test_pfi.csv", io::format_pfi_csv(*report.pfi, names));
  }
  err << "scored " << data.size() << " functions";
  if (report.accuracy) err << "; accuracy = " << *report.accuracy;
  err << "\n";
}

void cmd_pfi(const Options& o, std::ostream& err) {
  const auto data = require_data(o.data, "--data");
  if (!data.labels) throw PreconditionError("PFI needs a labeled dataset");
  auto tp = io::load_pipeline(o.pipeline);
  if (o.replicates) tp.config.pfi_replicates = *o.replicates;
  if (!o.metric.empty()) tp.config.metric = parse_metric(o.metric);
  if (o.seed) tp.config.seed = *o.seed;
  if (tp.config.pfi_replicates < 1) throw ParameterError("--replicates must be >= 1");
  const auto report = test_pipeline(tp, data);
  const auto names = io::pc_feature_names(tp.pca.variant, tp.n_pcs());
  const fs::path dir = out_dir(o, o.pipeline);
  io::write_text(dir / "pfi.json", io::format_pfi_json(*report.pfi, names));
  io::write_text(dir / "pfi.csv", io::format_pfi_csv(*report.pfi, names));
  err << "PFI over " << names.size() << " features written to " << dir.string() << "\n";
}

void cmd_pcdirs(const Options& o, std::ostream& err) {
  const auto tp = io::load_pipeline(o.pipeline);
  const auto taus = o.taus.empty() ? tp.config.taus : o.taus;
  const auto curves = principal_directions(tp.pca, o.pc - 1, taus);
  const fs::path dir = out_dir(o, o.pipeline);
  const auto file = dir / ("pcdirs_pc" + std::to_string(o.pc) + ".csv");
  io::write_text(file, io::format_directions_csv(tp.pca.grid, curves));
  err << "principal directions for PC " << o.pc << " written to " << file.string() << "\n";
}

void cmd_baseline(const Options& o, std::ostream& err) {
  const auto train = require_data(o.data, "--data");
  const auto test = require_data(o.test_data, "--test");
  const auto config = load_config(o);
  const auto report = cross_sectional_pipeline(train, test, config);
  const fs::path dir = out_dir(o, "baseline");
  io::write_text(dir / "baseline_report.json", io::format_test_report_json(report));
  if (report.pfi) {
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < train.grid.size(); ++i) names.push_back("t=" + io::format_double(train.grid.points()[i]));
    io::write_text(dir / "baseline_pfi.csv", io::format_pfi_csv(*report.pfi, names));
  }
  err << "cross-sectional baseline";
  if (report.accuracy) err << ": accuracy = " << *report.accuracy;
  err << "\n";
}

void cmd_cv(const Options& o, std::ostream& err) {
  const auto data = require_data(o.data, "--data");
  io::CvSettings cv;
  if (o.config.empty()) {
    cv.grid.push_back(PipelineConfig{});
  } else {
    cv = io::parse_cv_settings(io::read_text(o.config));
  }
  if (o.folds) cv.folds = *o.folds;
  if (o.repeats) cv.repeats = *o.repeats;
  if (o.seed)
    for (auto& c : cv.grid) c.seed = *o.seed;
  const auto cells = cross_validate(data, cv.folds, cv.repeats, cv.grid, o.seed.value_or(cv.grid.front().seed));
  const fs::path dir = out_dir(o, "cv");
  io::write_text(dir / "cv.csv", io::format_cv_csv(cells));
  err << "cross-validated " << cells.size() << " configuration(s); table written to " << (dir / "cv.csv").string() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Elastic functional data pipeline: alignment, efPCA, random forest, permutation importance", "veesa"};
  app.require_subcommand(1, 1);
  Options o;

  const auto shared = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "pipeline config JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "random seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--data", o.data, "dataset CSV");
    sub->add_option("--threads", o.threads, "worker threads (default: VEESA_THREADS or all cores)")->check(CLI::NonNegativeNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "write the shifted-peaks train.csv/test.csv");
  shared(simulate);
  auto* train = app.add_subcommand("train", "train a pipeline and write it to a directory");
  shared(train);
  train->add_option("--pipeline", o.pipeline, "pipeline directory when --out is not given");
  auto* test = app.add_subcommand("test", "score a dataset with a trained pipeline");
  shared(test);
  test->add_option("--pipeline", o.pipeline, "trained pipeline directory");
  auto* pfi_cmd = app.add_subcommand("pfi", "permutation feature importance of a pipeline on a dataset");
  shared(pfi_cmd);
  pfi_cmd->add_option("--pipeline", o.pipeline, "trained pipeline directory");
  pfi_cmd->add_option("--replicates", o.replicates, "permutations per feature");
  pfi_cmd->add_option("--metric", o.metric, "accuracy or logloss");
  auto* pcdirs = app.add_subcommand("pcdirs", "principal-direction curves for one PC");
  shared(pcdirs);
  pcdirs->add_option("--pipeline", o.pipeline, "trained pipeline directory");
  pcdirs->add_option("--pc", o.pc, "principal component (1-based)")->check(CLI::PositiveNumber);
  pcdirs->add_option("--taus", o.taus, "tau values, e.g. --taus 1 2");
  auto* baseline = app.add_subcommand("baseline", "cross-sectional baseline (grid values as features)");
  shared(baseline);
  baseline->add_option("--test", o.test_data, "held-out dataset CSV")->required();
  baseline->add_option("--replicates", o.replicates, "permutations per feature");
  baseline->add_option("--metric", o.metric, "accuracy or logloss");
  auto* cv = app.add_subcommand("cv", "stratified cross-validation over a config grid");
  shared(cv);
  cv->add_option("--folds", o.folds, "number of folds");
  cv->add_option("--repeats", o.repeats, "number of repeats");
  train->add_option("--replicates", o.replicates, "permutations per feature");
  train->add_option("--metric", o.metric, "accuracy or logloss");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'veesa --help' for usage\n";
    return 2;
  }

  try {
    if (o.threads > 0) set_num_threads(o.threads);
    if (*simulate)
      cmd_simulate(o);
    else if (*train)
      cmd_train(o, err);
    else if (*test)
      cmd_test(o, err);
    else if (*pfi_cmd)
      cmd_pfi(o, err);
    else if (*pcdirs)
      cmd_pcdirs(o, err);
    else if (*baseline)
      cmd_baseline(o, err);
    else if (*cv)
      cmd_cv(o, err);
  } catch (const CLI::RequiredError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace veesa::cli
