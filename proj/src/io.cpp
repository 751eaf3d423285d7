#include "veesa/io.hpp"

#include "veesa/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace veesa::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' (does the file exist?)");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || cell.empty())
    throw FormatError("line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
  return v;
}

std::string csv_matrix(const std::vector<std::string>& header, const Matrix& m) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + format_double(m(i, j));
    out += '\n';
  }
  return out;
}

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

Matrix json_mat(const json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, cols_if_empty);
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": malformed JSON (" + std::string(e.what()) + ")");
  }
}

}  // namespace

FunctionalDataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(trim(line));
      break;
    }
  }
  if (header.empty()) throw FormatError("dataset CSV is empty");
  const bool labeled = header.back() == "label";
  if (labeled) header.pop_back();
  Vector grid(static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < header.size(); ++i) grid[static_cast<Eigen::Index>(i)] = parse_number(header[i], line_no);

  FunctionalDataset data;
  try {
    data.grid = Grid(grid);
  } catch (const PreconditionError& e) {
    throw FormatError("dataset CSV header: " + std::string(e.what()));
  }
  if (labeled) data.labels.emplace();
  const std::size_t width = header.size() + (labeled ? 1 : 0);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto cells = split_csv_line(t);
    if (cells.size() != width)
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields, got " +
                        std::to_string(cells.size()));
    Vector v(static_cast<Eigen::Index>(header.size()));
    for (std::size_t i = 0; i < header.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_number(cells[i], line_no);
    if (!v.allFinite()) throw FormatError("line " + std::to_string(line_no) + ": non-finite value");
    data.samples.push_back({std::move(v)});
    if (labeled) {
      if (cells.back().empty()) throw FormatError("line " + std::to_string(line_no) + ": empty label");
      data.labels->push_back(cells.back());
    }
  }
  return data;
}

std::string format_dataset_csv(const FunctionalDataset& data) {
  std::string out;
  const Vector& t = data.grid.points();
  for (Eigen::Index i = 0; i < t.size(); ++i) out += (i ? "," : "") + format_double(t[i]);
  if (data.labels) out += ",label";
  out += '\n';
  for (std::size_t s = 0; s < data.samples.size(); ++s) {
    const Vector& v = data.samples[s].values;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    if (data.labels) out += "," + (*data.labels)[s];
    out += '\n';
  }
  return out;
}

FunctionalDataset read_dataset_csv(const fs::path& path) {
  try {
    return parse_dataset_csv(read_text(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_dataset_csv(const fs::path& path, const FunctionalDataset& data) { write_text(path, format_dataset_csv(data)); }

namespace {

json config_json(const PipelineConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["smoothing_runs"] = c.smoothing_runs;
  j["variant"] = to_string(c.variant);
  j["n_pcs_used"] = c.n_pcs_used ? json(*c.n_pcs_used) : json(nullptr);
  j["forest"] = {{"n_trees", c.forest.n_trees}, {"mtry", c.forest.mtry}, {"min_node_size", c.forest.min_node_size}};
  j["metric"] = to_string(c.metric);
  j["pfi_replicates"] = c.pfi_replicates;
  j["seed"] = c.seed;
  j["taus"] = c.taus;
  j["alignment"] = {{"max_iter", c.align_max_iter}, {"tol", c.align_tol}};
  j["c_constant"] = c.c_constant ? json(*c.c_constant) : json(nullptr);
  return j;
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ParameterError("config key '" + key + "' has the wrong type");
  }
}

void apply_config(const json& j, PipelineConfig& c, bool allow_cv) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "schema_version") {
      if (get_as<int>(value, key) != kSchemaVersion)
        throw FormatError("unsupported config schema_version " + value.dump());
    } else if (key == "smoothing_runs") {
      c.smoothing_runs = get_as<int>(value, key);
    } else if (key == "variant") {
      c.variant = parse_variant(get_as<std::string>(value, key));
    } else if (key == "n_pcs_used") {
      if (value.is_null() || (value.is_string() && value.get<std::string>() == "all"))
        c.n_pcs_used.reset();
      else
        c.n_pcs_used = get_as<int>(value, key);
    } else if (key == "forest") {
      if (!value.is_object()) throw ParameterError("config key 'forest' must be an object");
      for (const auto& [fk, fv] : value.items()) {
        if (fk == "n_trees")
          c.forest.n_trees = get_as<int>(fv, "forest." + fk);
        else if (fk == "mtry")
          c.forest.mtry = fv.is_null() ? 0 : get_as<int>(fv, "forest." + fk);
        else if (fk == "min_node_size")
          c.forest.min_node_size = get_as<int>(fv, "forest." + fk);
        else
          throw ParameterError("unknown config key 'forest." + fk + "'");
      }
    } else if (key == "metric") {
      c.metric = parse_metric(get_as<std::string>(value, key));
    } else if (key == "pfi_replicates") {
      c.pfi_replicates = get_as<int>(value, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(value, key);
    } else if (key == "taus") {
      c.taus = get_as<std::vector<int>>(value, key);
    } else if (key == "alignment") {
      if (!value.is_object()) throw ParameterError("config key 'alignment' must be an object");
      for (const auto& [ak, av] : value.items()) {
        if (ak == "max_iter")
          c.align_max_iter = get_as<int>(av, "alignment." + ak);
        else if (ak == "tol")
          c.align_tol = get_as<double>(av, "alignment." + ak);
        else
          throw ParameterError("unknown config key 'alignment." + ak + "'");
      }
    } else if (key == "c_constant") {
      if (value.is_null())
        c.c_constant.reset();
      else
        c.c_constant = get_as<double>(value, key);
    } else if (key == "cv" && allow_cv) {
      continue;
    } else {
      throw ParameterError("unknown config key '" + key + "'");
    }
  }
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
  PipelineConfig c;
  apply_config(parse_json(json_text, "config"), c, true);
  c.validate();
  return c;
}

PipelineConfig read_config(const fs::path& path) {
  try {
    return parse_config(read_text(path));
  } catch (const ParameterError& e) {
    throw ParameterError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_config(const PipelineConfig& config) { return dump(config_json(config)); }

CvSettings parse_cv_settings(const std::string& json_text) {
  const json j = parse_json(json_text, "config");
  PipelineConfig base;
  apply_config(j, base, true);
  CvSettings s;
  if (j.contains("cv")) {
    const json& cv = j["cv"];
    if (!cv.is_object()) throw ParameterError("config key 'cv' must be an object");
    for (const auto& [k, v] : cv.items()) {
      if (k == "folds")
        s.folds = get_as<int>(v, "cv.folds");
      else if (k == "repeats")
        s.repeats = get_as<int>(v, "cv.repeats");
      else if (k == "grid") {
        if (!v.is_array()) throw ParameterError("config key 'cv.grid' must be an array of overrides");
        for (const auto& cell : v) {
          PipelineConfig c = base;
          apply_config(cell, c, false);
          c.validate();
          s.grid.push_back(c);
        }
      } else {
        throw ParameterError("unknown config key 'cv." + k + "'");
      }
    }
  }
  if (s.grid.empty()) s.grid.push_back(base);
  base.validate();
  return s;
}

std::string format_forest_json(const RandomForest& forest) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["type"] = "random_forest";
  const auto& p = forest.params();
  j["params"] = {{"n_trees", p.n_trees}, {"mtry", p.mtry}, {"min_node_size", p.min_node_size}, {"seed", p.seed}};
  j["mtry"] = forest.effective_mtry();
  j["n_features"] = forest.n_features();
  j["n_classes"] = forest.n_classes();
  json trees = json::array();
  for (const auto& tree : forest.trees()) {
    json nodes = json::array();
    for (const auto& n : tree) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.label}));
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

RandomForest parse_forest_json(const std::string& json_text) {
  const json j = parse_json(json_text, "forest");
  try {
    if (j.at("type").get<std::string>() != "random_forest") throw FormatError("unsupported classifier type");
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw FormatError("unsupported forest schema_version");
    ForestParams p;
    const auto& jp = j.at("params");
    p.n_trees = jp.at("n_trees").get<int>();
    p.mtry = jp.at("mtry").get<int>();
    p.min_node_size = jp.at("min_node_size").get<int>();
    p.seed = jp.at("seed").get<std::uint64_t>();
    std::vector<RandomForest::Tree> trees;
    for (const auto& jt : j.at("trees")) {
      RandomForest::Tree tree;
      for (const auto& jn : jt)
        tree.push_back({jn.at(0).get<int>(), jn.at(1).get<double>(), jn.at(2).get<int>(), jn.at(3).get<int>(),
                        jn.at(4).get<int>()});
      trees.push_back(std::move(tree));
    }
    return RandomForest::from_parts(p, j.at("mtry").get<int>(), j.at("n_features").get<Eigen::Index>(),
                                    j.at("n_classes").get<int>(), std::move(trees));
  } catch (const json::exception& e) {
    throw FormatError(std::string("forest JSON: ") + e.what());
  }
}

std::vector<std::string> pc_feature_names(PcaVariant variant, Eigen::Index count) {
  const std::string prefix = variant == PcaVariant::vertical ? "vfPC" : variant == PcaVariant::horizontal ? "hfPC" : "jfPC";
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

namespace {

json pfi_json(const PfiReport& r, const std::vector<std::string>& names) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["baseline_metric"] = r.baseline_metric;
  j["metric"] = to_string(r.metric);
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  json features = json::array();
  for (std::size_t f = 0; f < r.per_feature.size(); ++f) {
    const auto& fi = r.per_feature[f];
    features.push_back({{"feature", f < names.size() ? names[f] : std::to_string(f + 1)},
                        {"mean", fi.mean},
                        {"sd", fi.sd},
                        {"replicates", fi.replicates}});
  }
  j["features"] = std::move(features);
  return j;
}

PfiReport json_pfi(const json& j) {
  PfiReport r;
  r.baseline_metric = j.at("baseline_metric").get<double>();
  r.metric = parse_metric(j.at("metric").get<std::string>());
  r.replicates = j.at("replicates").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& f : j.at("features"))
    r.per_feature.push_back({f.at("replicates").get<std::vector<double>>(), f.at("mean").get<double>(), f.at("sd").get<double>()});
  return r;
}

}  // namespace

std::string format_pfi_json(const PfiReport& report, const std::vector<std::string>& names) {
  return dump(pfi_json(report, names));
}

std::string format_pfi_csv(const PfiReport& report, const std::vector<std::string>& names) {
  std::string out = "feature,replicate,importance\n";
  for (std::size_t f = 0; f < report.per_feature.size(); ++f) {
    const std::string name = f < names.size() ? names[f] : std::to_string(f + 1);
    const auto& reps = report.per_feature[f].replicates;
    for (std::size_t r = 0; r < reps.size(); ++r)
      out += name + "," + std::to_string(r + 1) + "," + format_double(reps[r]) + "\n";
  }
  return out;
}

std::string format_test_report_json(const TestReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["classes"] = report.classes;
  j["metric"] = to_string(report.metric);
  j["n_rows"] = report.features.rows();
  j["n_features"] = report.features.cols();
  j["metric_value"] = report.metric_value ? json(*report.metric_value) : json(nullptr);
  j["accuracy"] = report.accuracy ? json(*report.accuracy) : json(nullptr);
  json preds = json::array();
  for (Eigen::Index i = 0; i < report.probabilities.rows(); ++i) {
    preds.push_back({{"row", i},
                     {"predicted", report.classes.at(static_cast<std::size_t>(report.predictions[static_cast<std::size_t>(i)]))},
                     {"probabilities", vec_json(report.probabilities.row(i).transpose())}});
  }
  j["predictions"] = std::move(preds);
  if (report.pfi) {
    json p = pfi_json(*report.pfi, {});
    p.erase("schema_version");
    j["pfi"] = std::move(p);
  }
  return dump(j);
}

std::string format_directions_csv(const Grid& grid, const std::vector<DirectionCurve>& curves) {
  std::string out = "t,tau,sign,value\n";
  for (const auto& c : curves)
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      out += format_double(grid.points()[i]) + "," + std::to_string(c.tau) + "," + std::to_string(c.sign) + "," +
             format_double(c.curve.values[i]) + "\n";
  return out;
}

std::string format_cv_csv(const std::vector<CvCell>& cells) {
  std::string out = "cell,variant,smoothing_runs,n_pcs_used,n_trees,accuracy\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i].config;
    out += std::to_string(i + 1) + "," + to_string(c.variant) + "," + std::to_string(c.smoothing_runs) + "," +
           (c.n_pcs_used ? std::to_string(*c.n_pcs_used) : std::string("all")) + "," + std::to_string(c.forest.n_trees) +
           "," + format_double(cells[i].accuracy) + "\n";
  }
  return out;
}

namespace {

Matrix stack_rows(const std::vector<Vector>& rows, Eigen::Index width) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

std::vector<std::string> grid_header(const Grid& grid) {
  std::vector<std::string> h;
  for (Eigen::Index i = 0; i < grid.size(); ++i) h.push_back(format_double(grid.points()[i]));
  return h;
}

Matrix read_matrix_csv(const fs::path& path, Eigen::Index expected_cols) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Vector> rows;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = split_csv_line(trim(line));
    if (static_cast<Eigen::Index>(cells.size()) != expected_cols)
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + " has the wrong width");
    Vector v(expected_cols);
    for (std::size_t c = 0; c < cells.size(); ++c) v[static_cast<Eigen::Index>(c)] = parse_number(cells[c], line_no);
    rows.push_back(std::move(v));
  }
  return stack_rows(rows, expected_cols);
}

}  // namespace

void save_pipeline(const TrainedPipeline& tp, const fs::path& dir) {
  if (!tp.classifier) throw PreconditionError("pipeline has no classifier to save");
  const auto* forest = dynamic_cast<const RandomForest*>(tp.classifier.get());
  if (!forest) throw PreconditionError("only random forest classifiers can be saved");
  fs::create_directories(dir);

  const auto& a = tp.alignment;
  const auto& pca = tp.pca;
  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["classes"] = tp.classes;
  meta["n_pcs_used"] = tp.n_pcs();
  meta["metric"] = to_string(tp.config.metric);
  meta["train_metric"] = tp.train_metric;
  meta["n_train"] = a.aligned.size();
  meta["alignment"] = {{"iterations", a.iterations}, {"converged", a.converged}, {"objective", a.objective}, {"final_objective", a.final_objective}};
  write_text(dir / "metadata.json", dump(meta));
  write_text(dir / "config.json", format_config(tp.config));

  json jp;
  jp["schema_version"] = kSchemaVersion;
  jp["variant"] = to_string(pca.variant);
  jp["grid"] = vec_json(pca.grid.points());
  jp["mean_z"] = vec_json(pca.mean_z);
  jp["basis_columns"] = mat_json(pca.basis.transpose());
  jp["singular_values"] = vec_json(pca.singular_values);
  jp["proportion_variance"] = vec_json(pca.proportion_variance);
  jp["c_constant"] = pca.c_constant;
  jp["degenerate"] = pca.degenerate;
  jp["mean_srvf"] = vec_json(pca.mean_srvf.values);
  jp["mean_srvf_initial_value"] = pca.mean_srvf.initial_value;
  jp["mean_f"] = vec_json(pca.mean_f.values);
  jp["mean_psi"] = vec_json(pca.mean_psi);
  jp["mean_initial_value"] = pca.mean_initial_value;
  write_text(dir / "pca.json", dump(jp));

  write_text(dir / "forest.json", format_forest_json(*forest));
  write_text(dir / "train_scores.csv", csv_matrix(pc_feature_names(pca.variant, tp.n_pcs()), tp.train_scores));

  const Eigen::Index m = a.grid.size();
  std::vector<Vector> warps, aligned, aligned_q;
  std::vector<double> q0;
  for (std::size_t i = 0; i < a.warps.size(); ++i) {
    warps.push_back(a.warps[i].values());
    aligned.push_back(a.aligned[i].values);
    aligned_q.push_back(a.aligned_srvf[i].values);
  }
  write_text(dir / "warps.csv", csv_matrix(grid_header(a.grid), stack_rows(warps, m)));
  write_text(dir / "aligned.csv", csv_matrix(grid_header(a.grid), stack_rows(aligned, m)));
  write_text(dir / "aligned_srvf.csv", csv_matrix(grid_header(a.grid), stack_rows(aligned_q, m)));
  json jm;
  jm["schema_version"] = kSchemaVersion;
  jm["t"] = vec_json(a.grid.points());
  jm["karcher_mean_f"] = vec_json(a.karcher_mean_f.values);
  jm["karcher_mean_srvf"] = vec_json(a.karcher_mean_srvf.values);
  write_text(dir / "karcher_mean.json", dump(jm));

  if (tp.train_pfi) {
    const auto names = pc_feature_names(pca.variant, tp.n_pcs());
    write_text(dir / "train_pfi.json", format_pfi_json(*tp.train_pfi, names));
    write_text(dir / "train_pfi.csv", format_pfi_csv(*tp.train_pfi, names));
  }
}

TrainedPipeline load_pipeline(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("pipeline directory '" + dir.string() + "' does not exist");
  TrainedPipeline tp;
  try {
    tp.config = read_config(dir / "config.json");
    const json meta = parse_json(read_text(dir / "metadata.json"), "metadata.json");
    if (meta.at("schema_version").get<int>() != kSchemaVersion) throw FormatError("unsupported pipeline schema_version");
    tp.classes = meta.at("classes").get<std::vector<std::string>>();
    tp.train_metric = meta.at("train_metric").get<double>();
    const auto n_pcs = meta.at("n_pcs_used").get<Eigen::Index>();

    const json jp = parse_json(read_text(dir / "pca.json"), "pca.json");
    auto& pca = tp.pca;
    pca.variant = parse_variant(jp.at("variant").get<std::string>());
    pca.grid = Grid(json_vec(jp.at("grid")));
    pca.mean_z = json_vec(jp.at("mean_z"));
    pca.basis = json_mat(jp.at("basis_columns"), pca.mean_z.size()).transpose();
    pca.singular_values = json_vec(jp.at("singular_values"));
    pca.proportion_variance = json_vec(jp.at("proportion_variance"));
    pca.c_constant = jp.at("c_constant").get<double>();
    pca.degenerate = jp.at("degenerate").get<bool>();
    pca.mean_srvf = SrvfCurve{json_vec(jp.at("mean_srvf")), jp.at("mean_srvf_initial_value").get<double>()};
    pca.mean_f = FunctionalSample{json_vec(jp.at("mean_f"))};
    pca.mean_psi = json_vec(jp.at("mean_psi"));
    pca.mean_initial_value = jp.at("mean_initial_value").get<double>();
    if (pca.basis.rows() != pca.mean_z.size()) throw FormatError("pca.json: basis and mean_z disagree");

    auto forest = parse_forest_json(read_text(dir / "forest.json"));
    if (forest.n_features() != n_pcs) throw FormatError("forest width does not match n_pcs_used");
    tp.classifier = std::make_shared<RandomForest>(std::move(forest));
    tp.train_scores = read_matrix_csv(dir / "train_scores.csv", n_pcs);

    auto& a = tp.alignment;
    a.grid = pca.grid;
    const Eigen::Index m = a.grid.size();
    const json jm = parse_json(read_text(dir / "karcher_mean.json"), "karcher_mean.json");
    a.karcher_mean_f = FunctionalSample{json_vec(jm.at("karcher_mean_f"))};
    a.karcher_mean_srvf = pca.mean_srvf;
    a.iterations = meta.at("alignment").at("iterations").get<int>();
    a.converged = meta.at("alignment").at("converged").get<bool>();
    a.objective = meta.at("alignment").at("objective").get<std::vector<double>>();
    a.final_objective = meta.at("alignment").at("final_objective").get<double>();
    const Matrix warps = read_matrix_csv(dir / "warps.csv", m);
    const Matrix aligned = read_matrix_csv(dir / "aligned.csv", m);
    const Matrix aligned_q = read_matrix_csv(dir / "aligned_srvf.csv", m);
    for (Eigen::Index i = 0; i < warps.rows(); ++i) {
      a.warps.emplace_back(a.grid, warps.row(i).transpose());
      a.aligned.push_back({aligned.row(i).transpose()});
      a.aligned_srvf.push_back({aligned_q.row(i).transpose(), aligned(i, 0)});
    }
    if (fs::exists(dir / "train_pfi.json")) tp.train_pfi = json_pfi(parse_json(read_text(dir / "train_pfi.json"), "train_pfi.json"));
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + ": malformed pipeline artifact (" + e.what() + ")");
  }
  return tp;
}

}  // namespace veesa::io
