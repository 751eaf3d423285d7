#pragma once

#include "veesa/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace veesa::io {

inline constexpr int kSchemaVersion = 1;

/// 17 significant digits.
std::string format_double(double x);

/// Dataset CSV: the first row holds the grid abscissae (optionally followed
/// by the literal `label`); every further row is one function's values
/// (followed by its label when the header has one).
FunctionalDataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const std::filesystem::path& path, const FunctionalDataset& data);
FunctionalDataset parse_dataset_csv(const std::string& text);
std::string format_dataset_csv(const FunctionalDataset& data);

/// Reads a PipelineConfig. Missing keys keep their defaults; unknown keys
/// are rejected.
PipelineConfig read_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& json_text);
std::string format_config(const PipelineConfig& config);

struct CvSettings {
  int folds = 3;
  int repeats = 1;
  std::vector<PipelineConfig> grid;
};

/// The optional "cv" block of a config: folds, repeats and a list of
/// overrides applied on top of the base config (one grid cell each).
CvSettings parse_cv_settings(const std::string& json_text);

void save_pipeline(const TrainedPipeline& tp, const std::filesystem::path& dir);
TrainedPipeline load_pipeline(const std::filesystem::path& dir);

/// "jfPC1", "jfPC2", ... for the variant (vfPC / hfPC / jfPC).
std::vector<std::string> pc_feature_names(PcaVariant variant, Eigen::Index count);

std::string format_pfi_json(const PfiReport& report, const std::vector<std::string>& names);
/// Tidy (feature, replicate, importance) rows for boxplots.
std::string format_pfi_csv(const PfiReport& report, const std::vector<std::string>& names);
std::string format_test_report_json(const TestReport& report);
/// Columns t, tau, sign, value with t in original units.
std::string format_directions_csv(const Grid& grid, const std::vector<DirectionCurve>& curves);
std::string format_cv_csv(const std::vector<CvCell>& cells);

std::string format_forest_json(const RandomForest& forest);
RandomForest parse_forest_json(const std::string& json_text);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace veesa::io
