#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uca/pipeline.hpp"

namespace uca::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 2, kConfigError = 3, kInternalError = 4 };

/// Command-line overrides; each one replaces a single config field.
struct ConfigOverrides {
  std::optional<double> sigma;
  std::optional<double> peak_threshold;
  std::optional<int> nms_radius;
  std::optional<int> gamma;
  std::optional<int> connectivity;
  std::optional<int> kernel_size;
  std::optional<int> num_samples;
  std::optional<double> drop_ratio;
  std::optional<double> max_pair_distance;
  std::optional<double> angle_threshold;
  std::optional<double> pixel_spacing;
  std::optional<double> ede_scale;

  void apply(PipelineConfig& config) const;
};

/// Defaults, then the config file (if any), then the overrides.
PipelineConfig load_config(const std::optional<std::filesystem::path>& path, const ConfigOverrides& overrides);

struct PhantomOptions {
  std::optional<std::filesystem::path> spec;
  std::filesystem::path out;
  int count = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct RunOptions {
  std::optional<std::filesystem::path> case_path;
  std::vector<std::filesystem::path> heatmaps;  ///< alternative to case_path: 4 rasters
  std::optional<std::filesystem::path> segmap;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> svg;
  std::optional<std::filesystem::path> diagnostics;
  ConfigOverrides overrides;
  int jobs = 1;
};

struct EvalOptions {
  std::filesystem::path pred;
  std::filesystem::path gt;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  ConfigOverrides overrides;
};

struct MaskOptions {
  std::filesystem::path lines;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
  ConfigOverrides overrides;
};

/// Writes `count` cases with seeds seed..seed+count-1 plus manifest.json.
void cmd_phantom(const PhantomOptions& options);

/// Runs the pipeline on one case directory, a dataset directory (one holding
/// manifest.json), or four heatmap rasters plus a segmentation map.
void cmd_run(const RunOptions& options);

/// Scores prediction documents against ground truth and writes a JSON report
/// plus a CSV with one row per case next to it.
void cmd_eval(const EvalOptions& options);

/// Builds a pseudo-mask from a lines document.
void cmd_mask(const MaskOptions& options);

/// Entry point; returns the process exit code.
int main(int argc, char** argv);

}  // namespace uca::cli
