#include "uca/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "uca/json_io.hpp"
#include "uca/phantom.hpp"
#include "uca/pseudomask.hpp"
#include "uca/raster_io.hpp"
#include "uca/svg.hpp"

namespace uca::cli {

namespace fs = std::filesystem;

void ConfigOverrides::apply(PipelineConfig& c) const {
  if (sigma) c.peak.sigma = *sigma;
  if (peak_threshold) c.peak.peak_threshold = *peak_threshold;
  if (nms_radius) c.peak.nms_radius = *nms_radius;
  if (gamma) c.cluster.gamma = *gamma;
  if (connectivity) c.cluster.connectivity = *connectivity;
  if (kernel_size) c.kernel_size = *kernel_size;
  if (num_samples) c.match.num_samples = *num_samples;
  if (drop_ratio) c.match.drop_ratio = *drop_ratio;
  if (max_pair_distance) c.match.max_pair_distance = *max_pair_distance;
  if (angle_threshold) c.angle_threshold_deg = *angle_threshold;
  if (pixel_spacing) c.ede.pixel_spacing = *pixel_spacing;
  if (ede_scale) c.ede.s = *ede_scale;
}

PipelineConfig load_config(const std::optional<fs::path>& path, const ConfigOverrides& overrides) {
  PipelineConfig config;
  if (path) config = pipeline_config_from_json(load_json(*path, DocumentKind::Config));
  overrides.apply(config);
  config.validate();
  return config;
}

namespace {

// Runs body(i) for i in [0, n) on up to `jobs` threads. If any call throws,
// the exception of the lowest failing index is rethrown.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory '" + dir.string() + "'");
}

std::string case_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%04zu", index);
  return buf;
}

Json lines_json(std::span<const VertebraLine> lines) {
  Json out = Json::array();
  for (const VertebraLine& l : lines) out.push_back(to_json(l));
  return out;
}

Json landmarks_json(std::span<const Landmark> landmarks) {
  Json out = Json::array();
  for (const Landmark& l : landmarks) out.push_back(to_json(l));
  return out;
}

void write_case(const PhantomCase& phantom, const std::string& id, const fs::path& dir) {
  ensure_directory(dir);
  save_heatmap_stack(phantom.heatmaps, dir);
  save_mask(phantom.segmap, dir / "segmap.png");
  Json lines = Json::array();
  for (const LineSegment& l : phantom.gt_lines) lines.push_back(to_json(l));
  Json doc = {{"schema", kSchemaVersion},
              {"case_id", id},
              {"width", phantom.spec.width},
              {"height", phantom.spec.height},
              {"pixel_spacing", phantom.pixel_spacing},
              {"spec", to_json(phantom.spec)},
              {"landmarks", landmarks_json(phantom.rendered_landmarks)},
              {"lines", lines},
              {"uca", to_json(phantom.gt_uca)}};
  save_json(doc, dir / "gt.json");
}

struct CaseInputs {
  HeatmapStack heatmaps;
  ScalarRaster segmap;
};

CaseInputs load_case_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("case directory '" + dir.string() + "' does not exist");
  const fs::path manifest = dir / "heatmaps.json";
  if (!fs::exists(manifest)) throw InputError("missing channel manifest '" + manifest.string() + "'");
  HeatmapStack heatmaps = load_heatmap_stack(manifest);
  fs::path segmap_path = dir / "segmap.png";
  if (!fs::exists(segmap_path)) segmap_path = dir / "segmap.pgm";
  if (!fs::exists(segmap_path)) throw InputError("missing segmentation map in '" + dir.string() + "'");
  return {std::move(heatmaps), load_scalar_raster(segmap_path)};
}

struct RunTargets {
  fs::path prediction;
  std::optional<fs::path> svg;
  std::optional<fs::path> diagnostics;
};

void write_diagnostics(const PipelineResult& result, const fs::path& dir) {
  ensure_directory(dir);
  Json clusters = Json::array();
  for (const VertebraCluster& c : result.clusters) clusters.push_back(to_json(c));
  save_json({{"schema", kSchemaVersion}, {"clusters", clusters}}, dir / "clusters.json");
  Json matches = Json::object();
  for (const RegionMatch& m : result.matches) {
    matches[std::string(to_string(m.region))] = {
        {"left", landmarks_json(m.left)}, {"right", landmarks_json(m.right)}, {"confidence", to_json(m.confidence)}};
  }
  save_json({{"schema", kSchemaVersion}, {"regions", matches}}, dir / "confidence.json");
  save_vector_raster(result.affinity, dir / "affinity.json");
}

void run_one(const CaseInputs& inputs, const std::string& id, const PipelineConfig& config, const RunTargets& targets) {
  const PipelineResult result = run_pipeline(inputs.heatmaps, inputs.segmap, config);
  Json doc = {{"schema", kSchemaVersion},
              {"case_id", id},
              {"width", inputs.segmap.width()},
              {"height", inputs.segmap.height()},
              {"landmarks", landmarks_json(result.landmarks)},
              {"lines", lines_json(result.lines)},
              {"uca", to_json(result.uca)}};
  save_json(doc, targets.prediction);
  if (targets.svg) {
    write_file_atomically(*targets.svg, render_overlay_svg(inputs.segmap.width(), inputs.segmap.height(),
                                                           result.landmarks, result.lines, result.uca));
  }
  if (targets.diagnostics) write_diagnostics(result, *targets.diagnostics);
}

struct DatasetEntry {
  std::string id;
  fs::path dir;
};

std::vector<DatasetEntry> read_manifest(const fs::path& root) {
  const Json doc = load_json(root / "manifest.json");
  std::vector<DatasetEntry> entries;
  try {
    for (const Json& c : doc.at("cases")) {
      entries.push_back({c.at("id").get<std::string>(), root / c.at("dir").get<std::string>()});
    }
  } catch (const Json::exception& e) {
    throw InputError("'" + (root / "manifest.json").string() + "': " + e.what());
  }
  return entries;
}

// Identifier -> document path for every *.json in a directory.
std::map<std::string, fs::path> json_documents(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("'" + dir.string() + "' is not a directory");
  std::map<std::string, fs::path> docs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json" && entry.path().filename() != "manifest.json") {
      docs[entry.path().stem().string()] = entry.path();
    }
  }
  return docs;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

UcaResult uca_of(const Json& doc, std::span<const VertebraLine> lines, double threshold) {
  if (doc.contains("uca")) return uca_from_json(doc.at("uca"));
  return compute_uca(lines, threshold);
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void cmd_phantom(const PhantomOptions& options) {
  PhantomSpec spec;
  if (options.spec) {
    spec = phantom_spec_from_json(load_json(*options.spec, DocumentKind::Config));
  } else {
    spec.random_curve = CurveRandomization{};
  }
  if (options.count < 1) throw ConfigError("--count must be at least 1");
  ensure_directory(options.out);

  const std::size_t n = static_cast<std::size_t>(options.count);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    PhantomSpec s = spec;
    s.seed = options.seed + i;
    write_case(generate_phantom(s), case_id(i), options.out / case_id(i));
  });

  Json cases = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    cases.push_back({{"id", case_id(i)}, {"dir", case_id(i)}, {"seed", options.seed + i}});
  }
  save_json({{"schema", kSchemaVersion}, {"kind", "phantom_dataset"}, {"spec", to_json(spec)}, {"cases", cases}},
            options.out / "manifest.json");
}

void cmd_run(const RunOptions& options) {
  const PipelineConfig config = load_config(options.config, options.overrides);

  if (!options.heatmaps.empty() || options.segmap) {
    if (options.heatmaps.size() != 4) {
      throw InputError("--heatmaps needs exactly 4 rasters (thoracic-left, thoracic-right, lumbar-left, lumbar-right)");
    }
    if (!options.segmap) throw InputError("--segmap is required with --heatmaps");
    if (!options.out) throw InputError("--out is required with --heatmaps");
    HeatmapStack stack{{load_scalar_raster(options.heatmaps[0]), load_scalar_raster(options.heatmaps[1]),
                        load_scalar_raster(options.heatmaps[2]), load_scalar_raster(options.heatmaps[3])}};
    stack.validate();
    const CaseInputs inputs{std::move(stack), load_scalar_raster(*options.segmap)};
    run_one(inputs, options.out->stem().string(), config, {*options.out, options.svg, options.diagnostics});
    return;
  }

  if (!options.case_path) throw InputError("either --case or --heatmaps/--segmap is required");
  const fs::path root = *options.case_path;
  if (fs::exists(root / "manifest.json")) {
    const std::vector<DatasetEntry> entries = read_manifest(root);
    const fs::path out_dir = options.out.value_or(root / "predictions");
    ensure_directory(out_dir);
    if (options.svg) ensure_directory(*options.svg);
    parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
      const DatasetEntry& e = entries[i];
      RunTargets targets{out_dir / (e.id + ".json"), std::nullopt, std::nullopt};
      if (options.svg) targets.svg = *options.svg / (e.id + ".svg");
      if (options.diagnostics) targets.diagnostics = *options.diagnostics / e.id;
      run_one(load_case_directory(e.dir), e.id, config, targets);
    });
    return;
  }

  const CaseInputs inputs = load_case_directory(root);
  const std::string id = fs::absolute(root).lexically_normal().parent_path().filename() == ""
                             ? root.filename().string()
                             : fs::absolute(root).lexically_normal().filename().string();
  run_one(inputs, id, config, {options.out.value_or(root / "prediction.json"), options.svg, options.diagnostics});
}

void cmd_eval(const EvalOptions& options) {
  const PipelineConfig config = load_config(options.config, options.overrides);

  std::map<std::string, fs::path> gt_docs;
  if (fs::exists(options.gt / "manifest.json")) {
    for (const DatasetEntry& e : read_manifest(options.gt)) gt_docs[e.id] = e.dir / "gt.json";
  } else {
    gt_docs = json_documents(options.gt);
  }
  const std::map<std::string, fs::path> pred_docs = json_documents(options.pred);

  std::vector<std::string> missing, extra;
  for (const auto& [id, path] : gt_docs) {
    if (!pred_docs.count(id)) missing.push_back(id);
  }
  for (const auto& [id, path] : pred_docs) {
    if (!gt_docs.count(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string message = "case identifiers differ between predictions and ground truth";
    if (!missing.empty()) {
      message += "; missing predictions:";
      for (const auto& id : missing) message += " " + id;
    }
    if (!extra.empty()) {
      message += "; no ground truth for:";
      for (const auto& id : extra) message += " " + id;
    }
    throw InputError(message);
  }
  if (gt_docs.empty()) throw InputError("no cases to evaluate");

  Json cases = Json::array();
  std::vector<double> aps, ars, edes, pred_angles, ref_angles;
  std::string csv = "case_id,average_precision,average_recall,mean_ede,correct,num_pred,num_gt,pred_uca_deg,gt_uca_deg\n";
  for (const auto& [id, gt_path] : gt_docs) {
    const Json gt_doc = load_json(gt_path);
    const Json pred_doc = load_json(pred_docs.at(id));
    std::vector<LineSegment> gt_lines;
    std::vector<VertebraLine> pred_lines;
    try {
      for (const Json& l : gt_doc.at("lines")) gt_lines.push_back(line_segment_from_json(l));
      for (const Json& l : pred_doc.at("lines")) pred_lines.push_back(vertebra_line_from_json(l));
    } catch (const Json::exception& e) {
      throw InputError("case " + id + ": " + e.what());
    }
    EdeParams ede = config.ede;
    if (gt_doc.contains("pixel_spacing")) ede.pixel_spacing = gt_doc.at("pixel_spacing").get<double>();
    const LineEvalReport report = evaluate_lines(pred_lines, gt_lines, ede);

    const std::vector<VertebraLine> gt_as_lines = as_vertebra_lines(gt_lines);
    const UcaResult pred_uca = uca_of(pred_doc, pred_lines, config.angle_threshold_deg);
    const UcaResult gt_uca = uca_of(gt_doc, gt_as_lines, config.angle_threshold_deg);
    const bool both_curved = !pred_uca.curves.empty() && !gt_uca.curves.empty();
    if (both_curved) {
      pred_angles.push_back(pred_uca.max_angle());
      ref_angles.push_back(gt_uca.max_angle());
    }

    aps.push_back(report.average_precision);
    ars.push_back(report.average_recall);
    edes.push_back(report.mean_ede());
    Json entry = to_json(report);
    entry["case_id"] = id;
    entry["pred_uca_deg"] = pred_uca.curves.empty() ? Json(nullptr) : Json(pred_uca.max_angle());
    entry["gt_uca_deg"] = gt_uca.curves.empty() ? Json(nullptr) : Json(gt_uca.max_angle());
    cases.push_back(entry);

    csv += id + "," + csv_number(report.average_precision) + "," + csv_number(report.average_recall) + "," +
           csv_number(report.mean_ede()) + "," + std::to_string(report.correct) + "," +
           std::to_string(report.num_pred) + "," + std::to_string(report.num_gt) + "," +
           (pred_uca.curves.empty() ? "" : csv_number(pred_uca.max_angle())) + "," +
           (gt_uca.curves.empty() ? "" : csv_number(gt_uca.max_angle())) + "\n";
  }

  Json agreement = nullptr;
  std::string agreement_note;
  if (pred_angles.size() >= 2) {
    try {
      agreement = to_json(angle_agreement(pred_angles, ref_angles));
    } catch (const InvariantError& e) {
      agreement_note = e.what();
    }
  } else {
    agreement_note = "fewer than two cases with curves on both sides";
  }

  Json summary = {{"num_cases", gt_docs.size()},
                  {"ap_mean", mean(aps)},
                  {"ap_sd", sample_sd(aps)},
                  {"ar_mean", mean(ars)},
                  {"ar_sd", sample_sd(ars)},
                  {"ede_mean", mean(edes)},
                  {"ede_sd", sample_sd(edes)},
                  {"curve_pairs", pred_angles.size()}};
  Json doc = {{"schema", kSchemaVersion}, {"summary", summary}, {"agreement", agreement}, {"cases", cases}};
  if (!agreement_note.empty()) doc["agreement_note"] = agreement_note;

  if (options.out.has_parent_path()) ensure_directory(options.out.parent_path());
  save_json(doc, options.out);
  fs::path csv_path = options.out;
  csv_path.replace_extension(".csv");
  write_file_atomically(csv_path, csv);
}

void cmd_mask(const MaskOptions& options) {
  const PipelineConfig config = load_config(options.config, options.overrides);
  const Json doc = load_json(options.lines);
  std::vector<LineSegment> lines;
  int width = 0, height = 0;
  try {
    width = doc.at("width").get<int>();
    height = doc.at("height").get<int>();
    for (const Json& l : doc.at("lines")) lines.push_back(line_segment_from_json(l));
  } catch (const Json::exception& e) {
    throw InputError("'" + options.lines.string() + "': " + e.what());
  }
  if (width < 1 || height < 1) throw InputError("lines document has invalid width/height");
  for (const LineSegment& l : lines) {
    for (Point2 p : {l.left, l.right}) {
      if (p.x < -0.5 || p.y < -0.5 || p.x >= width - 0.5 || p.y >= height - 0.5) {
        throw InputError("line endpoint outside the raster");
      }
    }
  }
  save_mask(build_pseudo_mask(lines, DilationKernel(config.kernel_size), width, height), options.out);
}

namespace {

void add_overrides(CLI::App& app, ConfigOverrides& o) {
  app.add_option("--sigma", o.sigma, "Gaussian sigma of the heatmaps (px)");
  app.add_option("--peak-threshold", o.peak_threshold, "Minimum heatmap value for a peak");
  app.add_option("--nms-radius", o.nms_radius, "Non-maximum suppression radius (px)");
  app.add_option("--gamma", o.gamma, "Minimum cluster size (px)");
  app.add_option("--connectivity", o.connectivity, "Pixel connectivity for clustering (4 or 8)");
  app.add_option("--kernel-size", o.kernel_size, "Pseudo-mask dilation kernel size");
  app.add_option("--num-samples", o.num_samples, "Line-integral sample count");
  app.add_option("--drop-ratio", o.drop_ratio, "Drop matches below this fraction of the mean confidence");
  app.add_option("--max-pair-distance", o.max_pair_distance, "Maximum left/right landmark distance (px)");
  app.add_option("--angle-threshold", o.angle_threshold, "Minimum reported curve angle (deg)");
  app.add_option("--pixel-spacing", o.pixel_spacing, "Pixel spacing (mm/px)");
  app.add_option("--ede-scale", o.ede_scale, "EDE scale factor s (px)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultrasound curve angle measurement from landmark heatmaps and vertebra segmentation"};
  app.require_subcommand(1);

  PhantomOptions phantom;
  auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic dataset with exact ground truth");
  phantom_cmd->add_option("--spec", phantom.spec, "Phantom spec JSON (default: randomised curves)");
  phantom_cmd->add_option("--out", phantom.out, "Output directory")->required();
  phantom_cmd->add_option("--count", phantom.count, "Number of cases");
  phantom_cmd->add_option("--seed", phantom.seed, "Seed of the first case");
  phantom_cmd->add_option("--jobs", phantom.jobs, "Worker threads");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Detect vertebra lines and curve angles");
  run_cmd->add_option("--case", run.case_path, "Case directory or dataset directory");
  run_cmd->add_option("--heatmaps", run.heatmaps, "Four heatmap rasters: TL TR LL LR")->expected(4);
  run_cmd->add_option("--segmap", run.segmap, "Segmentation map raster");
  run_cmd->add_option("--config", run.config, "Pipeline config JSON");
  run_cmd->add_option("--out", run.out, "Prediction JSON (directory for datasets)");
  run_cmd->add_option("--svg", run.svg, "SVG overlay (directory for datasets)");
  run_cmd->add_option("--diagnostics", run.diagnostics, "Directory for clusters, confidences and affinity map");
  run_cmd->add_option("--jobs", run.jobs, "Worker threads");
  add_overrides(*run_cmd, run.overrides);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--pred", eval.pred, "Directory of prediction JSON files")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth dataset directory")->required();
  eval_cmd->add_option("--config", eval.config, "Pipeline config JSON");
  eval_cmd->add_option("--out", eval.out, "Report JSON (CSV written alongside)")->required();
  add_overrides(*eval_cmd, eval.overrides);

  MaskOptions mask;
  auto* mask_cmd = app.add_subcommand("mask", "Build a pseudo-mask from a lines document");
  mask_cmd->add_option("--lines", mask.lines, "JSON document with width, height and lines")->required();
  mask_cmd->add_option("--out", mask.out, "Output mask (.png or .pgm)")->required();
  mask_cmd->add_option("--config", mask.config, "Pipeline config JSON");
  add_overrides(*mask_cmd, mask.overrides);

  std::optional<fs::path> config_out;
  auto* config_cmd = app.add_subcommand("config", "Print or write the default pipeline config");
  config_cmd->add_option("--out", config_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*phantom_cmd) cmd_phantom(phantom);
    if (*run_cmd) cmd_run(run);
    if (*eval_cmd) cmd_eval(eval);
    if (*mask_cmd) cmd_mask(mask);
    if (*config_cmd) {
      const std::string text = to_json(PipelineConfig{}).dump(2) + "\n";
      if (config_out) {
        write_file_atomically(*config_out, text);
      } else {
        std::cout << text;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kSuccess;
}

}  // namespace uca::cli
