#include "uca/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string_view>

#include "uca/raster_io.hpp"

namespace uca {

namespace {

template <typename E>
void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!j.is_object()) throw E(std::string(context) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw E(std::string(context) + ": unknown field '" + key + "'");
  }
}

template <typename T>
void read_optional(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string_view refinement_name(PeakRefinement r) {
  return r == PeakRefinement::GaussianFit ? "gaussian_fit" : "centroid_3x3";
}

PeakRefinement parse_refinement(const std::string& text) {
  if (text == "gaussian_fit") return PeakRefinement::GaussianFit;
  if (text == "centroid_3x3") return PeakRefinement::Centroid3x3;
  throw ConfigError("unknown peak refinement '" + text + "'");
}

}  // namespace

Json to_json(Point2 p) { return {{"x", p.x}, {"y", p.y}}; }

Json to_json(const Landmark& l) {
  return {{"x", l.position.x},
          {"y", l.position.y},
          {"side", to_string(l.side)},
          {"region", to_string(l.region)},
          {"confidence", l.confidence}};
}

Json to_json(const VertebraLine& line) {
  return {{"left", to_json(line.left.position)},
          {"right", to_json(line.right.position)},
          {"region", to_string(line.left.region)},
          {"confidence", line.confidence}};
}

Json to_json(const LineSegment& line) {
  return {{"left", to_json(line.left)},
          {"right", to_json(line.right)},
          {"region", to_string(line.region)},
          {"confidence", 1.0}};
}

Json to_json(const UcaResult& uca) {
  Json curves = Json::array();
  for (const Curve& c : uca.curves) {
    curves.push_back({{"upper", c.upper},
                      {"lower", c.lower},
                      {"angle_deg", c.angle_deg},
                      {"region_span", to_string(c.span)}});
  }
  return {{"slopes", uca.slopes}, {"curves", curves}};
}

Json to_json(const VertebraCluster& cluster) {
  int x0 = cluster.pixels.front().x, x1 = x0, y0 = cluster.pixels.front().y, y1 = y0;
  for (const Pixel& p : cluster.pixels) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {{"pixel_count", cluster.pixels.size()},
          {"c_left", to_json(cluster.c_left)},
          {"c_right", to_json(cluster.c_right)},
          {"bbox", {{"x0", x0}, {"y0", y0}, {"x1", x1}, {"y1", y1}}}};
}

Json to_json(const CostMatrix& matrix) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      // JSON has no infinity; excluded pairs are written as null.
      if (std::isfinite(matrix(i, j))) {
        row.push_back(matrix(i, j));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const LineEvalReport& r) {
  Json pairs = Json::array();
  for (std::size_t k = 0; k < r.matched_pairs.size(); ++k) {
    pairs.push_back({{"pred", r.matched_pairs[k].first}, {"gt", r.matched_pairs[k].second}, {"ede", r.per_line_ede[k]}});
  }
  return {{"average_precision", r.average_precision},
          {"average_recall", r.average_recall},
          {"mean_ede", r.mean_ede()},
          {"correct", r.correct},
          {"num_pred", r.num_pred},
          {"num_gt", r.num_gt},
          {"matched_pairs", pairs}};
}

Json to_json(const AgreementReport& r) {
  return {{"count", r.count},
          {"slope", r.slope},
          {"intercept", r.intercept},
          {"r_squared", r.r_squared},
          {"mean_diff", r.mean_diff},
          {"sd_diff", r.sd_diff},
          {"loa_low", r.loa_low},
          {"loa_high", r.loa_high},
          {"within_5deg_fraction", r.within_5deg_fraction}};
}

Json to_json(const PhantomSpec& spec) {
  Json curve = Json::array();
  for (const SineComponent& c : spec.curve) {
    curve.push_back({{"amplitude", c.amplitude}, {"wavelength", c.wavelength}, {"phase", c.phase}});
  }
  Json random = nullptr;
  if (spec.random_curve) {
    const CurveRandomization& r = *spec.random_curve;
    random = {{"min_components", r.min_components}, {"max_components", r.max_components},
              {"min_tilt_deg", r.min_tilt_deg},     {"max_tilt_deg", r.max_tilt_deg},
              {"min_wavelength", r.min_wavelength}, {"max_wavelength", r.max_wavelength}};
  }
  return {{"width", spec.width},
          {"height", spec.height},
          {"num_vertebrae", spec.num_vertebrae},
          {"curve", curve},
          {"random_curve", random},
          {"vertebra_half_width", spec.vertebra_half_width},
          {"thoracic_count", spec.thoracic_count},
          {"heatmap_sigma", spec.heatmap_sigma},
          {"noise_sigma", spec.noise_sigma},
          {"dropout_prob", spec.dropout_prob},
          {"seed", spec.seed}};
}

Json to_json(const PipelineConfig& c) {
  return {{"schema", kSchemaVersion},
          {"peak",
           {{"sigma", c.peak.sigma},
            {"threshold", c.peak.peak_threshold},
            {"nms_radius", c.peak.nms_radius},
            {"refinement", refinement_name(c.peak.refinement)}}},
          {"cluster", {{"gamma", c.cluster.gamma}, {"connectivity", c.cluster.connectivity}}},
          {"kernel_size", c.kernel_size},
          {"match",
           {{"num_samples", c.match.num_samples},
            {"drop_ratio", c.match.drop_ratio},
            {"max_pair_distance", c.match.max_pair_distance}}},
          {"angle_threshold_deg", c.angle_threshold_deg},
          {"ede",
           {{"s", c.ede.s},
            {"pixel_spacing", c.ede.pixel_spacing},
            {"correct_threshold_mm", c.ede.correct_threshold_mm}}}};
}

Point2 point_from_json(const Json& j) {
  try {
    return {j.at("x").get<double>(), j.at("y").get<double>()};
  } catch (const Json::exception& e) {
    throw InputError(std::string("point: ") + e.what());
  }
}

Landmark landmark_from_json(const Json& j) {
  try {
    Landmark l{point_from_json(j), parse_side(j.at("side").get<std::string>()),
               parse_region(j.at("region").get<std::string>()), j.at("confidence").get<double>()};
    if (!(l.confidence >= 0.0 && l.confidence <= 1.0)) throw InputError("landmark confidence outside [0,1]");
    return l;
  } catch (const Json::exception& e) {
    throw InputError(std::string("landmark: ") + e.what());
  }
}

VertebraLine vertebra_line_from_json(const Json& j) {
  try {
    const Region region = parse_region(j.at("region").get<std::string>());
    const double confidence = j.value("confidence", 1.0);
    VertebraLine line;
    line.left = {point_from_json(j.at("left")), Side::Left, region, std::clamp(confidence, 0.0, 1.0)};
    line.right = {point_from_json(j.at("right")), Side::Right, region, std::clamp(confidence, 0.0, 1.0)};
    line.confidence = confidence;
    line.slope_deg = line_slope(line.left.position, line.right.position);
    return line;
  } catch (const Json::exception& e) {
    throw InputError(std::string("line: ") + e.what());
  } catch (const InvariantError& e) {
    throw InputError(std::string("line: ") + e.what());
  }
}

LineSegment line_segment_from_json(const Json& j) {
  try {
    LineSegment seg{point_from_json(j.at("left")), point_from_json(j.at("right")),
                    parse_region(j.at("region").get<std::string>())};
    if (seg.left.x > seg.right.x) throw InputError("line segment has left.x > right.x");
    return seg;
  } catch (const Json::exception& e) {
    throw InputError(std::string("line: ") + e.what());
  }
}

UcaResult uca_from_json(const Json& j) {
  try {
    UcaResult uca;
    uca.slopes = j.at("slopes").get<std::vector<double>>();
    for (const Json& c : j.at("curves")) {
      uca.curves.push_back({c.at("upper").get<std::size_t>(), c.at("lower").get<std::size_t>(),
                            c.at("angle_deg").get<double>(),
                            parse_region_span(c.at("region_span").get<std::string>())});
    }
    return uca;
  } catch (const Json::exception& e) {
    throw InputError(std::string("uca: ") + e.what());
  }
}

PhantomSpec phantom_spec_from_json(const Json& j) {
  check_keys<ConfigError>(j,
                          {"schema", "width", "height", "num_vertebrae", "curve", "random_curve",
                           "vertebra_half_width", "thoracic_count", "heatmap_sigma", "noise_sigma",
                           "dropout_prob", "seed"},
                          "phantom spec");
  PhantomSpec spec;
  try {
    read_optional(j, "width", spec.width);
    read_optional(j, "height", spec.height);
    read_optional(j, "num_vertebrae", spec.num_vertebrae);
    if (j.contains("curve")) {
      spec.curve.clear();
      for (const Json& c : j.at("curve")) {
        check_keys<ConfigError>(c, {"amplitude", "wavelength", "phase"}, "curve component");
        SineComponent s;
        read_optional(c, "amplitude", s.amplitude);
        read_optional(c, "wavelength", s.wavelength);
        read_optional(c, "phase", s.phase);
        spec.curve.push_back(s);
      }
    }
    if (j.contains("random_curve") && !j.at("random_curve").is_null()) {
      const Json& r = j.at("random_curve");
      check_keys<ConfigError>(r,
                              {"min_components", "max_components", "min_tilt_deg", "max_tilt_deg",
                               "min_wavelength", "max_wavelength"},
                              "random_curve");
      CurveRandomization cr;
      read_optional(r, "min_components", cr.min_components);
      read_optional(r, "max_components", cr.max_components);
      read_optional(r, "min_tilt_deg", cr.min_tilt_deg);
      read_optional(r, "max_tilt_deg", cr.max_tilt_deg);
      read_optional(r, "min_wavelength", cr.min_wavelength);
      read_optional(r, "max_wavelength", cr.max_wavelength);
      spec.random_curve = cr;
    }
    read_optional(j, "vertebra_half_width", spec.vertebra_half_width);
    read_optional(j, "thoracic_count", spec.thoracic_count);
    read_optional(j, "heatmap_sigma", spec.heatmap_sigma);
    read_optional(j, "noise_sigma", spec.noise_sigma);
    read_optional(j, "dropout_prob", spec.dropout_prob);
    read_optional(j, "seed", spec.seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("phantom spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

PipelineConfig pipeline_config_from_json(const Json& j) {
  check_keys<ConfigError>(j, {"schema", "peak", "cluster", "kernel_size", "match", "angle_threshold_deg", "ede"},
                          "config");
  PipelineConfig c;
  try {
    if (j.contains("schema") && j.at("schema").get<int>() != kSchemaVersion) {
      throw ConfigError("config: unsupported schema version");
    }
    if (j.contains("peak")) {
      const Json& p = j.at("peak");
      check_keys<ConfigError>(p, {"sigma", "threshold", "nms_radius", "refinement"}, "config.peak");
      read_optional(p, "sigma", c.peak.sigma);
      read_optional(p, "threshold", c.peak.peak_threshold);
      read_optional(p, "nms_radius", c.peak.nms_radius);
      if (p.contains("refinement")) c.peak.refinement = parse_refinement(p.at("refinement").get<std::string>());
    }
    if (j.contains("cluster")) {
      const Json& p = j.at("cluster");
      check_keys<ConfigError>(p, {"gamma", "connectivity"}, "config.cluster");
      read_optional(p, "gamma", c.cluster.gamma);
      read_optional(p, "connectivity", c.cluster.connectivity);
    }
    read_optional(j, "kernel_size", c.kernel_size);
    if (j.contains("match")) {
      const Json& p = j.at("match");
      check_keys<ConfigError>(p, {"num_samples", "drop_ratio", "max_pair_distance"}, "config.match");
      read_optional(p, "num_samples", c.match.num_samples);
      read_optional(p, "drop_ratio", c.match.drop_ratio);
      read_optional(p, "max_pair_distance", c.match.max_pair_distance);
    }
    read_optional(j, "angle_threshold_deg", c.angle_threshold_deg);
    if (j.contains("ede")) {
      const Json& p = j.at("ede");
      check_keys<ConfigError>(p, {"s", "pixel_spacing", "correct_threshold_mm"}, "config.ede");
      read_optional(p, "s", c.ede.s);
      read_optional(p, "pixel_spacing", c.ede.pixel_spacing);
      read_optional(p, "correct_threshold_mm", c.ede.correct_threshold_mm);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Json load_json(const std::filesystem::path& path, DocumentKind kind) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InputError& e) {
    if (kind == DocumentKind::Config) throw ConfigError(e.what());
    throw;
  }
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    const std::string message = "'" + path.string() + "': " + e.what();
    if (kind == DocumentKind::Config) throw ConfigError(message);
    throw InputError(message);
  }
}

void save_json(const Json& doc, const std::filesystem::path& path) {
  write_file_atomically(path, doc.dump(2) + "\n");
}

}  // namespace uca
