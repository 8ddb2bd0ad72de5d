#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "uca/phantom.hpp"
#include "uca/pipeline.hpp"

namespace uca {

using Json = nlohmann::json;

/// Version stamped as "schema" on every document.
inline constexpr int kSchemaVersion = 1;

Json to_json(Point2 p);
Json to_json(const Landmark& landmark);
Json to_json(const VertebraLine& line);
Json to_json(const LineSegment& line);
Json to_json(const UcaResult& uca);
Json to_json(const VertebraCluster& cluster);
Json to_json(const CostMatrix& matrix);
Json to_json(const LineEvalReport& report);
Json to_json(const AgreementReport& report);
Json to_json(const PhantomSpec& spec);
Json to_json(const PipelineConfig& config);

/// Parsers throw InputError on schema violations (ConfigError for configs and specs).
Point2 point_from_json(const Json& j);
Landmark landmark_from_json(const Json& j);
VertebraLine vertebra_line_from_json(const Json& j);
LineSegment line_segment_from_json(const Json& j);
UcaResult uca_from_json(const Json& j);
PhantomSpec phantom_spec_from_json(const Json& j);
PipelineConfig pipeline_config_from_json(const Json& j);

/// Reads and parses a JSON file; `kind` selects the error class raised on failure.
enum class DocumentKind { Input, Config };
Json load_json(const std::filesystem::path& path, DocumentKind kind = DocumentKind::Input);
void save_json(const Json& doc, const std::filesystem::path& path);

}  // namespace uca
