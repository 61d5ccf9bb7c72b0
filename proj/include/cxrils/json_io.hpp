#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "cxrils/core.hpp"

namespace cxrils {

using nlohmann::json;

void to_json(json& j, const LabelSet& s);
void from_json(const json& j, LabelSet& s);
void to_json(json& j, const StructuredFinding& f);
void from_json(const json& j, StructuredFinding& f);
void to_json(json& j, const DetectionBox& b);
void from_json(const json& j, DetectionBox& b);
void to_json(json& j, const ThresholdSet& t);
void from_json(const json& j, ThresholdSet& t);
void to_json(json& j, const InstructionAnswerPair& p);
void from_json(const json& j, InstructionAnswerPair& p);

/// Parses an array of finding records. Errors name the record index and field.
std::vector<StructuredFinding> parse_findings(const json& records);

/// Parses an array of {label, confidence, bbox:[x_min,y_min,x_max,y_max]}.
std::vector<DetectionBox> parse_detections(const json& records);

json read_json_file(const std::filesystem::path& path);
/// One object per non-blank line.
std::vector<json> read_jsonl_file(const std::filesystem::path& path);

}  // namespace cxrils
