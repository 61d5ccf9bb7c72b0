#include "cxrils/json_io.hpp"

#include <fstream>

#include "cxrils/util.hpp"

namespace cxrils {

namespace {

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw DataError(std::string("missing field ") + name);
  return j.at(name).get<T>();
}

std::optional<std::string> optional_string(const json& j, const char* name) {
  if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
  return j.at(name).get<std::string>();
}

}  // namespace

void to_json(json& j, const LabelSet& s) {
  j = json::array();
  for (auto l : s.labels()) j.push_back(std::string(to_string(l)));
}

void from_json(const json& j, LabelSet& s) {
  if (!j.is_array()) throw DataError("label set must be an array");
  s = LabelSet{};
  for (const auto& item : j) s.insert(parse_label(item.get<std::string>()));
}

void to_json(json& j, const StructuredFinding& f) {
  j = json{{"entity", f.entity},
           {"sentence_index", f.sentence_index},
           {"presence", to_string(f.presence)},
           {"certainty", to_string(f.certainty)},
           {"reported_locations", f.reported_locations},
           {"predicted_lesion", nullptr}};
  if (f.predicted_lesion) j["predicted_lesion"] = to_string(*f.predicted_lesion);
}

void from_json(const json& j, StructuredFinding& f) {
  f.entity = field<std::string>(j, "entity");
  f.sentence_index = field<int>(j, "sentence_index");
  f.presence = parse_presence(field<std::string>(j, "presence"));
  f.certainty = parse_certainty(field<std::string>(j, "certainty"));
  f.reported_locations = field<LabelSet>(j, "reported_locations");
  f.predicted_lesion.reset();
  if (auto p = optional_string(j, "predicted_lesion")) f.predicted_lesion = parse_lesion(*p);
}

void to_json(json& j, const DetectionBox& b) {
  j = json{{"label", b.label},
           {"confidence", b.confidence},
           {"bbox", {b.x_min, b.y_min, b.x_max, b.y_max}}};
}

void from_json(const json& j, DetectionBox& b) {
  b.label = field<std::string>(j, "label");
  b.confidence = field<double>(j, "confidence");
  auto bbox = field<std::vector<int>>(j, "bbox");
  if (bbox.size() != 4) throw DataError("bbox must have 4 coordinates");
  b.x_min = bbox[0];
  b.y_min = bbox[1];
  b.x_max = bbox[2];
  b.y_max = bbox[3];
}

void to_json(json& j, const ThresholdSet& t) {
  j = json{{"tau_ano", t.tau_ano},
           {"tau_anatomy", t.tau_anatomy},
           {"tau_conf", t.tau_conf},
           {"tau_signal", t.tau_signal},
           {"tau_size", t.tau_size}};
}

void from_json(const json& j, ThresholdSet& t) {
  t.tau_ano = field<double>(j, "tau_ano");
  t.tau_anatomy = field<double>(j, "tau_anatomy");
  t.tau_conf = field<double>(j, "tau_conf");
  t.tau_signal = field<double>(j, "tau_signal");
  t.tau_size = field<double>(j, "tau_size");
}

void to_json(json& j, const InstructionAnswerPair& p) {
  j = json{{"pair_id", p.pair_id},
           {"study_id", p.study_id},
           {"split", to_string(p.split)},
           {"lesion", to_string(p.lesion)},
           {"target", to_string(p.target)},
           {"template_type", to_string(p.template_type)},
           {"polarity", to_string(p.polarity)},
           {"certainty", nullptr},
           {"instruction", p.instruction},
           {"answer_text", p.answer_text},
           {"mask_ref", nullptr},
           {"locations", p.locations}};
  if (p.certainty) j["certainty"] = to_string(*p.certainty);
  if (p.mask_ref) j["mask_ref"] = *p.mask_ref;
}

void from_json(const json& j, InstructionAnswerPair& p) {
  p.pair_id = field<std::string>(j, "pair_id");
  p.study_id = field<std::string>(j, "study_id");
  p.split = parse_split(field<std::string>(j, "split"));
  p.lesion = parse_lesion(field<std::string>(j, "lesion"));
  p.target = j.contains("target") ? parse_lesion(j.at("target").get<std::string>()) : p.lesion;
  p.template_type = parse_template_type(field<std::string>(j, "template_type"));
  p.polarity = parse_polarity(field<std::string>(j, "polarity"));
  p.certainty.reset();
  if (auto c = optional_string(j, "certainty")) p.certainty = parse_certainty(*c);
  p.instruction = field<std::string>(j, "instruction");
  p.answer_text = field<std::string>(j, "answer_text");
  p.mask_ref = optional_string(j, "mask_ref");
  p.locations = field<LabelSet>(j, "locations");
}

std::vector<StructuredFinding> parse_findings(const json& records) {
  if (!records.is_array()) throw DataError("findings file must hold a JSON array");
  static constexpr const char* kFields[] = {"entity",    "sentence_index",     "presence",
                                            "certainty", "reported_locations", "predicted_lesion"};
  std::vector<StructuredFinding> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    auto fail = [&](const std::string& name, const std::string& what) -> DataError {
      return DataError("record " + std::to_string(i) + " field " + name + ": " + what);
    };
    if (!rec.is_object()) throw fail("(record)", "not an object");
    StructuredFinding f;
    for (const char* name : kFields) {
      try {
        if (std::string_view(name) == "predicted_lesion") {
          if (auto p = optional_string(rec, name)) f.predicted_lesion = parse_lesion(*p);
        } else if (!rec.contains(name)) {
          throw DataError("missing");
        } else if (std::string_view(name) == "entity") {
          f.entity = rec.at(name).get<std::string>();
        } else if (std::string_view(name) == "sentence_index") {
          f.sentence_index = rec.at(name).get<int>();
        } else if (std::string_view(name) == "presence") {
          f.presence = parse_presence(rec.at(name).get<std::string>());
        } else if (std::string_view(name) == "certainty") {
          f.certainty = parse_certainty(rec.at(name).get<std::string>());
        } else {
          f.reported_locations = rec.at(name).get<LabelSet>();
        }
      } catch (const json::exception& e) {
        throw fail(name, e.what());
      } catch (const DataError& e) {
        throw fail(name, e.what());
      }
    }
    if (auto bad = f.violation()) {
      throw fail(*bad, "invariant violated");
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<DetectionBox> parse_detections(const json& records) {
  if (!records.is_array()) throw DataError("detections file must hold a JSON array");
  std::vector<DetectionBox> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out.push_back(records[i].get<DetectionBox>());
    } catch (const std::exception& e) {
      throw DataError("detection " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cxrils
