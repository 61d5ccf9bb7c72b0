#include "cxrils/study.hpp"

#include "cxrils/png_io.hpp"
#include "cxrils/util.hpp"

namespace cxrils {

namespace fs = std::filesystem;

namespace {

std::string required_string(const json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_string()) {
    throw DataError(std::string("manifest record missing field ") + name);
  }
  return j.at(name).get<std::string>();
}

fs::path resolve(const fs::path& root, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : root / path;
}

std::string relative_to(const fs::path& p, const fs::path& root) {
  if (root.empty()) return p.string();
  auto rel = p.lexically_relative(root);
  if (rel.empty() || *rel.begin() == "..") return p.string();
  return rel.string();
}

std::string dims(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

template <typename T, typename Fn>
std::optional<T> attempt(std::vector<std::string>& violations, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    violations.emplace_back(e.what());
    return std::nullopt;
  }
}

std::optional<StudyData> load_collecting(const StudyRecord& rec,
                                         std::vector<std::string>& violations) {
  StudyData data;
  data.record = rec;
  bool ok = true;

  auto image = attempt<ImageGray>(violations, [&] { return read_png_gray(rec.image); });
  auto edited = attempt<ImageGray>(violations, [&] { return read_png_gray(rec.edited_image); });
  auto report = attempt<std::string>(violations, [&] { return read_text_file(rec.report); });
  if (!image || !edited || !report) ok = false;
  if (!image) return std::nullopt;
  const int w = image->width();
  const int h = image->height();
  if (edited && (edited->width() != w || edited->height() != h)) {
    violations.push_back("dimension mismatch: edited image " + dims(edited->width(), edited->height()) +
                         " vs image " + dims(w, h));
    ok = false;
  }

  auto load_mask = [&](const fs::path& path) -> std::optional<RasterMask> {
    auto m = attempt<RasterMask>(violations, [&] { return read_png_mask(path); });
    if (!m) return std::nullopt;
    if (m->width() != w || m->height() != h) {
      violations.push_back("dimension mismatch: mask " + path.string() + " " +
                           dims(m->width(), m->height()) + " vs image " + dims(w, h));
      return std::nullopt;
    }
    return m;
  };

  for (auto label : kAllLabels) {
    auto m = load_mask(rec.anatomy_mask_dir / anatomy_mask_filename(label));
    if (m) {
      data.anatomy[static_cast<std::size_t>(label)] = std::move(*m);
    } else {
      ok = false;
    }
  }
  if (auto m = load_mask(rec.anatomy_mask_dir / kAnatomyHeartFile)) {
    data.anatomy_heart = std::move(*m);
  } else {
    ok = false;
  }

  const std::pair<const fs::path*, RasterMask*> organs[] = {
      {&rec.right_lung, &data.organs.right_lung},
      {&rec.left_lung, &data.organs.left_lung},
      {&rec.heart, &data.organs.heart},
  };
  for (auto [path, slot] : organs) {
    auto m = load_mask(*path);
    if (!m) {
      ok = false;
    } else if (m->empty()) {
      violations.push_back("empty organ mask " + path->string());
      ok = false;
    } else {
      *slot = std::move(*m);
    }
  }

  auto boxes = attempt<std::vector<DetectionBox>>(
      violations, [&] { return parse_detections(read_json_file(rec.detections)); });
  if (!boxes) {
    ok = false;
  } else {
    for (std::size_t i = 0; i < boxes->size(); ++i) {
      const auto& b = (*boxes)[i];
      if (auto bad = b.violation(w, h)) {
        violations.push_back("detection " + std::to_string(i) + ": " + *bad);
        ok = false;
      } else if (!is_excluded_detection_label(b.label)) {
        data.detections.push_back(b);
      }
    }
  }

  if (rec.findings) {
    auto f = attempt<std::vector<StructuredFinding>>(
        violations, [&] { return parse_findings(read_json_file(*rec.findings)); });
    if (f) {
      data.findings = std::move(*f);
    } else {
      ok = false;
    }
  }

  if (!ok) return std::nullopt;
  data.image = std::move(*image);
  data.edited = std::move(*edited);
  data.report_text = std::move(*report);
  return data;
}

}  // namespace

StudyRecord study_record_from_json(const json& j, const fs::path& root) {
  StudyRecord r;
  r.study_id = required_string(j, "study_id");
  if (r.study_id.empty()) throw DataError("manifest record has empty study_id");
  r.split = parse_split(required_string(j, "split"));
  r.image = resolve(root, required_string(j, "image"));
  r.edited_image = resolve(root, required_string(j, "edited_image"));
  r.report = resolve(root, required_string(j, "report"));
  r.anatomy_mask_dir = resolve(root, required_string(j, "anatomy_mask_dir"));
  r.detections = resolve(root, required_string(j, "detections"));
  if (!j.contains("organ_masks") || !j.at("organ_masks").is_object()) {
    throw DataError("manifest record " + r.study_id + " missing organ_masks");
  }
  const auto& organs = j.at("organ_masks");
  r.right_lung = resolve(root, required_string(organs, "right_lung"));
  r.left_lung = resolve(root, required_string(organs, "left_lung"));
  r.heart = resolve(root, required_string(organs, "heart"));
  if (j.contains("findings") && !j.at("findings").is_null()) {
    r.findings = resolve(root, j.at("findings").get<std::string>());
  }
  if (j.contains("qc_flags")) r.qc_flags = j.at("qc_flags").get<std::vector<std::string>>();
  return r;
}

json study_record_to_json(const StudyRecord& r, const fs::path& root) {
  json j{{"study_id", r.study_id},
         {"split", to_string(r.split)},
         {"image", relative_to(r.image, root)},
         {"edited_image", relative_to(r.edited_image, root)},
         {"report", relative_to(r.report, root)},
         {"anatomy_mask_dir", relative_to(r.anatomy_mask_dir, root)},
         {"detections", relative_to(r.detections, root)},
         {"organ_masks",
          {{"right_lung", relative_to(r.right_lung, root)},
           {"left_lung", relative_to(r.left_lung, root)},
           {"heart", relative_to(r.heart, root)}}},
         {"qc_flags", r.qc_flags}};
  if (r.findings) j["findings"] = relative_to(*r.findings, root);
  return j;
}

std::vector<StudyRecord> load_manifest(const fs::path& manifest) {
  auto root = fs::absolute(manifest).lexically_normal().parent_path();
  std::vector<StudyRecord> out;
  auto lines = read_jsonl_file(manifest);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(study_record_from_json(lines[i], root));
    } catch (const std::exception& e) {
      throw DataError(manifest.string() + " record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::string anatomy_mask_filename(AnatomicalLabel label) {
  return std::string(to_string(label)) + ".png";
}

bool is_excluded_detection_label(std::string_view label) {
  auto l = to_lower(label);
  return l == "aortic enlargement" || l == "other lesion" || l == "pneumothorax";
}

RasterMask StudyData::anatomy_union(LabelSet labels) const {
  RasterMask out(image.width(), image.height());
  for (auto l : labels.labels()) out |= anatomy_mask(l);
  return out;
}

StudyData load_study(const StudyRecord& record) {
  std::vector<std::string> violations;
  auto data = load_collecting(record, violations);
  if (!data) throw DataError("study " + record.study_id + ": " + join(violations, "; "));
  return std::move(*data);
}

std::vector<std::string> validate_study(const StudyRecord& record) {
  std::vector<std::string> violations;
  load_collecting(record, violations);
  return violations;
}

}  // namespace cxrils
