#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cxrils/core.hpp"
#include "cxrils/json_io.hpp"

namespace cxrils {

/// One manifest line. Paths are resolved against the manifest root on load.
struct StudyRecord {
  std::string study_id;
  Split split = Split::Train;
  std::filesystem::path image;
  std::filesystem::path edited_image;
  std::filesystem::path report;
  std::filesystem::path anatomy_mask_dir;
  std::filesystem::path detections;
  std::filesystem::path right_lung;
  std::filesystem::path left_lung;
  std::filesystem::path heart;
  std::optional<std::filesystem::path> findings;
  std::vector<std::string> qc_flags;
};

StudyRecord study_record_from_json(const json& j, const std::filesystem::path& root);
/// Paths are written relative to `root` when they lie beneath it.
json study_record_to_json(const StudyRecord& r, const std::filesystem::path& root);
std::vector<StudyRecord> load_manifest(const std::filesystem::path& manifest);

/// File name of an anatomy mask inside the anatomy directory.
std::string anatomy_mask_filename(AnatomicalLabel label);
inline constexpr const char* kAnatomyHeartFile = "heart.png";

struct OrganMasks {
  RasterMask right_lung;
  RasterMask left_lung;
  RasterMask heart;
};

/// Detection classes that are not hyperintense and are dropped at load.
bool is_excluded_detection_label(std::string_view label);

struct StudyData {
  StudyRecord record;
  ImageGray image;
  ImageGray edited;
  std::string report_text;
  std::array<RasterMask, kLabelCount> anatomy;
  RasterMask anatomy_heart;
  OrganMasks organs;
  std::vector<DetectionBox> detections;
  std::optional<std::vector<StructuredFinding>> findings;

  const RasterMask& anatomy_mask(AnatomicalLabel l) const {
    return anatomy[static_cast<std::size_t>(l)];
  }
  RasterMask anatomy_union(LabelSet labels) const;
};

/// Loads every artifact. Throws DataError on the first problem.
StudyData load_study(const StudyRecord& record);

/// Empty when the study's artifacts are all present and consistent.
std::vector<std::string> validate_study(const StudyRecord& record);

}  // namespace cxrils
