#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxrils/core.hpp"

namespace cxrils {

struct StudyData;

struct AnomalyMap {
  int width = 0;
  int height = 0;
  /// Signed normalized difference, row-major.
  std::vector<double> raw;
  RasterMask thresholded;

  double at(int row, int col) const {
    return raw[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(col)];
  }
  RasterMask threshold(double tau_ano) const;
};

AnomalyMap compute_anomaly_map(const ImageGray& image, const ImageGray& edited, double tau_ano);

struct LungMasks {
  RasterMask right;
  RasterMask left;
  RasterMask right_base;
  RasterMask left_base;
};

struct BoxFilterVerdict {
  int box_index = 0;
  bool c1 = false;
  bool c2 = false;
  bool c3 = false;
  bool c4 = false;
  bool accepted = false;
  double anatomy_iou = 0.0;
  double signal_ratio = 0.0;
  double right_lung_iou = 0.0;
  double left_lung_iou = 0.0;
};

/// Evaluates the anatomy, confidence, signal and size tests for every box.
/// `anomaly` is the thresholded anomaly set.
std::vector<BoxFilterVerdict> filter_boxes(const std::vector<DetectionBox>& boxes,
                                           const RasterMask& anatomy_union,
                                           const RasterMask& anomaly, const RasterMask& right_lung,
                                           const RasterMask& left_lung,
                                           const ThresholdSet& thresholds);

using ComponentRefiner = std::function<RasterMask(const RasterMask&)>;

/// Union of the anomaly components touching any accepted box. Each distinct
/// component is refined once; an empty refiner leaves components unchanged.
RasterMask extract_lesion_mask(const std::vector<DetectionBox>& accepted_boxes,
                               const RasterMask& anomaly,
                               const ComponentRefiner& refine = nullptr);

struct RefineConfig {
  int noise_iterations = 2;
  double min_area_fraction = 0.001;
  double delta = 10.0;
  int max_rounds = 8;
  double base_fraction = 0.15;

  bool operator==(const RefineConfig&) const = default;
};

RasterMask refine(const RasterMask& component, const ImageGray& image, LesionType lesion,
                  const LungMasks& lungs, const RefineConfig& cfg);

/// Labels whose masks miss every mask of `reported`. Labels with empty masks
/// never qualify.
LabelSet empty_locations(const std::array<RasterMask, kLabelCount>& anatomy, LabelSet reported);

/// Returns the grounded lesion, or nothing when the mask touches none of the
/// reported locations.
std::optional<GroundedLesion> verify_locations(const StructuredFinding& finding, LesionType lesion,
                                               const RasterMask& lesion_mask,
                                               const std::array<RasterMask, kLabelCount>& anatomy,
                                               LabelSet all_reported_labels);

struct GroundingConfig {
  ThresholdSet general = ThresholdSet::general_defaults();
  ThresholdSet edema = ThresholdSet::edema_defaults();
  std::map<LesionType, ThresholdSet> overrides;
  RefineConfig refine;

  ThresholdSet thresholds_for(LesionType lesion) const;
  bool operator==(const GroundingConfig&) const = default;
};

struct FindingGrounding {
  int finding_index = 0;
  StructuredFinding finding;
  std::optional<LesionType> lesion;
  std::vector<BoxFilterVerdict> verdicts;
  std::optional<GroundedLesion> grounded;
  /// Set when the finding did not produce a grounded lesion.
  std::string rejection;
};

struct StudyGrounding {
  std::vector<FindingGrounding> findings;
  LabelSet all_reported;
  LabelSet empty;

  std::vector<GroundedLesion> lesions() const;
};

StudyGrounding ground_study(const StudyData& study, const std::vector<StructuredFinding>& findings,
                            const GroundingConfig& cfg);

}  // namespace cxrils
