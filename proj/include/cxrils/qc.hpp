#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cxrils/core.hpp"
#include "cxrils/json_io.hpp"

namespace cxrils {

struct OrganMasks;

struct CrossCheck {
  bool pass = true;
  std::vector<std::string> reasons;
};

/// Compares the outermost lung columns and the lowermost heart row of two
/// mask sets. Tolerances are fractions of the image width and height.
CrossCheck cross_check_masks(const OrganMasks& primary, const OrganMasks& secondary,
                             double rel_tol = 0.05);

/// Heart column span over the combined lung column span. Throws on empty masks.
double compute_ctr(const RasterMask& right_lung, const RasterMask& left_lung,
                   const RasterMask& heart);

struct QcConfig {
  double rel_tol = 0.05;
  double ctr_negative_max = 0.45;
  bool operator==(const QcConfig&) const = default;
};

struct QcReport {
  std::string study_id;
  std::vector<std::string> flags;
  std::optional<double> ctr;
  CrossCheck cross_check;

  bool excluded() const { return !flags.empty() || !cross_check.pass; }
  json to_json() const;
};

/// `flags` are the study's precomputed image-level flags.
QcReport run_qc(const std::string& study_id, const std::vector<std::string>& flags,
                const OrganMasks& organs, const OrganMasks& anatomy, const QcConfig& cfg);

}  // namespace cxrils
