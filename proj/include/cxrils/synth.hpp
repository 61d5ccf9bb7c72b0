#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cxrils/core.hpp"
#include "cxrils/json_io.hpp"
#include "cxrils/study.hpp"
#include "cxrils/util.hpp"

namespace cxrils {

enum class LesionShape : std::uint8_t { Ellipse, Rectangle, BasalBand };

std::string_view to_string(LesionShape s);

struct LesionPlacement {
  LesionType lesion = LesionType::Pneumonia;
  /// Zone labels covered; empty for cardiomegaly.
  LabelSet zones;
  LesionShape shape = LesionShape::Ellipse;
  /// Fraction of the maximum intensity added inside the lesion.
  double peak_delta = 0.3;
  Certainty certainty = Certainty::Definitive;
  /// Blob size relative to the free zone area, in (0, 1].
  double size_scale = 1.0;
  /// Band height as a fraction of lung height, for basal bands.
  double band_fraction = 0.2;
};

struct DetectorNoise {
  /// Confidence range the detector draws from, before noise.
  double confidence_min = 0.5;
  double confidence_max = 0.95;
  double confidence_noise = 0.0;
  int jitter = 0;
  int false_positives = 0;
};

struct SynthSpec {
  std::string study_id = "synth";
  int width = 256;
  int height = 256;
  Split split = Split::Train;
  std::vector<LesionPlacement> placements;
  std::vector<LesionType> negated;
  DetectorNoise noise;
  double ctr = 0.45;
  std::vector<std::string> qc_flags;
  /// Shift the anatomy-provider lung masks so the cross-check fails.
  bool qc_mismatch = false;
  std::uint64_t seed = 0;
  /// Vary report wording (synonyms, sentence forms).
  bool varied_wording = true;
};

struct OracleLesion {
  LesionType lesion = LesionType::Pneumonia;
  Certainty certainty = Certainty::Definitive;
  LabelSet zones;
  RasterMask mask;
  std::string mask_path;  // relative to the study directory
};

struct OracleTruth {
  std::string study_id;
  double ctr = 0.0;
  std::vector<OracleLesion> lesions;
  std::vector<LesionType> negated;
  std::string report;

  json to_json() const;
};

struct SynthStudy {
  StudyRecord record;
  OracleTruth truth;
};

/// Fixed phantom geometry for a width x height image.
struct PhantomGeometry {
  int width = 0;
  int height = 0;
  int lung_top = 0;
  int lung_bottom = 0;
  int right_c0 = 0;
  int right_c1 = 0;
  int left_c0 = 0;
  int left_c1 = 0;
  int heart_top = 0;
  int heart_bottom = 0;

  static PhantomGeometry for_size(int width, int height);
  /// Inclusive row range of zone band 0..3 (apical..base).
  std::pair<int, int> band_rows(int band) const;
  RasterMask zone_mask(AnatomicalLabel label) const;
  RasterMask heart_mask(double ctr) const;
  int thoracic_width() const { return left_c1 - right_c0 + 1; }
};

/// Renders the study under `root / spec.study_id` and returns its manifest
/// record (paths absolute) and oracle truth. Throws DataError on an invalid
/// spec, including lesions of different types that touch.
SynthStudy make_study(const SynthSpec& spec, const std::filesystem::path& root);

struct CorpusOptions {
  int count = 200;
  std::uint64_t seed = 1;
  int width = 256;
  int height = 256;
  int jitter = 0;
  double confidence_noise = 0.0;
  int false_positives = 0;
  double qc_mismatch_rate = 0.0;
  double qc_flag_rate = 0.0;
  double tentative_rate = 0.25;
};

SynthSpec random_spec(const std::string& study_id, Rng& rng, const CorpusOptions& opts);

struct Corpus {
  std::filesystem::path manifest;
  std::vector<SynthStudy> studies;
};

/// Writes `count` studies plus manifest.jsonl under `root`.
Corpus make_corpus(const CorpusOptions& opts, const std::filesystem::path& root);

}  // namespace cxrils
