#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxrils/core.hpp"
#include "cxrils/json_io.hpp"
#include "cxrils/templates.hpp"

namespace cxrils {

struct Prediction {
  std::string pair_id;
  std::optional<RasterMask> mask;
  std::string answer_text;
};

struct GroundTruthItem {
  InstructionAnswerPair pair;
  /// Present for positive pairs.
  std::optional<RasterMask> mask;
};

/// Mergeable partial sums for the segmentation metrics.
struct SegmentationTally {
  double iou_sum = 0.0;
  std::size_t positives = 0;
  std::size_t intersection = 0;
  std::size_t union_ = 0;
  std::size_t negatives = 0;
  std::size_t negatives_correct = 0;

  void add_positive(const RasterMask* pred, const RasterMask& truth);
  void add_negative(const RasterMask* pred);
  void merge(const SegmentationTally& other);

  std::optional<double> giou() const;
  std::optional<double> ciou() const;
  std::optional<double> n_acc() const;
};

struct TextTally {
  std::size_t correct = 0;
  std::size_t total = 0;
  void add(bool ok) {
    ++total;
    correct += ok ? 1 : 0;
  }
  void merge(const TextTally& o) {
    correct += o.correct;
    total += o.total;
  }
  std::optional<double> accuracy() const;
};

struct SegmentationScores {
  SegmentationTally overall;
  std::map<LesionType, SegmentationTally> per_lesion;
  std::map<TemplateType, SegmentationTally> per_template;
};

struct TextScores {
  TextTally overall;
  std::map<TemplateType, TextTally> per_template;
  std::map<Polarity, TextTally> per_polarity;
  std::map<LesionType, TextTally> per_lesion;
};

/// Pairs without a prediction record are scored as a none mask. Throws when
/// a prediction names an unknown or repeated pair_id.
SegmentationScores score_segmentation(const std::vector<Prediction>& preds,
                                      const std::vector<GroundTruthItem>& truth);

/// Strict match: same answer variant and equal variables, with locations
/// compared as sets.
bool answer_matches(const InstructionAnswerPair& truth, std::string_view response,
                    const TemplateBank& bank = TemplateBank::standard());

TextScores score_text(const std::vector<Prediction>& preds,
                      const std::vector<GroundTruthItem>& truth,
                      const TemplateBank& bank = TemplateBank::standard());

json scores_to_json(const SegmentationScores& seg, const TextScores& text);
/// Percentages with one decimal; "-" marks an empty cell.
std::string scores_to_text(const SegmentationScores& seg, const TextScores& text);

/// Predictions JSONL: {pair_id, mask_path|null, answer_text}. Mask paths are
/// relative to the file.
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

/// Dataset pairs JSONL plus masks; mask_ref is relative to `dataset_root`.
std::vector<GroundTruthItem> load_ground_truth(const std::filesystem::path& pairs_path,
                                               const std::filesystem::path& dataset_root,
                                               std::optional<Split> split = std::nullopt);

}  // namespace cxrils
