#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxrils/core.hpp"
#include "cxrils/json_io.hpp"

namespace cxrils {

struct PairContext {
  std::string study_id;
  Split split = Split::Train;
  /// Mask reference attached to positive pairs.
  std::optional<std::string> mask_ref;
};

std::string make_pair_id(std::string_view study_id, LesionType lesion, TemplateType type,
                         Polarity polarity, LabelSet locations);

/// Location-specific positive. Tentative findings are phrased as opacity.
std::vector<InstructionAnswerPair> gen_basic(const GroundedLesion& g, const PairContext& ctx = {});

/// Whole-image positive. Requires grounded == reported and, when
/// `target_unique` is false, emits nothing. Cardiomegaly always qualifies.
std::vector<InstructionAnswerPair> gen_global(const GroundedLesion& g, const PairContext& ctx = {},
                                              bool target_unique = true);

/// Opacity-type prediction for pneumonia, atelectasis and edema.
std::vector<InstructionAnswerPair> gen_lesion_inference(const GroundedLesion& g,
                                                        const PairContext& ctx = {});

struct NegativeConfig {
  double ctr_max = 0.45;
  std::uint64_t seed = 0;
};

/// At most one negative per lesion type.
std::vector<InstructionAnswerPair> gen_negatives(const std::vector<StructuredFinding>& findings,
                                                 const std::vector<GroundedLesion>& lesions,
                                                 LabelSet empty_locations,
                                                 std::optional<double> ctr,
                                                 const NegativeConfig& cfg,
                                                 const PairContext& ctx = {});

/// The instruction target: the lesion itself, or opacity for a tentative
/// lung finding.
LesionType instruction_target(LesionType lesion, Certainty certainty);

struct StudyPairInput {
  std::string study_id;
  Split split = Split::Train;
  std::vector<StructuredFinding> findings;
  std::vector<GroundedLesion> lesions;
  std::vector<std::string> mask_refs;  // parallel to lesions
  LabelSet empty_locations;
  std::optional<double> ctr;
};

/// All positives and negatives for one study, duplicates removed by pair_id.
std::vector<InstructionAnswerPair> generate_study_pairs(const StudyPairInput& in,
                                                        const NegativeConfig& cfg);

/// Counts per split, lesion, template type and polarity.
class PairStatistics {
 public:
  void add(const InstructionAnswerPair& p);
  std::size_t count(Split split, LesionType lesion, TemplateType type, Polarity polarity) const;
  std::size_t total(Split split) const;
  json to_json() const;
  /// One table per split: lesion rows, template/polarity columns.
  std::string to_text() const;

 private:
  // [split][lesion][type][polarity]
  std::array<std::array<std::array<std::array<std::size_t, 2>, 3>, kLesionCount>, 3> counts_{};
};

}  // namespace cxrils
