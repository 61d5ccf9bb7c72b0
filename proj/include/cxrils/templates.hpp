#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxrils/core.hpp"

namespace cxrils {

enum class AnswerVariant : std::uint8_t {
  BasicPositive,
  BasicNegative,
  GlobalPositive,
  GlobalOrgan,
  GlobalNegative,
  InferenceDefinitive,
  InferenceTentative,
  InferenceNegative,
};

std::string_view to_string(AnswerVariant v);
TemplateType template_type_of(AnswerVariant v);
Polarity polarity_of(AnswerVariant v);

/// Variables substituted into a template. Unused slots stay empty.
struct TemplateVars {
  std::optional<LesionType> target;
  LabelSet locations;
  std::optional<LesionType> lesion;

  bool operator==(const TemplateVars&) const = default;
};

struct ParsedInstruction {
  TemplateType type = TemplateType::Basic;
  TemplateVars vars;
};

struct ParsedAnswer {
  AnswerVariant variant = AnswerVariant::BasicPositive;
  TemplateVars vars;
};

/// Location phrase in canonical label order joined with " and ".
std::string location_phrase(LabelSet labels);
/// Inverse of location_phrase; accepts any order. Empty on failure.
std::optional<LabelSet> parse_location_phrase(std::string_view phrase);

/// The fixed instruction and answer templates.
class TemplateBank {
 public:
  static const TemplateBank& standard();

  std::string_view instruction_template(TemplateType type) const;
  std::string_view answer_template(AnswerVariant variant) const;

  std::string render_instruction(TemplateType type, const TemplateVars& vars) const;
  std::string render_answer(AnswerVariant variant, const TemplateVars& vars) const;

  /// Succeeds only when exactly one instruction template matches.
  std::optional<ParsedInstruction> parse_instruction(std::string_view text) const;
  /// Matches against the answer templates of `type` only.
  std::optional<ParsedAnswer> parse_answer(TemplateType type, std::string_view text) const;
};

}  // namespace cxrils
