#include "cxrils/templates.hpp"

#include <array>
#include <map>

#include "cxrils/util.hpp"

namespace cxrils {

namespace {

constexpr std::array<std::string_view, 3> kInstructionTemplates = {
    "Segment the [Target] in the [Location].",
    "Segment the [Target].",
    "Segment the opacity in the [Location] and predict its type.",
};

constexpr std::array<AnswerVariant, 8> kAllVariants = {
    AnswerVariant::BasicPositive,       AnswerVariant::BasicNegative,
    AnswerVariant::GlobalPositive,      AnswerVariant::GlobalOrgan,
    AnswerVariant::GlobalNegative,      AnswerVariant::InferenceDefinitive,
    AnswerVariant::InferenceTentative,  AnswerVariant::InferenceNegative,
};

constexpr std::array<std::string_view, 8> kAnswerTemplates = {
    "[SEG]",
    "[SEG] There is no [Target] in the [Location].",
    "[SEG] It is located in the [Location].",
    "[SEG]",
    "[SEG] There is no [Target].",
    "[SEG] It is highly suggestive of [Lesion].",
    "[SEG] It possibly reflects [Lesion].",
    "[SEG] There is no opacity in the [Location].",
};

constexpr std::array<std::string_view, 8> kVariantNames = {
    "basic_positive",       "basic_negative",      "global_positive",
    "global_organ",         "global_negative",     "inference_definitive",
    "inference_tentative",  "inference_negative",
};

constexpr std::array<std::string_view, 3> kPlaceholders = {"[Target]", "[Location]", "[Lesion]"};

struct Piece {
  bool placeholder = false;
  std::string text;  // literal text, or the placeholder name
};

std::vector<Piece> tokenize(std::string_view tmpl) {
  std::vector<Piece> out;
  std::string literal;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    bool matched = false;
    for (auto ph : kPlaceholders) {
      if (tmpl.substr(i, ph.size()) == ph) {
        if (!literal.empty()) out.push_back({false, std::move(literal)});
        literal.clear();
        out.push_back({true, std::string(ph)});
        i += ph.size();
        matched = true;
        break;
      }
    }
    if (!matched) literal.push_back(tmpl[i++]);
  }
  if (!literal.empty()) out.push_back({false, std::move(literal)});
  return out;
}

using Captures = std::map<std::string, std::string>;

// Backtracking matcher over literal/placeholder pieces. Placeholders capture
// at least one character. Every complete match is reported.
void match_pieces(const std::vector<Piece>& pieces, std::size_t k, std::string_view text,
                  std::size_t pos, Captures& caps, std::vector<Captures>& results) {
  if (k == pieces.size()) {
    if (pos == text.size()) results.push_back(caps);
    return;
  }
  const auto& piece = pieces[k];
  if (!piece.placeholder) {
    if (text.substr(pos, piece.text.size()) != piece.text) return;
    match_pieces(pieces, k + 1, text, pos + piece.text.size(), caps, results);
    return;
  }
  for (std::size_t end = pos + 1; end <= text.size(); ++end) {
    caps[piece.text] = std::string(text.substr(pos, end - pos));
    match_pieces(pieces, k + 1, text, end, caps, results);
  }
  caps.erase(piece.text);
}

std::optional<TemplateVars> bind(const Captures& caps) {
  TemplateVars vars;
  for (const auto& [name, value] : caps) {
    if (name == "[Target]") {
      vars.target = try_parse_lesion(value);
      if (!vars.target) return std::nullopt;
    } else if (name == "[Lesion]") {
      vars.lesion = try_parse_lesion(value);
      if (!vars.lesion) return std::nullopt;
    } else {
      auto locs = parse_location_phrase(value);
      if (!locs) return std::nullopt;
      vars.locations = *locs;
    }
  }
  return vars;
}

std::vector<TemplateVars> match_template(std::string_view tmpl, std::string_view text) {
  auto pieces = tokenize(tmpl);
  Captures caps;
  std::vector<Captures> raw;
  match_pieces(pieces, 0, text, 0, caps, raw);
  std::vector<TemplateVars> out;
  for (const auto& c : raw) {
    if (auto v = bind(c)) out.push_back(*v);
  }
  return out;
}

std::string fill(std::string_view tmpl, const TemplateVars& vars) {
  std::string out;
  for (const auto& piece : tokenize(tmpl)) {
    if (!piece.placeholder) {
      out += piece.text;
    } else if (piece.text == "[Target]") {
      if (!vars.target) throw DataError("template needs a target");
      out += to_string(*vars.target);
    } else if (piece.text == "[Lesion]") {
      if (!vars.lesion) throw DataError("template needs a lesion");
      out += to_string(*vars.lesion);
    } else {
      if (vars.locations.empty()) throw DataError("template needs at least one location");
      out += location_phrase(vars.locations);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(AnswerVariant v) { return kVariantNames[static_cast<std::size_t>(v)]; }

TemplateType template_type_of(AnswerVariant v) {
  switch (v) {
    case AnswerVariant::BasicPositive:
    case AnswerVariant::BasicNegative:
      return TemplateType::Basic;
    case AnswerVariant::GlobalPositive:
    case AnswerVariant::GlobalOrgan:
    case AnswerVariant::GlobalNegative:
      return TemplateType::Global;
    default:
      return TemplateType::LesionInference;
  }
}

Polarity polarity_of(AnswerVariant v) {
  switch (v) {
    case AnswerVariant::BasicNegative:
    case AnswerVariant::GlobalNegative:
    case AnswerVariant::InferenceNegative:
      return Polarity::Negative;
    default:
      return Polarity::Positive;
  }
}

std::string location_phrase(LabelSet labels) {
  std::vector<std::string> names;
  for (auto l : labels.labels()) names.emplace_back(to_string(l));
  return join(names, " and ");
}

std::optional<LabelSet> parse_location_phrase(std::string_view phrase) {
  LabelSet out;
  for (const auto& part : split(phrase, " and ")) {
    auto label = try_parse_label(part);
    if (!label || out.contains(*label)) return std::nullopt;
    out.insert(*label);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

const TemplateBank& TemplateBank::standard() {
  static const TemplateBank bank;
  return bank;
}

std::string_view TemplateBank::instruction_template(TemplateType type) const {
  return kInstructionTemplates[static_cast<std::size_t>(type)];
}

std::string_view TemplateBank::answer_template(AnswerVariant variant) const {
  return kAnswerTemplates[static_cast<std::size_t>(variant)];
}

std::string TemplateBank::render_instruction(TemplateType type, const TemplateVars& vars) const {
  return fill(instruction_template(type), vars);
}

std::string TemplateBank::render_answer(AnswerVariant variant, const TemplateVars& vars) const {
  return fill(answer_template(variant), vars);
}

std::optional<ParsedInstruction> TemplateBank::parse_instruction(std::string_view text) const {
  std::optional<ParsedInstruction> found;
  int matches = 0;
  for (auto type : {TemplateType::Basic, TemplateType::Global, TemplateType::LesionInference}) {
    auto vars = match_template(instruction_template(type), text);
    matches += static_cast<int>(vars.size());
    if (!vars.empty()) found = ParsedInstruction{type, vars.front()};
  }
  if (matches != 1) return std::nullopt;
  return found;
}

std::optional<ParsedAnswer> TemplateBank::parse_answer(TemplateType type,
                                                       std::string_view text) const {
  std::optional<ParsedAnswer> found;
  int matches = 0;
  for (auto variant : kAllVariants) {
    if (template_type_of(variant) != type) continue;
    auto vars = match_template(answer_template(variant), text);
    matches += static_cast<int>(vars.size());
    if (!vars.empty()) found = ParsedAnswer{variant, vars.front()};
  }
  if (matches != 1) return std::nullopt;
  return found;
}

}  // namespace cxrils
