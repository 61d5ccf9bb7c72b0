#include "cxrils/pairgen.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include "cxrils/templates.hpp"
#include "cxrils/util.hpp"

namespace cxrils {

namespace {

bool is_lung_lesion(LesionType l) { return l != LesionType::Cardiomegaly; }

bool has_inference(LesionType l) {
  return l == LesionType::Pneumonia || l == LesionType::Atelectasis || l == LesionType::Edema;
}

InstructionAnswerPair make_pair(const PairContext& ctx, LesionType lesion, LesionType target,
                                TemplateType type, AnswerVariant variant, const TemplateVars& vars,
                                LabelSet locations, std::optional<Certainty> certainty) {
  const auto& bank = TemplateBank::standard();
  InstructionAnswerPair p;
  p.study_id = ctx.study_id;
  p.split = ctx.split;
  p.lesion = lesion;
  p.target = target;
  p.template_type = type;
  p.polarity = polarity_of(variant);
  p.certainty = certainty;
  p.locations = locations;
  TemplateVars instruction_vars = vars;
  instruction_vars.lesion.reset();
  p.instruction = bank.render_instruction(type, instruction_vars);
  p.answer_text = bank.render_answer(variant, vars);
  if (p.polarity == Polarity::Positive) p.mask_ref = ctx.mask_ref;
  p.pair_id = make_pair_id(ctx.study_id, lesion, type, p.polarity, locations);
  return p;
}

AnatomicalLabel pick(Rng& rng, LabelSet from) {
  auto labels = from.labels();
  return labels[rng.index(labels.size())];
}

LabelSet all_labels() { return LabelSet::from_raw(0x3FF); }

}  // namespace

std::string make_pair_id(std::string_view study_id, LesionType lesion, TemplateType type,
                         Polarity polarity, LabelSet locations) {
  std::string key(study_id);
  key += '|';
  key += to_string(lesion);
  key += '|';
  key += to_string(type);
  key += '|';
  key += to_string(polarity);
  for (auto l : locations.labels()) {
    key += '|';
    key += to_string(l);
  }
  return hex64(fnv1a64(key));
}

LesionType instruction_target(LesionType lesion, Certainty certainty) {
  if (certainty == Certainty::Tentative && is_lung_lesion(lesion)) return LesionType::Opacity;
  return lesion;
}

std::vector<InstructionAnswerPair> gen_basic(const GroundedLesion& g, const PairContext& ctx) {
  if (!is_lung_lesion(g.lesion) || g.grounded_locations.empty()) return {};
  const auto target = instruction_target(g.lesion, g.certainty);
  TemplateVars vars{target, g.grounded_locations, std::nullopt};
  return {make_pair(ctx, g.lesion, target, TemplateType::Basic, AnswerVariant::BasicPositive, vars,
                    g.grounded_locations, g.certainty)};
}

std::vector<InstructionAnswerPair> gen_global(const GroundedLesion& g, const PairContext& ctx,
                                              bool target_unique) {
  if (g.lesion == LesionType::Cardiomegaly) {
    TemplateVars vars{LesionType::Cardiomegaly, {}, std::nullopt};
    return {make_pair(ctx, g.lesion, g.lesion, TemplateType::Global, AnswerVariant::GlobalOrgan,
                      vars, {}, g.certainty)};
  }
  if (!target_unique || g.grounded_locations.empty() ||
      g.grounded_locations != g.reported_locations) {
    return {};
  }
  const auto target = instruction_target(g.lesion, g.certainty);
  TemplateVars vars{target, g.grounded_locations, std::nullopt};
  return {make_pair(ctx, g.lesion, target, TemplateType::Global, AnswerVariant::GlobalPositive,
                    vars, g.grounded_locations, g.certainty)};
}

std::vector<InstructionAnswerPair> gen_lesion_inference(const GroundedLesion& g,
                                                        const PairContext& ctx) {
  if (!has_inference(g.lesion) || g.grounded_locations.empty()) return {};
  const auto variant = g.certainty == Certainty::Definitive ? AnswerVariant::InferenceDefinitive
                                                            : AnswerVariant::InferenceTentative;
  TemplateVars vars{std::nullopt, g.grounded_locations, g.lesion};
  return {make_pair(ctx, g.lesion, LesionType::Opacity, TemplateType::LesionInference, variant,
                    vars, g.grounded_locations, g.certainty)};
}

std::vector<InstructionAnswerPair> gen_negatives(const std::vector<StructuredFinding>& findings,
                                                 const std::vector<GroundedLesion>& lesions,
                                                 LabelSet empty_locations,
                                                 std::optional<double> ctr,
                                                 const NegativeConfig& cfg,
                                                 const PairContext& ctx) {
  Rng rng(cfg.seed ^ fnv1a64(ctx.study_id));
  PairContext neg_ctx = ctx;
  neg_ctx.mask_ref.reset();

  std::set<LesionType> positive;
  bool any_positive_lung = false;
  for (const auto& f : findings) {
    if (f.presence != Presence::Positive) continue;
    auto l = f.target_lesion();
    if (!l) continue;
    positive.insert(*l);
    if (is_lung_lesion(*l)) any_positive_lung = true;
  }
  std::set<LesionType> grounded_definitive;
  for (const auto& g : lesions) {
    if (g.certainty == Certainty::Definitive) grounded_definitive.insert(g.lesion);
  }

  auto basic_negative = [&](LesionType lesion, AnatomicalLabel where, bool allow_inference) {
    LabelSet loc{where};
    if (allow_inference && lesion == LesionType::Opacity && rng.chance(0.5)) {
      TemplateVars vars{std::nullopt, loc, std::nullopt};
      return make_pair(neg_ctx, lesion, lesion, TemplateType::LesionInference,
                       AnswerVariant::InferenceNegative, vars, loc, std::nullopt);
    }
    TemplateVars vars{lesion, loc, std::nullopt};
    return make_pair(neg_ctx, lesion, lesion, TemplateType::Basic, AnswerVariant::BasicNegative,
                     vars, loc, std::nullopt);
  };
  auto global_negative = [&](LesionType lesion) {
    TemplateVars vars{lesion, {}, std::nullopt};
    return make_pair(neg_ctx, lesion, lesion, TemplateType::Global, AnswerVariant::GlobalNegative,
                     vars, {}, std::nullopt);
  };

  std::vector<InstructionAnswerPair> out;
  for (auto lesion : kAllLesions) {
    const bool present = positive.count(lesion) != 0;
    if (lesion == LesionType::Cardiomegaly) {
      if (!present && ctr && *ctr <= cfg.ctr_max) out.push_back(global_negative(lesion));
      continue;
    }
    if (present) {
      if (grounded_definitive.count(lesion) && !empty_locations.empty()) {
        out.push_back(basic_negative(lesion, pick(rng, empty_locations), true));
      }
      continue;
    }
    const bool umbrella = lesion == LesionType::Opacity || lesion == LesionType::Consolidation;
    if (umbrella && any_positive_lung) {
      if (!empty_locations.empty()) {
        out.push_back(basic_negative(lesion, pick(rng, empty_locations), true));
      }
      continue;
    }
    if (rng.chance(0.5)) {
      out.push_back(global_negative(lesion));
    } else {
      auto pool = empty_locations.empty() ? all_labels() : empty_locations;
      out.push_back(basic_negative(lesion, pick(rng, pool), true));
    }
  }
  return out;
}

std::vector<InstructionAnswerPair> generate_study_pairs(const StudyPairInput& in,
                                                        const NegativeConfig& cfg) {
  if (in.mask_refs.size() != in.lesions.size()) {
    throw DataError("generate_study_pairs: mask_refs and lesions differ in length");
  }
  // Count positive findings per instruction target for the global gate.
  std::map<LesionType, int> target_count;
  for (const auto& f : in.findings) {
    if (f.presence != Presence::Positive) continue;
    if (auto l = f.target_lesion()) ++target_count[instruction_target(*l, f.certainty)];
  }

  std::vector<InstructionAnswerPair> all;
  auto append = [&](std::vector<InstructionAnswerPair> ps) {
    for (auto& p : ps) all.push_back(std::move(p));
  };
  for (std::size_t i = 0; i < in.lesions.size(); ++i) {
    const auto& g = in.lesions[i];
    PairContext ctx{in.study_id, in.split, in.mask_refs[i]};
    append(gen_basic(g, ctx));
    append(gen_global(g, ctx, target_count[instruction_target(g.lesion, g.certainty)] <= 1));
    append(gen_lesion_inference(g, ctx));
  }
  append(gen_negatives(in.findings, in.lesions, in.empty_locations, in.ctr, cfg,
                       PairContext{in.study_id, in.split, std::nullopt}));

  std::vector<InstructionAnswerPair> out;
  std::set<std::string> seen;
  for (auto& p : all) {
    if (seen.insert(p.pair_id).second) out.push_back(std::move(p));
  }
  return out;
}

void PairStatistics::add(const InstructionAnswerPair& p) {
  ++counts_[static_cast<std::size_t>(p.split)][static_cast<std::size_t>(p.lesion)]
           [static_cast<std::size_t>(p.template_type)][static_cast<std::size_t>(p.polarity)];
}

std::size_t PairStatistics::count(Split split, LesionType lesion, TemplateType type,
                                  Polarity polarity) const {
  return counts_[static_cast<std::size_t>(split)][static_cast<std::size_t>(lesion)]
                [static_cast<std::size_t>(type)][static_cast<std::size_t>(polarity)];
}

std::size_t PairStatistics::total(Split split) const {
  std::size_t n = 0;
  for (const auto& lesion : counts_[static_cast<std::size_t>(split)]) {
    for (const auto& type : lesion) n += type[0] + type[1];
  }
  return n;
}

json PairStatistics::to_json() const {
  json out = json::object();
  for (auto split : {Split::Train, Split::Validation, Split::Test}) {
    json per = json::object();
    for (auto lesion : kAllLesions) {
      json row = json::object();
      for (auto type : {TemplateType::Basic, TemplateType::Global, TemplateType::LesionInference}) {
        row[std::string(to_string(type))] = {
            {"positive", count(split, lesion, type, Polarity::Positive)},
            {"negative", count(split, lesion, type, Polarity::Negative)}};
      }
      per[std::string(to_string(lesion))] = row;
    }
    out[std::string(to_string(split))] = {{"lesions", per}, {"total", total(split)}};
  }
  return out;
}

std::string PairStatistics::to_text() const {
  std::ostringstream os;
  const auto types = {TemplateType::Basic, TemplateType::Global, TemplateType::LesionInference};
  for (auto split : {Split::Train, Split::Validation, Split::Test}) {
    os << "[" << to_string(split) << "]\n";
    os << std::left << std::setw(15) << "lesion" << std::right;
    for (auto type : types) {
      os << std::setw(18) << (std::string(to_string(type)) + "+") << std::setw(18)
         << (std::string(to_string(type)) + "-");
    }
    os << std::setw(8) << "total" << "\n";
    std::array<std::size_t, 6> column{};
    for (auto lesion : kAllLesions) {
      os << std::left << std::setw(15) << to_string(lesion) << std::right;
      std::size_t row = 0;
      std::size_t k = 0;
      for (auto type : types) {
        for (auto pol : {Polarity::Positive, Polarity::Negative}) {
          const auto n = count(split, lesion, type, pol);
          os << std::setw(18) << n;
          column[k++] += n;
          row += n;
        }
      }
      os << std::setw(8) << row << "\n";
    }
    os << std::left << std::setw(15) << "total" << std::right;
    for (auto n : column) os << std::setw(18) << n;
    os << std::setw(8) << total(split) << "\n\n";
  }
  return os.str();
}

}  // namespace cxrils
