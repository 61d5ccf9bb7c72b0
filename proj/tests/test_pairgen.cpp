#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "cxrils/pairgen.hpp"
#include "cxrils/templates.hpp"

using namespace cxrils;
using L = AnatomicalLabel;

namespace {

GroundedLesion lesion(LesionType l, Certainty c, LabelSet grounded, LabelSet reported) {
  GroundedLesion g;
  g.lesion = l;
  g.certainty = c;
  g.grounded_locations = grounded;
  g.reported_locations = reported;
  return g;
}

const LabelSet kBases{L::RightLungBase, L::LeftLungBase};

/// Independent check that a pair re-parses to what it claims.
void expect_reparses(const InstructionAnswerPair& p) {
  const auto& bank = TemplateBank::standard();
  auto ins = bank.parse_instruction(p.instruction);
  ASSERT_TRUE(ins) << p.instruction;
  EXPECT_EQ(ins->type, p.template_type);
  auto ans = bank.parse_answer(p.template_type, p.answer_text);
  ASSERT_TRUE(ans) << p.answer_text;
  EXPECT_EQ(polarity_of(ans->variant), p.polarity);
  if (p.template_type == TemplateType::LesionInference) {
    EXPECT_EQ(ins->vars.locations, p.locations);
  } else {
    EXPECT_EQ(ins->vars.target, p.target);
  }
  if (p.template_type == TemplateType::Basic) EXPECT_EQ(ins->vars.locations, p.locations);
  EXPECT_EQ(p.polarity == Polarity::Negative, !p.mask_ref.has_value());
}

}  // namespace

TEST(Templates, LocationPhrase) {
  EXPECT_EQ(location_phrase(kBases), "right lung base and left lung base");
  EXPECT_EQ(parse_location_phrase("left lung base and right lung base"), kBases);
  EXPECT_FALSE(parse_location_phrase("left lung base and left lung base"));
  EXPECT_FALSE(parse_location_phrase("middle lobe"));
}

TEST(Templates, RenderParseRoundTripAllVariants) {
  const auto& bank = TemplateBank::standard();
  std::mt19937_64 rng(4);
  const AnswerVariant variants[] = {
      AnswerVariant::BasicPositive,       AnswerVariant::BasicNegative,
      AnswerVariant::GlobalPositive,      AnswerVariant::GlobalOrgan,
      AnswerVariant::GlobalNegative,      AnswerVariant::InferenceDefinitive,
      AnswerVariant::InferenceTentative,  AnswerVariant::InferenceNegative};
  for (int i = 0; i < 500; ++i) {
    LabelSet loc = LabelSet::from_raw(static_cast<unsigned>(rng() % 1023) + 1);
    auto target = kAllLesions[rng() % kLesionCount];
    auto les = kAllLesions[rng() % kLesionCount];
    for (auto v : variants) {
      const auto type = template_type_of(v);
      TemplateVars vars{target, loc, les};
      auto text = bank.render_answer(v, vars);
      auto parsed = bank.parse_answer(type, text);
      ASSERT_TRUE(parsed) << text;
      EXPECT_EQ(parsed->variant, v) << text;
      auto again = bank.render_answer(parsed->variant, parsed->vars);
      EXPECT_EQ(again, text);
      TemplateVars ivars{target, loc, std::nullopt};
      auto ins = bank.render_instruction(type, ivars);
      auto pi = bank.parse_instruction(ins);
      ASSERT_TRUE(pi) << ins;
      EXPECT_EQ(pi->type, type);
    }
  }
}

TEST(Templates, RejectsNearMisses) {
  const auto& bank = TemplateBank::standard();
  EXPECT_FALSE(bank.parse_instruction("Segment the pneumonia in the hilum."));
  EXPECT_FALSE(bank.parse_instruction("segment the pneumonia."));
  EXPECT_FALSE(bank.parse_answer(TemplateType::Basic, "[SEG] There is no tumor in the left lung."));
  EXPECT_FALSE(bank.parse_answer(TemplateType::LesionInference, "[SEG] It is highly suggestive of effusions."));
}

TEST(Pairgen, BasicWorkedExample) {
  auto g = lesion(LesionType::Pneumonia, Certainty::Definitive, kBases, kBases);
  auto ps = gen_basic(g);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].instruction, "Segment the pneumonia in the right lung base and left lung base.");
  EXPECT_EQ(ps[0].answer_text, "[SEG]");
  g.certainty = Certainty::Tentative;
  ps = gen_basic(g);
  EXPECT_EQ(ps[0].instruction, "Segment the opacity in the right lung base and left lung base.");
  EXPECT_EQ(ps[0].target, LesionType::Opacity);
  EXPECT_EQ(ps[0].lesion, LesionType::Pneumonia);
  EXPECT_TRUE(gen_basic(lesion(LesionType::Cardiomegaly, Certainty::Definitive, {}, {})).empty());
}

TEST(Pairgen, GlobalGate) {
  LabelSet left{L::LeftLung};
  auto ps = gen_global(lesion(LesionType::Effusion, Certainty::Definitive, left, left));
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].instruction, "Segment the effusion.");
  EXPECT_EQ(ps[0].answer_text, "[SEG] It is located in the left lung.");
  EXPECT_TRUE(gen_global(lesion(LesionType::Effusion, Certainty::Definitive,
                                LabelSet{L::LeftLungBase}, kBases))
                  .empty());
  EXPECT_TRUE(gen_global(lesion(LesionType::Effusion, Certainty::Definitive, left, left), {}, false)
                  .empty());
  auto cm = gen_global(lesion(LesionType::Cardiomegaly, Certainty::Definitive, {}, {}),
                       {"s", Split::Train, "m.png"}, false);
  ASSERT_EQ(cm.size(), 1u);
  EXPECT_EQ(cm[0].instruction, "Segment the cardiomegaly.");
  EXPECT_EQ(cm[0].answer_text, "[SEG]");
  expect_reparses(cm[0]);
}

TEST(Pairgen, LesionInference) {
  LabelSet llb{L::LeftLungBase};
  auto a = gen_lesion_inference(lesion(LesionType::Atelectasis, Certainty::Definitive, llb, llb));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].instruction, "Segment the opacity in the left lung base and predict its type.");
  EXPECT_EQ(a[0].answer_text, "[SEG] It is highly suggestive of atelectasis.");
  auto e = gen_lesion_inference(lesion(LesionType::Edema, Certainty::Tentative, llb, llb));
  EXPECT_EQ(e[0].answer_text, "[SEG] It possibly reflects edema.");
  EXPECT_TRUE(gen_lesion_inference(lesion(LesionType::Effusion, Certainty::Definitive, llb, llb)).empty());
}

TEST(Pairgen, NegativesForAbsentLesion) {
  PairContext ctx{"s1", Split::Test, std::nullopt};
  std::map<std::string, int> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto ps = gen_negatives({}, {}, LabelSet{}, 0.40, {0.45, seed}, ctx);
    std::map<LesionType, int> per;
    for (const auto& p : ps) {
      ++per[p.lesion];
      EXPECT_EQ(p.polarity, Polarity::Negative);
      expect_reparses(p);
      if (p.lesion == LesionType::Pneumonia) ++seen[std::string(to_string(p.template_type))];
    }
    EXPECT_EQ(per.size(), kLesionCount);
    for (auto [l, n] : per) EXPECT_EQ(n, 1) << to_string(l);
  }
  EXPECT_GT(seen["basic"], 0);
  EXPECT_GT(seen["global"], 0);
}

TEST(Pairgen, CardiomegalyNegativeNeedsSmallCtr) {
  auto count_cm = [](std::optional<double> ctr) {
    int n = 0;
    for (const auto& p : gen_negatives({}, {}, {}, ctr, {}, {"s", Split::Train, {}})) {
      n += p.lesion == LesionType::Cardiomegaly;
    }
    return n;
  };
  EXPECT_EQ(count_cm(0.45), 1);
  EXPECT_EQ(count_cm(0.52), 0);
  EXPECT_EQ(count_cm(std::nullopt), 0);
}

TEST(Pairgen, PresentLesionNegativeUsesEmptyLocation) {
  StructuredFinding f{"atelectasis", 1, Presence::Positive, Certainty::Definitive,
                      LabelSet{L::RightLungBase}, std::nullopt};
  auto g = lesion(LesionType::Atelectasis, Certainty::Definitive, LabelSet{L::RightLungBase},
                  LabelSet{L::RightLungBase});
  LabelSet empty{L::RightApicalZone, L::LeftApicalZone};
  auto ps = gen_negatives({f}, {g}, empty, std::nullopt, {}, {"s", Split::Train, {}});
  int atel = 0;
  for (const auto& p : ps) {
    if (p.lesion != LesionType::Atelectasis) continue;
    ++atel;
    EXPECT_EQ(p.template_type, TemplateType::Basic);
    EXPECT_TRUE(p.locations.subset_of(empty));
    EXPECT_EQ(p.locations.size(), 1u);
  }
  EXPECT_EQ(atel, 1);
  // Tentative lesions get none.
  f.certainty = g.certainty = Certainty::Tentative;
  for (const auto& p : gen_negatives({f}, {g}, empty, std::nullopt, {}, {"s", Split::Train, {}})) {
    EXPECT_NE(p.lesion, LesionType::Atelectasis);
  }
}

TEST(Pairgen, StudyPairsDeterministicAndCapped) {
  StudyPairInput in;
  in.study_id = "abc";
  in.split = Split::Test;
  in.findings = {{"opacity", 1, Presence::Positive, Certainty::Tentative, kBases, LesionType::Pneumonia},
                 {"cardiomegaly", 2, Presence::Positive, Certainty::Definitive, {}, std::nullopt},
                 {"effusion", 3, Presence::Negative, Certainty::Definitive, {}, std::nullopt}};
  in.lesions = {lesion(LesionType::Pneumonia, Certainty::Tentative, kBases, kBases),
                lesion(LesionType::Cardiomegaly, Certainty::Definitive, {}, {})};
  in.mask_refs = {"m/0.png", "m/1.png"};
  in.empty_locations = LabelSet{L::RightApicalZone};
  in.ctr = 0.55;
  auto a = generate_study_pairs(in, {0.45, 9});
  auto b = generate_study_pairs(in, {0.45, 9});
  EXPECT_EQ(a, b);
  std::map<LesionType, int> neg;
  for (const auto& p : a) {
    expect_reparses(p);
    if (p.polarity == Polarity::Negative) ++neg[p.lesion];
    if (p.lesion == LesionType::Cardiomegaly) EXPECT_EQ(p.template_type, TemplateType::Global);
    if (p.template_type == TemplateType::Basic && p.lesion == LesionType::Pneumonia) {
      EXPECT_EQ(p.instruction.find("pneumonia"), std::string::npos);
    }
  }
  for (auto [l, n] : neg) EXPECT_LE(n, 1);
  EXPECT_EQ(neg.count(LesionType::Cardiomegaly), 0u);
  std::set<std::string> ids;
  for (const auto& p : a) EXPECT_TRUE(ids.insert(p.pair_id).second);
}

TEST(Pairgen, StatisticsTable) {
  PairStatistics s;
  InstructionAnswerPair p;
  p.split = Split::Validation;
  p.lesion = LesionType::Edema;
  p.template_type = TemplateType::Global;
  p.polarity = Polarity::Negative;
  s.add(p);
  s.add(p);
  EXPECT_EQ(s.count(Split::Validation, LesionType::Edema, TemplateType::Global, Polarity::Negative), 2u);
  EXPECT_EQ(s.total(Split::Validation), 2u);
  EXPECT_EQ(s.total(Split::Train), 0u);
  EXPECT_NE(s.to_text().find("[validation]"), std::string::npos);
}
