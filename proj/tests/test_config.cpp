#include <gtest/gtest.h>

#include "cxrils/config.hpp"

using namespace cxrils;

TEST(Config, DefaultsMatchReference) {
  const PipelineConfig cfg;
  EXPECT_EQ(cfg.grounding.general, (ThresholdSet{0.10, 0.25, 0.20, 0.20, 0.10}));
  EXPECT_EQ(cfg.grounding.edema, (ThresholdSet{0.01, 0.25, 0.01, 0.20, 0.10}));
  EXPECT_EQ(cfg.qc.ctr_negative_max, 0.45);
  auto r = config_self_test();
  EXPECT_TRUE(r.ok);
  for (const auto& line : r.lines) EXPECT_EQ(line.rfind("PASS", 0), 0u) << line;
}

TEST(Config, ParseOverridesDefaults) {
  auto cfg = parse_config(R"(
[thresholds.general]
tau_conf = 0.35

[thresholds.pneumonia]
tau_size = 0.05

[refine]
noise_iterations = 2

[qc]
rel_tol = 0.1

[negatives]
seed = 42
)");
  EXPECT_EQ(cfg.grounding.general.tau_conf, 0.35);
  EXPECT_EQ(cfg.grounding.general.tau_ano, 0.10);
  EXPECT_EQ(cfg.grounding.thresholds_for(LesionType::Pneumonia).tau_size, 0.05);
  EXPECT_EQ(cfg.grounding.thresholds_for(LesionType::Pneumonia).tau_conf, 0.35);
  EXPECT_EQ(cfg.grounding.thresholds_for(LesionType::Atelectasis).tau_size, 0.10);
  EXPECT_EQ(cfg.grounding.refine.noise_iterations, 2);
  EXPECT_EQ(cfg.qc.rel_tol, 0.1);
  EXPECT_EQ(cfg.negative_seed, 42u);
  EXPECT_EQ(parse_config(dump_config(cfg)), cfg);
  EXPECT_NE(config_digest(cfg), config_digest(PipelineConfig{}));
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(parse_config("[thresholds.general]\ntau_x = 0.1\n"), DataError);
  EXPECT_THROW(parse_config("[bogus]\na = 1\n"), DataError);
  EXPECT_THROW(parse_config("[thresholds.tumor]\ntau_ano = 0.1\n"), DataError);
  EXPECT_THROW(parse_config("[thresholds.general]\ntau_ano = 1.5\n"), DataError);
  EXPECT_THROW(parse_config("[thresholds.general]\ntau_ano = abc\n"), DataError);
  EXPECT_THROW(parse_config("[refine]\nmax_rounds = -1\n"), DataError);
  EXPECT_THROW(parse_config("stray = 1\n"), DataError);
  EXPECT_THROW(load_config("/nonexistent/cxrils.ini"), DataError);
}
