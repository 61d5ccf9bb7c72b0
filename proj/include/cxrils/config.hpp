#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cxrils/grounding.hpp"
#include "cxrils/pairgen.hpp"
#include "cxrils/qc.hpp"

namespace cxrils {

struct PipelineConfig {
  GroundingConfig grounding;
  QcConfig qc;
  std::uint64_t negative_seed = 0;

  NegativeConfig negatives() const { return {qc.ctr_negative_max, negative_seed}; }
  bool operator==(const PipelineConfig&) const = default;
};

/// Reads INI text on top of `base`. Sections: [thresholds.general],
/// [thresholds.edema], [thresholds.<lesion>], [refine], [qc], [negatives].
PipelineConfig parse_config(std::string_view ini, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
std::string dump_config(const PipelineConfig& cfg);
/// Stable hash of the dumped configuration.
std::string config_digest(const PipelineConfig& cfg);

struct SelfTestResult {
  bool ok = true;
  std::vector<std::string> lines;
};

/// Checks the shipped defaults against their reference values.
SelfTestResult config_self_test();

}  // namespace cxrils
