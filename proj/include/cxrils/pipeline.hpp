#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cxrils/config.hpp"
#include "cxrils/json_io.hpp"
#include "cxrils/pairgen.hpp"
#include "cxrils/report.hpp"
#include "cxrils/study.hpp"

namespace cxrils {

enum class Stage { Ground, Pairs, All };

struct RunOptions {
  PipelineConfig config;
  int parallelism = 1;
  Stage stage = Stage::All;
  LocationLexicon lexicon = LocationLexicon::builtin();
};

struct RunSummary {
  std::size_t studies = 0;
  std::size_t grounded = 0;
  std::size_t qc_excluded = 0;
  std::size_t quarantined = 0;
  /// Studies whose commit record from an earlier run was reused.
  std::size_t reused = 0;
  std::size_t pairs = 0;
  PairStatistics stats;
};

/// QC and grounding for one study. Writes lesion masks under
/// `out_dir/masks/<id>/` and returns the study's commit record. Throws
/// DataError when the study cannot be processed.
json ground_one(const StudyRecord& record, const PipelineConfig& cfg,
                const std::filesystem::path& out_dir,
                const LocationLexicon& lexicon = LocationLexicon::builtin());

/// Pairs for a committed study; empty for QC-excluded studies.
std::vector<InstructionAnswerPair> pairs_from_commit(const json& commit, Split split,
                                                     const NegativeConfig& cfg);

/// Runs the requested stages over every manifest study. Output layout under
/// `out_dir`:
///   studies/<id>.json   per-study commit record (resume point)
///   masks/<id>/*.png    grounded lesion masks
///   grounding.jsonl     one record per finding
///   qc_report.json      per-study QC results
///   quarantine.jsonl    studies that failed with an error
///   pairs.jsonl         instruction-answer pairs
///   stats.json, stats.txt
/// Throws DataError when the manifest cannot be read.
RunSummary run_pipeline(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                        const RunOptions& opts);

/// Runs `fn(i)` for i in [0, n) on up to `parallelism` threads. The first
/// exception thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace cxrils
