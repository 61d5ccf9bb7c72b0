#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cxrils/core.hpp"
#include "cxrils/json_io.hpp"

namespace cxrils {

/// Pairs sharing a study, mask, target, location set and polarity are
/// reviewed together as one sample.
struct ReviewSample {
  std::string sample_id;
  std::string study_id;
  LesionType lesion = LesionType::Opacity;
  LesionType target = LesionType::Opacity;
  Polarity polarity = Polarity::Positive;
  LabelSet locations;
  std::optional<std::string> mask_ref;
  std::vector<InstructionAnswerPair> pairs;
};

/// Samples in order of first appearance.
std::vector<ReviewSample> group_samples(const std::vector<InstructionAnswerPair>& pairs);

/// expert id -> ordered sample ids
using Worklists = std::map<std::string, std::vector<std::string>>;

/// Every positive goes to every expert; negatives are shuffled with `seed`
/// and dealt round-robin. Lists keep the samples' input order.
Worklists assign_samples(const std::vector<ReviewSample>& samples,
                         const std::vector<std::string>& experts, std::uint64_t seed);

enum class Decision : std::uint8_t { Acceptable, NotAcceptable };
std::string_view to_string(Decision d);
Decision parse_decision(std::string_view s);

struct Verdict {
  std::string expert_id;
  std::string sample_id;
  Decision decision = Decision::Acceptable;
  std::int64_t timestamp_ms = 0;
};

/// Append-only verdict log; the latest verdict per (expert, sample) wins.
class VerdictStore {
 public:
  using Key = std::pair<std::string, std::string>;  // (expert, sample)

  VerdictStore() = default;
  /// Replays `log` when it exists; later submissions are appended to it.
  explicit VerdictStore(std::filesystem::path log);

  void submit(Verdict v);
  std::optional<Verdict> get(const std::string& expert, const std::string& sample) const;
  std::map<Key, Verdict> snapshot() const;

 private:
  std::filesystem::path log_;
  mutable std::mutex mutex_;
  std::map<Key, Verdict> latest_;
};

struct RateCell {
  std::size_t accepted = 0;
  std::size_t reviewed = 0;
  void add(bool ok) {
    ++reviewed;
    accepted += ok ? 1 : 0;
  }
  std::optional<double> rate() const {
    if (reviewed == 0) return std::nullopt;
    return static_cast<double>(accepted) / static_cast<double>(reviewed);
  }
};

struct RateRow {
  RateCell total;
  RateCell positive;
  RateCell negative;
  void add(Polarity p, bool ok) {
    total.add(ok);
    (p == Polarity::Positive ? positive : negative).add(ok);
  }
};

struct ReviewReport {
  std::map<std::string, RateRow> per_expert;
  /// A sample counts once it is rejected by any assigned expert or accepted
  /// by all of them.
  RateRow overall;
  std::map<LesionType, RateRow> per_lesion;
  std::vector<std::string> excluded;
  /// Samples still missing verdicts and not yet rejected.
  std::vector<std::string> pending;

  json to_json() const;
  std::string to_text() const;
};

struct ExportResult {
  std::vector<InstructionAnswerPair> kept;
  ReviewReport report;
};

ExportResult export_filtered(const std::vector<ReviewSample>& samples, const Worklists& worklists,
                             const std::map<VerdictStore::Key, Verdict>& verdicts);

}  // namespace cxrils
