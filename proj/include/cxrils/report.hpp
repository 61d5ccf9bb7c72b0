#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxrils/core.hpp"

namespace cxrils {

/// Maps lowercased location phrases to anatomical label sets.
class LocationLexicon {
 public:
  LocationLexicon() = default;

  /// The shipped table.
  static const LocationLexicon& builtin();
  /// `phrase<TAB>label[,label...]` per line; blank lines and '#' comments skipped.
  static LocationLexicon parse_tsv(std::string_view text);
  static LocationLexicon load(const std::filesystem::path& path);

  void add(std::string_view phrase, LabelSet labels);
  std::optional<LabelSet> lookup(std::string_view phrase) const;
  const std::map<std::string, LabelSet>& entries() const { return entries_; }
  std::string to_tsv() const;

  bool operator==(const LocationLexicon&) const = default;

 private:
  std::map<std::string, LabelSet> entries_;
};

struct LocationMapping {
  LabelSet labels;
  std::vector<std::string> unknown;
};

/// Union of the lexicon entries of every phrase. A phrase missing from the
/// lexicon is split on " and " / "," and its parts are looked up instead.
LocationMapping map_locations(const std::vector<std::string>& phrases,
                              const LocationLexicon& lexicon = LocationLexicon::builtin());

struct StructuredReport {
  std::vector<StructuredFinding> findings;
  /// Location phrases that did not resolve; findings left without any label
  /// are dropped.
  std::vector<std::string> unknown_phrases;
};

/// Rule-based structurer for the constrained report grammar. Sentences are
/// split on '.', numbered from 1, and each one either states a finding, a
/// negation or a normal result. Anything else throws DataError.
StructuredReport structure_report(std::string_view report,
                                  const LocationLexicon& lexicon = LocationLexicon::builtin());

std::vector<StructuredFinding> load_external_findings(const std::filesystem::path& path);

}  // namespace cxrils
