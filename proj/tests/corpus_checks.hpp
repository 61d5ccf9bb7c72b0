// Checks over a synthetic corpus and the dataset built from it. Pair rules are
// verified with their own regex re-parser rather than the template bank.
#pragma once

#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "cxrils/json_io.hpp"
#include "cxrils/png_io.hpp"
#include "cxrils/raster_ops.hpp"
#include "cxrils/synth.hpp"
#include "cxrils/util.hpp"

namespace testing_support {

/// IoU of every oracle lesion against the mask the pipeline committed for the
/// same lesion type; 0 when the study or lesion was not grounded.
inline std::vector<double> lesion_ious(const cxrils::Corpus& corpus,
                                       const std::filesystem::path& out_dir) {
  using namespace cxrils;
  std::vector<double> out;
  for (const auto& s : corpus.studies) {
    std::map<std::string, std::string> refs;
    const auto commit_path = out_dir / "studies" / (s.record.study_id + ".json");
    if (std::filesystem::exists(commit_path)) {
      const auto c = json::parse(read_text_file(commit_path));
      if (c.contains("lesions")) {
        for (const auto& l : c.at("lesions")) {
          refs[l.at("lesion").get<std::string>()] = l.at("mask_ref").get<std::string>();
        }
      }
    }
    for (const auto& l : s.truth.lesions) {
      auto it = refs.find(std::string(to_string(l.lesion)));
      if (it == refs.end()) {
        out.push_back(0.0);
        continue;
      }
      out.push_back(iou(read_png_mask(out_dir / it->second), l.mask));
    }
  }
  return out;
}

struct ReparsedPair {
  std::string type;  // basic | global | lesion_inference
  std::string polarity;
  std::optional<std::string> target;
  std::optional<std::string> lesion;
  std::optional<std::string> certainty;
  std::set<std::string> locations;
};

inline std::optional<std::set<std::string>> split_locations(const std::string& phrase) {
  std::set<std::string> names;
  for (auto l : cxrils::kAllLabels) names.insert(std::string(cxrils::to_string(l)));
  std::set<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = phrase.find(" and ", start);
    const auto part = phrase.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!names.count(part) || !out.insert(part).second) return std::nullopt;
    if (pos == std::string::npos) break;
    start = pos + 5;
  }
  return out;
}

inline std::optional<ReparsedPair> reparse(const std::string& instruction, const std::string& answer) {
  static const std::regex ins_inference(R"(^Segment the opacity in the (.+) and predict its type\.$)");
  static const std::regex ins_basic(R"(^Segment the ([a-z]+) in the (.+)\.$)");
  static const std::regex ins_global(R"(^Segment the ([a-z]+)\.$)");
  static const std::regex ans_no_in(R"(^\[SEG\] There is no ([a-z]+) in the (.+)\.$)");
  static const std::regex ans_no(R"(^\[SEG\] There is no ([a-z]+)\.$)");
  static const std::regex ans_located(R"(^\[SEG\] It is located in the (.+)\.$)");
  static const std::regex ans_suggestive(R"(^\[SEG\] It is highly suggestive of ([a-z]+)\.$)");
  static const std::regex ans_possibly(R"(^\[SEG\] It possibly reflects ([a-z]+)\.$)");
  std::smatch m, a;
  ReparsedPair r;
  if (std::regex_match(instruction, m, ins_inference)) {
    r.type = "lesion_inference";
    auto loc = split_locations(m[1]);
    if (!loc) return std::nullopt;
    r.locations = *loc;
    if (std::regex_match(answer, a, ans_suggestive)) {
      r.polarity = "positive";
      r.lesion = a[1];
      r.certainty = "definitive";
    } else if (std::regex_match(answer, a, ans_possibly)) {
      r.polarity = "positive";
      r.lesion = a[1];
      r.certainty = "tentative";
    } else if (std::regex_match(answer, a, ans_no_in) && a[1] == "opacity") {
      r.polarity = "negative";
      auto aloc = split_locations(a[2]);
      if (!aloc || *aloc != r.locations) return std::nullopt;
    } else {
      return std::nullopt;
    }
    return r;
  }
  if (std::regex_match(instruction, m, ins_basic)) {
    r.type = "basic";
    r.target = m[1];
    auto loc = split_locations(m[2]);
    if (!loc) return std::nullopt;
    r.locations = *loc;
    if (answer == "[SEG]") {
      r.polarity = "positive";
    } else if (std::regex_match(answer, a, ans_no_in) && a[1] == m[1].str()) {
      auto aloc = split_locations(a[2]);
      if (!aloc || *aloc != r.locations) return std::nullopt;
      r.polarity = "negative";
    } else {
      return std::nullopt;
    }
    return r;
  }
  if (std::regex_match(instruction, m, ins_global)) {
    r.type = "global";
    r.target = m[1];
    if (answer == "[SEG]" && m[1] == "cardiomegaly") {
      r.polarity = "positive";
    } else if (std::regex_match(answer, a, ans_located)) {
      auto loc = split_locations(a[1]);
      if (!loc) return std::nullopt;
      r.locations = *loc;
      r.polarity = "positive";
    } else if (std::regex_match(answer, a, ans_no) && a[1] == m[1].str()) {
      r.polarity = "negative";
    } else {
      return std::nullopt;
    }
    return r;
  }
  return std::nullopt;
}

inline std::set<std::string> label_names(const cxrils::json& j) {
  std::set<std::string> out;
  for (const auto& x : j) out.insert(x.get<std::string>());
  return out;
}

/// Rule violations in `out_dir/pairs.jsonl`, one message each.
inline std::vector<std::string> pair_rule_violations(const std::filesystem::path& out_dir,
                                                     double ctr_max = 0.45) {
  using namespace cxrils;
  std::vector<std::string> bad;
  std::map<std::string, json> commits;
  for (const auto& e : std::filesystem::directory_iterator(out_dir / "studies")) {
    if (e.path().extension() != ".json") continue;
    auto c = json::parse(read_text_file(e.path()));
    commits[c.at("study_id").get<std::string>()] = c;
  }
  std::map<std::pair<std::string, std::string>, int> negatives;
  for (const auto& p : read_jsonl_file(out_dir / "pairs.jsonl")) {
    const auto id = p.at("pair_id").get<std::string>();
    const auto study = p.at("study_id").get<std::string>();
    const auto lesion = p.at("lesion").get<std::string>();
    const auto type = p.at("template_type").get<std::string>();
    const auto polarity = p.at("polarity").get<std::string>();
    const auto r = reparse(p.at("instruction").get<std::string>(), p.at("answer_text").get<std::string>());
    if (!r) {
      bad.push_back(id + ": does not re-parse");
      continue;
    }
    if (r->type != type || r->polarity != polarity) bad.push_back(id + ": type or polarity mismatch");
    if (r->target && *r->target != p.at("target").get<std::string>()) bad.push_back(id + ": target mismatch");
    if (r->lesion && *r->lesion != lesion) bad.push_back(id + ": inferred lesion mismatch");
    if (r->certainty && p.at("certainty") != *r->certainty) bad.push_back(id + ": certainty mismatch");
    if (!(type == "global" && polarity == "negative") && lesion != "cardiomegaly" &&
        r->locations != label_names(p.at("locations"))) {
      bad.push_back(id + ": locations mismatch");
    }
    if ((polarity == "negative") != p.at("mask_ref").is_null()) bad.push_back(id + ": mask_ref vs polarity");
    if (lesion == "cardiomegaly" && type != "global") bad.push_back(id + ": cardiomegaly outside global");

    auto cit = commits.find(study);
    if (cit == commits.end() || cit->second.at("status") != "ok") {
      bad.push_back(id + ": pair for an ungrounded study");
      continue;
    }
    const auto& c = cit->second;
    if (polarity == "negative") {
      if (++negatives[{study, lesion}] > 1) bad.push_back(id + ": second negative for " + lesion);
      if (lesion == "cardiomegaly" && (c.at("ctr").is_null() || c.at("ctr").get<double>() > ctr_max)) {
        bad.push_back(id + ": cardiomegaly negative with ctr above limit");
      }
    }
    if (type == "global" && polarity == "positive" && lesion != "cardiomegaly") {
      bool ok = false;
      for (const auto& l : c.at("lesions")) {
        if (l.at("lesion") != lesion) continue;
        ok = label_names(l.at("grounded_locations")) == label_names(l.at("reported_locations")) &&
             label_names(l.at("grounded_locations")) == r->locations;
      }
      if (!ok) bad.push_back(id + ": global positive with grounded != reported");
    }
    if (type == "basic" && r->target) {
      for (const auto& l : c.at("lesions")) {
        const auto name = l.at("lesion").get<std::string>();
        if (l.at("certainty") == "tentative" && name != "opacity" && *r->target == name) {
          bad.push_back(id + ": tentative " + name + " named in a basic instruction");
        }
      }
    }
  }
  return bad;
}

}  // namespace testing_support
