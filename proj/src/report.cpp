#include "cxrils/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "cxrils/json_io.hpp"
#include "cxrils/util.hpp"

namespace cxrils {

namespace {

constexpr std::string_view kBuiltinLexicon = R"(# phrase	labels
right lung	right lung
right apical zone	right apical zone
right upper zone lung	right upper zone lung
right mid zone lung	right mid zone lung
right lung base	right lung base
left lung	left lung
left apical zone	left apical zone
left upper zone lung	left upper zone lung
left mid zone lung	left mid zone lung
left lung base	left lung base
bibasilar	right lung base,left lung base
bibasal	right lung base,left lung base
lower lung	right lung base,left lung base
lower lungs	right lung base,left lung base
lung bases	right lung base,left lung base
bases	right lung base,left lung base
both bases	right lung base,left lung base
lower lobes	right lung base,left lung base
right lower lobe	right lung base
left lower lobe	left lung base
right lower lung	right lung base
left lower lung	left lung base
right base	right lung base
left base	left lung base
retrocardiac	left lung base
upper lobes	right upper zone lung,left upper zone lung
upper lungs	right upper zone lung,left upper zone lung
right upper lobe	right upper zone lung
left upper lobe	left upper zone lung
right upper lung	right upper zone lung
left upper lung	left upper zone lung
apices	right apical zone,left apical zone
apical	right apical zone,left apical zone
right apex	right apical zone
left apex	left apical zone
right lung apex	right apical zone
left lung apex	left apical zone
mid lungs	right mid zone lung,left mid zone lung
right middle lobe	right mid zone lung
right mid lung	right mid zone lung
left mid lung	left mid zone lung
lingula	left mid zone lung
lingular	left mid zone lung
bilateral	right lung,left lung
both lungs	right lung,left lung
bilateral lungs	right lung,left lung
)";

struct LesionPhrase {
  std::string_view phrase;
  LesionType lesion;
};

// Longest phrases first so suffix matching prefers "pleural effusion".
constexpr std::array<LesionPhrase, 17> kLesionPhrases = {{
    {"pleural effusions", LesionType::Effusion},
    {"pleural effusion", LesionType::Effusion},
    {"pulmonary edema", LesionType::Edema},
    {"consolidations", LesionType::Consolidation},
    {"consolidation", LesionType::Consolidation},
    {"cardiomegaly", LesionType::Cardiomegaly},
    {"atelectases", LesionType::Atelectasis},
    {"atelectasis", LesionType::Atelectasis},
    {"pneumonias", LesionType::Pneumonia},
    {"pneumonia", LesionType::Pneumonia},
    {"opacities", LesionType::Opacity},
    {"effusions", LesionType::Effusion},
    {"effusion", LesionType::Effusion},
    {"opacity", LesionType::Opacity},
    {"oedema", LesionType::Edema},
    {"edema", LesionType::Edema},
    {"heart enlargement", LesionType::Cardiomegaly},
}};

constexpr std::array<std::string_view, 5> kNormalSentences = {
    "no acute findings",
    "no acute cardiopulmonary process",
    "no acute cardiopulmonary abnormality",
    "normal chest radiograph",
    "the lungs are clear",
};

constexpr std::array<std::string_view, 3> kSeverities = {"mild", "moderate", "severe"};

struct Link {
  std::string_view text;
  Certainty certainty;
};

constexpr std::array<Link, 6> kOpacityLinks = {{
    {"is possibly ", Certainty::Tentative},
    {"is suggestive of ", Certainty::Tentative},
    {"may represent ", Certainty::Tentative},
    {"suggestive of ", Certainty::Tentative},
    {"represents ", Certainty::Definitive},
    {"is ", Certainty::Definitive},
}};

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

bool strip_prefix(std::string_view& s, std::string_view p) {
  if (!starts_with(s, p)) return false;
  s.remove_prefix(p.size());
  return true;
}

std::optional<LesionType> exact_lesion(std::string_view s) {
  for (const auto& lp : kLesionPhrases) {
    if (s == lp.phrase) return lp.lesion;
  }
  return std::nullopt;
}

/// Splits "<loc> <lesion phrase>" on the longest lesion suffix.
std::optional<std::pair<std::string, LesionType>> split_lesion_suffix(std::string_view s) {
  for (const auto& lp : kLesionPhrases) {
    if (s.size() < lp.phrase.size()) continue;
    if (s.substr(s.size() - lp.phrase.size()) != lp.phrase) continue;
    auto head = s.substr(0, s.size() - lp.phrase.size());
    if (!head.empty() && head.back() != ' ') continue;
    return std::make_pair(trim(head), lp.lesion);
  }
  return std::nullopt;
}

struct Parsed {
  bool normal = false;
  LesionType lesion = LesionType::Opacity;
  std::string entity;
  Presence presence = Presence::Positive;
  Certainty certainty = Certainty::Definitive;
  std::string location;
  std::optional<LesionType> predicted;
};

std::optional<Parsed> parse_sentence(std::string_view s) {
  Parsed out;
  for (auto n : kNormalSentences) {
    if (s == n) {
      out.normal = true;
      return out;
    }
  }

  std::string_view rest = s;
  if (strip_prefix(rest, "no evidence of ") || strip_prefix(rest, "no ")) {
    auto lesion = exact_lesion(rest);
    if (!lesion) return std::nullopt;
    out.lesion = *lesion;
    out.entity = std::string(to_string(*lesion));
    out.presence = Presence::Negative;
    return out;
  }

  // "The <loc> opacity <link> <lesion>"
  if (starts_with(s, "the ")) {
    std::string_view body = s.substr(4);
    for (std::string_view noun : {" opacity ", " opacities "}) {
      auto pos = body.find(noun);
      if (pos == std::string_view::npos) continue;
      std::string_view tail = body.substr(pos + noun.size());
      for (const auto& link : kOpacityLinks) {
        std::string_view t = tail;
        if (!strip_prefix(t, link.text)) continue;
        auto lesion = exact_lesion(t);
        if (!lesion) continue;
        out.lesion = LesionType::Opacity;
        out.entity = "opacity";
        out.certainty = link.certainty;
        out.location = trim(body.substr(0, pos));
        out.predicted = *lesion;
        return out;
      }
    }
    return std::nullopt;
  }

  if (strip_prefix(rest, "possibly ") || strip_prefix(rest, "possible ")) {
    out.certainty = Certainty::Tentative;
  }

  // "<lesion> in the <loc>"
  if (auto pos = rest.find(" in the "); pos != std::string_view::npos) {
    if (auto lesion = exact_lesion(rest.substr(0, pos))) {
      out.lesion = *lesion;
      out.entity = std::string(to_string(*lesion));
      out.location = trim(rest.substr(pos + 8));
      return out;
    }
  }

  // "<loc> <lesion>"
  auto suffix = split_lesion_suffix(rest);
  if (!suffix) return std::nullopt;
  out.lesion = suffix->second;
  out.entity = std::string(to_string(suffix->second));
  out.location = suffix->first;
  if (out.lesion == LesionType::Cardiomegaly) {
    const bool severity_only =
        std::find(kSeverities.begin(), kSeverities.end(), out.location) != kSeverities.end();
    if (!out.location.empty() && !severity_only) return std::nullopt;
    out.location.clear();
  } else if (out.location.empty()) {
    return std::nullopt;
  }
  return out;
}

LabelSet parse_label_list(std::string_view text) {
  LabelSet out;
  for (const auto& part : split(text, ",")) {
    auto name = trim(part);
    if (name.empty()) continue;
    out.insert(parse_label(name));
  }
  if (out.empty()) throw DataError("empty label list");
  return out;
}

}  // namespace

const LocationLexicon& LocationLexicon::builtin() {
  static const LocationLexicon lex = parse_tsv(kBuiltinLexicon);
  return lex;
}

LocationLexicon LocationLexicon::parse_tsv(std::string_view text) {
  LocationLexicon lex;
  int lineno = 0;
  for (const auto& raw : split(text, "\n")) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("lexicon line " + std::to_string(lineno) + ": missing tab");
    }
    try {
      lex.add(line.substr(0, tab), parse_label_list(line.substr(tab + 1)));
    } catch (const DataError& e) {
      throw DataError("lexicon line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return lex;
}

LocationLexicon LocationLexicon::load(const std::filesystem::path& path) {
  return parse_tsv(read_text_file(path));
}

void LocationLexicon::add(std::string_view phrase, LabelSet labels) {
  auto key = to_lower(trim(phrase));
  if (key.empty()) throw DataError("empty lexicon phrase");
  if (labels.empty()) throw DataError("lexicon phrase '" + key + "' maps to no label");
  entries_[key] = labels;
}

std::optional<LabelSet> LocationLexicon::lookup(std::string_view phrase) const {
  auto it = entries_.find(to_lower(trim(phrase)));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string LocationLexicon::to_tsv() const {
  std::string out;
  for (const auto& [phrase, labels] : entries_) {
    std::vector<std::string> names;
    for (auto l : labels.labels()) names.emplace_back(to_string(l));
    out += phrase + "\t" + join(names, ",") + "\n";
  }
  return out;
}

LocationMapping map_locations(const std::vector<std::string>& phrases,
                              const LocationLexicon& lexicon) {
  LocationMapping out;
  for (const auto& phrase : phrases) {
    if (auto hit = lexicon.lookup(phrase)) {
      out.labels = out.labels | *hit;
      continue;
    }
    std::vector<std::string> parts;
    for (const auto& a : split(to_lower(phrase), " and ")) {
      for (const auto& b : split(a, ",")) {
        auto t = trim(b);
        if (!t.empty()) parts.push_back(t);
      }
    }
    if (parts.size() <= 1) {
      out.unknown.push_back(trim(phrase));
      continue;
    }
    for (const auto& part : parts) {
      if (auto hit = lexicon.lookup(part)) {
        out.labels = out.labels | *hit;
      } else {
        out.unknown.push_back(part);
      }
    }
  }
  return out;
}

StructuredReport structure_report(std::string_view report, const LocationLexicon& lexicon) {
  StructuredReport out;
  std::vector<std::string> rejected;
  int index = 0;
  for (const auto& raw : split(report, ".")) {
    auto sentence = trim(raw);
    if (sentence.empty()) continue;
    ++index;
    auto lowered = to_lower(sentence);
    // Collapse runs of whitespace.
    std::string norm;
    for (char ch : lowered) {
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!norm.empty() && norm.back() != ' ') norm.push_back(' ');
      } else {
        norm.push_back(ch);
      }
    }
    auto parsed = parse_sentence(norm);
    if (!parsed) {
      rejected.push_back(sentence);
      continue;
    }
    if (parsed->normal) continue;
    StructuredFinding f;
    f.entity = parsed->entity;
    f.sentence_index = index;
    f.presence = parsed->presence;
    f.certainty = parsed->certainty;
    f.predicted_lesion = parsed->predicted;
    if (!parsed->location.empty()) {
      auto mapping = map_locations({parsed->location}, lexicon);
      f.reported_locations = mapping.labels;
      for (auto& u : mapping.unknown) out.unknown_phrases.push_back(std::move(u));
      if (f.reported_locations.empty()) continue;
    }
    out.findings.push_back(std::move(f));
  }
  if (!rejected.empty()) {
    throw DataError("sentences outside the report grammar: \"" + join(rejected, "\", \"") + "\"");
  }
  return out;
}

std::vector<StructuredFinding> load_external_findings(const std::filesystem::path& path) {
  return parse_findings(read_json_file(path));
}

}  // namespace cxrils
