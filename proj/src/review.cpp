#include "cxrils/review.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "cxrils/util.hpp"

namespace cxrils {

namespace fs = std::filesystem;

std::vector<ReviewSample> group_samples(const std::vector<InstructionAnswerPair>& pairs) {
  std::vector<ReviewSample> out;
  std::map<std::string, std::size_t> index;
  for (const auto& p : pairs) {
    std::string key = p.study_id + "|" + p.mask_ref.value_or("") + "|" +
                      std::string(to_string(p.target)) + "|" +
                      std::string(to_string(p.polarity)) + "|" +
                      std::to_string(p.locations.raw());
    const auto id = hex64(fnv1a64(key));
    auto it = index.find(id);
    if (it == index.end()) {
      ReviewSample s;
      s.sample_id = id;
      s.study_id = p.study_id;
      s.lesion = p.lesion;
      s.target = p.target;
      s.polarity = p.polarity;
      s.locations = p.locations;
      s.mask_ref = p.mask_ref;
      it = index.emplace(id, out.size()).first;
      out.push_back(std::move(s));
    }
    out[it->second].pairs.push_back(p);
  }
  return out;
}

Worklists assign_samples(const std::vector<ReviewSample>& samples,
                         const std::vector<std::string>& experts, std::uint64_t seed) {
  if (experts.empty()) throw DataError("review assignment needs at least one expert");
  std::set<std::string> unique(experts.begin(), experts.end());
  if (unique.size() != experts.size()) throw DataError("duplicate expert id");

  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].polarity == Polarity::Negative) negatives.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(negatives);
  std::vector<std::size_t> owner(samples.size(), experts.size());
  for (std::size_t k = 0; k < negatives.size(); ++k) owner[negatives[k]] = k % experts.size();

  Worklists out;
  for (std::size_t e = 0; e < experts.size(); ++e) {
    auto& list = out[experts[e]];
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].polarity == Polarity::Positive || owner[i] == e) {
        list.push_back(samples[i].sample_id);
      }
    }
  }
  return out;
}

std::string_view to_string(Decision d) {
  return d == Decision::Acceptable ? "acceptable" : "not_acceptable";
}

Decision parse_decision(std::string_view s) {
  if (s == "acceptable") return Decision::Acceptable;
  if (s == "not_acceptable") return Decision::NotAcceptable;
  throw DataError("decision must be acceptable or not_acceptable, got '" + std::string(s) + "'");
}

VerdictStore::VerdictStore(fs::path log) : log_(std::move(log)) {
  if (!fs::exists(log_)) return;
  for (const auto& j : read_jsonl_file(log_)) {
    Verdict v{j.at("expert").get<std::string>(), j.at("sample").get<std::string>(),
              parse_decision(j.at("decision").get<std::string>()),
              j.value("timestamp_ms", std::int64_t{0})};
    latest_[{v.expert_id, v.sample_id}] = v;
  }
}

void VerdictStore::submit(Verdict v) {
  std::lock_guard lock(mutex_);
  if (!log_.empty()) {
    if (log_.has_parent_path()) fs::create_directories(log_.parent_path());
    std::ofstream out(log_, std::ios::app);
    out << json{{"expert", v.expert_id},
                {"sample", v.sample_id},
                {"decision", to_string(v.decision)},
                {"timestamp_ms", v.timestamp_ms}}
               .dump()
        << "\n";
    out.flush();
    if (!out) throw DataError("cannot append to verdict log " + log_.string());
  }
  latest_[{v.expert_id, v.sample_id}] = std::move(v);
}

std::optional<Verdict> VerdictStore::get(const std::string& expert,
                                         const std::string& sample) const {
  std::lock_guard lock(mutex_);
  auto it = latest_.find({expert, sample});
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

std::map<VerdictStore::Key, Verdict> VerdictStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return latest_;
}

namespace {

json cell_json(const RateCell& c) {
  return {{"accepted", c.accepted},
          {"reviewed", c.reviewed},
          {"rate", c.rate() ? json(*c.rate()) : json(nullptr)}};
}

json row_json(const RateRow& r) {
  return {{"total", cell_json(r.total)},
          {"positive", cell_json(r.positive)},
          {"negative", cell_json(r.negative)}};
}

std::string cell_text(const RateCell& c) {
  char buf[48];
  if (c.rate()) {
    std::snprintf(buf, sizeof(buf), "%5.1f (%zu)", *c.rate() * 100.0, c.reviewed);
  } else {
    std::snprintf(buf, sizeof(buf), "    - (0)");
  }
  return buf;
}

}  // namespace

json ReviewReport::to_json() const {
  json j;
  j["experts"] = json::object();
  for (const auto& [e, r] : per_expert) j["experts"][e] = row_json(r);
  j["overall"] = row_json(overall);
  j["lesions"] = json::object();
  for (const auto& [l, r] : per_lesion) j["lesions"][std::string(to_string(l))] = row_json(r);
  j["excluded"] = excluded;
  j["pending"] = pending;
  return j;
}

std::string ReviewReport::to_text() const {
  std::ostringstream os;
  auto row = [&](const std::string& name, const RateRow& r) {
    os << std::left << std::setw(16) << name << std::right << std::setw(14)
       << cell_text(r.total) << std::setw(14) << cell_text(r.positive) << std::setw(14)
       << cell_text(r.negative) << "\n";
  };
  os << std::left << std::setw(16) << "" << std::right << std::setw(14) << "total"
     << std::setw(14) << "positive" << std::setw(14) << "negative" << "\n";
  for (const auto& [e, r] : per_expert) row(e, r);
  row("overall", overall);
  os << "\n";
  for (const auto& [l, r] : per_lesion) row(std::string(to_string(l)), r);
  return os.str();
}

ExportResult export_filtered(const std::vector<ReviewSample>& samples, const Worklists& worklists,
                             const std::map<VerdictStore::Key, Verdict>& verdicts) {
  std::map<std::string, std::vector<std::string>> assigned;  // sample -> experts
  for (const auto& [expert, list] : worklists) {
    for (const auto& id : list) assigned[id].push_back(expert);
  }
  ExportResult out;
  for (const auto& [expert, list] : worklists) {
    auto& row = out.report.per_expert[expert];
    std::set<std::string> ids(list.begin(), list.end());
    for (const auto& s : samples) {
      if (!ids.count(s.sample_id)) continue;
      auto it = verdicts.find({expert, s.sample_id});
      if (it == verdicts.end()) continue;
      row.add(s.polarity, it->second.decision == Decision::Acceptable);
    }
  }
  for (const auto& s : samples) {
    bool rejected = false;
    bool complete = true;
    for (const auto& expert : assigned[s.sample_id]) {
      auto it = verdicts.find({expert, s.sample_id});
      if (it == verdicts.end()) {
        complete = false;
      } else if (it->second.decision == Decision::NotAcceptable) {
        rejected = true;
      }
    }
    if (assigned[s.sample_id].empty()) complete = false;
    if (rejected) {
      out.report.excluded.push_back(s.sample_id);
    } else {
      out.kept.insert(out.kept.end(), s.pairs.begin(), s.pairs.end());
    }
    if (rejected || complete) {
      out.report.overall.add(s.polarity, !rejected);
      out.report.per_lesion[s.lesion].add(s.polarity, !rejected);
    } else {
      out.report.pending.push_back(s.sample_id);
    }
  }
  return out;
}

}  // namespace cxrils
