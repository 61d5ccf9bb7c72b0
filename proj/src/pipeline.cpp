#include "cxrils/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "cxrils/grounding.hpp"
#include "cxrils/png_io.hpp"
#include "cxrils/qc.hpp"
#include "cxrils/report.hpp"
#include "cxrils/util.hpp"

namespace cxrils {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStatusOk = "ok";
constexpr const char* kStatusExcluded = "qc_excluded";

json verdict_json(const BoxFilterVerdict& v) {
  return {{"box_index", v.box_index},     {"anatomy", v.c1},
          {"confidence", v.c2},           {"signal", v.c3},
          {"size", v.c4},                 {"accepted", v.accepted},
          {"anatomy_iou", v.anatomy_iou}, {"signal_ratio", v.signal_ratio},
          {"right_lung_iou", v.right_lung_iou}, {"left_lung_iou", v.left_lung_iou}};
}

json lesion_json(const GroundedLesion& g, const std::string& mask_ref) {
  return {{"lesion", to_string(g.lesion)},
          {"certainty", to_string(g.certainty)},
          {"mask_ref", mask_ref},
          {"pixels", g.mask.count()},
          {"reported_locations", g.reported_locations},
          {"grounded_locations", g.grounded_locations},
          {"empty_locations", g.empty_locations},
          {"source_sentence", g.source_finding_index}};
}

std::string record_digest(const StudyRecord& record, const fs::path& root,
                          const PipelineConfig& cfg, const std::string& lexicon_tsv) {
  const auto key =
      study_record_to_json(record, root).dump() + "\n" + dump_config(cfg) + "\n" + lexicon_tsv;
  return hex64(fnv1a64(key));
}

void remove_stale_temporaries(const fs::path& dir) {
  if (!fs::exists(dir)) return;
  std::vector<fs::path> stale;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".tmp") stale.push_back(e.path());
  }
  for (const auto& p : stale) fs::remove(p);
}

std::string jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

std::optional<json> read_commit(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    return json::parse(read_text_file(path));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool masks_present(const json& commit, const fs::path& out_dir) {
  if (!commit.contains("lesions")) return true;
  for (const auto& l : commit.at("lesions")) {
    if (!fs::exists(out_dir / l.at("mask_ref").get<std::string>())) return false;
  }
  return true;
}

}  // namespace

void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  if (workers == 1 || n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < std::min(workers, n); ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

json ground_one(const StudyRecord& record, const PipelineConfig& cfg, const fs::path& out_dir,
                const LocationLexicon& lexicon) {
  const auto study = load_study(record);
  const OrganMasks anatomy_organs{study.anatomy_mask(AnatomicalLabel::RightLung),
                                  study.anatomy_mask(AnatomicalLabel::LeftLung),
                                  study.anatomy_heart};
  const auto qc = run_qc(record.study_id, record.qc_flags, study.organs, anatomy_organs, cfg.qc);

  json commit{{"study_id", record.study_id}, {"qc", qc.to_json()}};
  const fs::path mask_dir = out_dir / "masks" / record.study_id;
  fs::remove_all(mask_dir);
  if (qc.excluded()) {
    commit["status"] = kStatusExcluded;
    return commit;
  }

  std::vector<StructuredFinding> findings;
  std::vector<std::string> unknown;
  if (study.findings) {
    findings = *study.findings;
  } else {
    auto structured = structure_report(study.report_text, lexicon);
    findings = std::move(structured.findings);
    unknown = std::move(structured.unknown_phrases);
  }
  const auto grounding = ground_study(study, findings, cfg.grounding);

  json records = json::array();
  json lesions = json::array();
  for (const auto& fg : grounding.findings) {
    json r{{"study_id", record.study_id},
           {"finding_index", fg.finding_index},
           {"finding", fg.finding},
           {"lesion", fg.lesion ? json(to_string(*fg.lesion)) : json(nullptr)}};
    r["boxes"] = json::array();
    for (const auto& v : fg.verdicts) r["boxes"].push_back(verdict_json(v));
    if (fg.grounded) {
      const auto name = std::to_string(fg.finding_index) + "_" +
                        std::string(to_string(fg.grounded->lesion)) + ".png";
      const auto mask_ref = "masks/" + record.study_id + "/" + name;
      write_png_mask(mask_dir / name, fg.grounded->mask);
      r["grounded"] = lesion_json(*fg.grounded, mask_ref);
      lesions.push_back(r["grounded"]);
    } else {
      r["grounded"] = nullptr;
      r["rejection"] = fg.rejection;
    }
    records.push_back(std::move(r));
  }
  commit["status"] = kStatusOk;
  commit["findings"] = findings;
  commit["unknown_phrases"] = unknown;
  commit["empty_locations"] = grounding.empty;
  commit["ctr"] = qc.ctr ? json(*qc.ctr) : json(nullptr);
  commit["grounding"] = std::move(records);
  commit["lesions"] = std::move(lesions);
  return commit;
}

std::vector<InstructionAnswerPair> pairs_from_commit(const json& commit, Split split,
                                                     const NegativeConfig& cfg) {
  if (commit.at("status") != kStatusOk) return {};
  StudyPairInput in;
  in.study_id = commit.at("study_id").get<std::string>();
  in.split = split;
  in.findings = parse_findings(commit.at("findings"));
  in.empty_locations = commit.at("empty_locations").get<LabelSet>();
  if (!commit.at("ctr").is_null()) in.ctr = commit.at("ctr").get<double>();
  for (const auto& l : commit.at("lesions")) {
    GroundedLesion g;
    g.lesion = parse_lesion(l.at("lesion").get<std::string>());
    g.certainty = parse_certainty(l.at("certainty").get<std::string>());
    g.reported_locations = l.at("reported_locations").get<LabelSet>();
    g.grounded_locations = l.at("grounded_locations").get<LabelSet>();
    g.empty_locations = l.at("empty_locations").get<LabelSet>();
    g.source_finding_index = l.at("source_sentence").get<int>();
    in.lesions.push_back(std::move(g));
    in.mask_refs.push_back(l.at("mask_ref").get<std::string>());
  }
  return generate_study_pairs(in, cfg);
}

RunSummary run_pipeline(const fs::path& manifest, const fs::path& out_dir, const RunOptions& opts) {
  const auto records = load_manifest(manifest);
  const auto root = fs::absolute(manifest).lexically_normal().parent_path();
  fs::create_directories(out_dir / "studies");
  remove_stale_temporaries(out_dir);

  RunSummary summary;
  summary.studies = records.size();
  const auto& cfg = opts.config;
  const auto lexicon_tsv = opts.lexicon.to_tsv();

  struct Slot {
    std::optional<json> commit;
    std::string error;
    bool reused = false;
  };
  std::vector<Slot> slots(records.size());
  auto commit_path = [&](const StudyRecord& r) { return out_dir / "studies" / (r.study_id + ".json"); };

  if (opts.stage != Stage::Pairs) {
    parallel_for(records.size(), opts.parallelism, [&](std::size_t i) {
      const auto& r = records[i];
      auto& slot = slots[i];
      const auto path = commit_path(r);
      const auto digest = record_digest(r, root, cfg, lexicon_tsv);
      if (auto existing = read_commit(path);
          existing && existing->value("digest", "") == digest && masks_present(*existing, out_dir)) {
        slot.commit = std::move(*existing);
        slot.reused = true;
        return;
      }
      fs::remove(path);
      try {
        slot.commit = ground_one(r, cfg, out_dir, opts.lexicon);
        (*slot.commit)["digest"] = digest;
        write_text_atomic(path, slot.commit->dump(1) + "\n");
      } catch (const std::exception& e) {
        slot.commit.reset();
        slot.error = e.what();
      }
    });

    std::vector<json> grounding_rows;
    std::vector<json> quarantine_rows;
    json qc_rows = json::array();
    json excluded = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& slot = slots[i];
      if (!slot.commit) {
        ++summary.quarantined;
        quarantine_rows.push_back({{"study_id", records[i].study_id}, {"error", slot.error}});
        continue;
      }
      if (slot.reused) ++summary.reused;
      const auto& c = *slot.commit;
      qc_rows.push_back(c.at("qc"));
      if (c.at("status") == kStatusExcluded) {
        ++summary.qc_excluded;
        excluded.push_back(records[i].study_id);
        continue;
      }
      ++summary.grounded;
      for (const auto& g : c.at("grounding")) grounding_rows.push_back(g);
    }
    write_text_atomic(out_dir / "grounding.jsonl", jsonl(grounding_rows));
    write_text_atomic(out_dir / "quarantine.jsonl", jsonl(quarantine_rows));
    write_text_atomic(out_dir / "qc_report.json",
                      json{{"studies", qc_rows}, {"excluded", excluded}}.dump(1) + "\n");
    if (opts.stage == Stage::Ground) return summary;
  } else {
    for (std::size_t i = 0; i < records.size(); ++i) {
      slots[i].commit = read_commit(commit_path(records[i]));
      if (!slots[i].commit) continue;
      slots[i].reused = true;
      ++summary.reused;
      if (slots[i].commit->at("status") == kStatusOk) {
        ++summary.grounded;
      } else {
        ++summary.qc_excluded;
      }
    }
  }

  std::vector<std::vector<InstructionAnswerPair>> per_study(records.size());
  parallel_for(records.size(), opts.parallelism, [&](std::size_t i) {
    if (slots[i].commit) {
      per_study[i] = pairs_from_commit(*slots[i].commit, records[i].split, cfg.negatives());
    }
  });
  std::string pairs_text;
  for (const auto& study_pairs : per_study) {
    for (const auto& p : study_pairs) {
      summary.stats.add(p);
      ++summary.pairs;
      pairs_text += json(p).dump() + "\n";
    }
  }
  write_text_atomic(out_dir / "pairs.jsonl", pairs_text);
  json stats{{"studies", summary.studies},
             {"grounded", summary.grounded},
             {"qc_excluded", summary.qc_excluded},
             {"pairs", summary.pairs},
             {"counts", summary.stats.to_json()}};
  if (opts.stage == Stage::All) stats["quarantined"] = summary.quarantined;
  write_text_atomic(out_dir / "stats.json", stats.dump(1) + "\n");
  write_text_atomic(out_dir / "stats.txt", summary.stats.to_text());
  return summary;
}

}  // namespace cxrils
