// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "corpus_checks.hpp"
#include "cxrils/config.hpp"
#include "cxrils/eval.hpp"
#include "cxrils/pairgen.hpp"
#include "cxrils/pipeline.hpp"
#include "cxrils/report.hpp"
#include "cxrils/synth.hpp"
#include "oracle_checks.hpp"
#include "support.hpp"

using namespace cxrils;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using L = AnatomicalLabel;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

Outcome a1() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  const int n = 1200;
  int failures = 0;
  std::string first;
  for (int i = 0; i < n; ++i) {
    auto err = testing_support::check_box_filter_instance(rng);
    if (!err.empty() && failures++ == 0) first = err;
  }
  const double secs = seconds_since(t0);
  o.detail << n << " instances, " << failures << " mismatches, " << secs << " s";
  o.require(failures == 0, first);
  o.require(secs < 60.0, "runtime");
  return o;
}

Outcome a2() {
  Outcome o;
  auto r = config_self_test();
  for (const auto& line : r.lines) {
    if (line.rfind("PASS", 0) != 0) o.detail << " " << line;
  }
  const PipelineConfig cfg;
  o.require(r.ok, "self-test");
  o.require(cfg.grounding.general == ThresholdSet{0.10, 0.25, 0.20, 0.20, 0.10}, "general");
  o.require(cfg.grounding.edema == ThresholdSet{0.01, 0.25, 0.01, 0.20, 0.10}, "edema");
  o.detail << r.lines.size() << " checks";
  return o;
}

struct A3Run {
  std::size_t lesions = 0;
  std::size_t good = 0;
  double secs = 0;
};

A3Run a3_run(const fs::path& dir, const CorpusOptions& opts) {
  auto corpus = make_corpus(opts, dir / "corpus");
  const auto t0 = Clock::now();
  RunOptions run;
  run.parallelism = 1;
  run_pipeline(corpus.manifest, dir / "out", run);
  A3Run r;
  r.secs = seconds_since(t0);
  for (double v : testing_support::lesion_ious(corpus, dir / "out")) {
    ++r.lesions;
    r.good += v >= 0.90;
  }
  return r;
}

Outcome a3(const fs::path& work) {
  Outcome o;
  CorpusOptions clean;
  clean.count = 200;
  clean.seed = 1001;
  auto c = a3_run(work / "a3_clean", clean);
  CorpusOptions noisy = clean;
  noisy.seed = 1002;
  noisy.jitter = 3;
  noisy.confidence_noise = 0.25;
  auto n = a3_run(work / "a3_noisy", noisy);
  o.detail << "clean " << c.good << "/" << c.lesions << " in " << c.secs << " s; noisy " << n.good
           << "/" << n.lesions << " in " << n.secs << " s";
  o.require(c.lesions > 0 && testing_support::ratio_at_least(static_cast<long>(c.good), static_cast<long>(c.lesions), 95), "clean ratio");
  o.require(n.lesions > 0 && testing_support::ratio_at_least(static_cast<long>(n.good), static_cast<long>(n.lesions), 80), "noisy ratio");
  o.require(c.secs < 300.0 && n.secs < 300.0, "runtime");
  return o;
}

Outcome a4(const fs::path& work) {
  Outcome o;
  CorpusOptions opts;
  opts.count = 200;
  opts.seed = 1003;
  opts.jitter = 2;
  opts.confidence_noise = 0.15;
  opts.false_positives = 1;
  opts.qc_mismatch_rate = 0.05;
  opts.tentative_rate = 0.4;
  auto corpus = make_corpus(opts, work / "a4" / "corpus");
  run_pipeline(corpus.manifest, work / "a4" / "out", {});
  std::size_t pairs = 0;
  for (const auto& dir : {work / "a3_clean" / "out", work / "a3_noisy" / "out", work / "a4" / "out"}) {
    pairs += read_jsonl_file(dir / "pairs.jsonl").size();
    auto bad = testing_support::pair_rule_violations(dir);
    o.require(bad.empty(), bad.empty() ? "" : std::to_string(bad.size()) + " violations, first: " + bad.front());
  }
  o.detail << pairs << " pairs checked";
  o.require(pairs > 0, "no pairs");
  return o;
}

Outcome a5() {
  Outcome o;
  std::mt19937_64 rng(555);
  int failures = 0;
  std::string first;
  for (int i = 0; i < 100; ++i) {
    auto err = testing_support::check_metric_instance(rng);
    if (!err.empty() && failures++ == 0) first = err;
  }
  o.require(failures == 0, first);

  std::vector<GroundTruthItem> truth;
  std::vector<Prediction> self;
  for (int i = 0; i < 20; ++i) {
    GroundTruthItem t;
    t.pair.pair_id = "p" + std::to_string(i);
    t.pair.polarity = i % 4 == 0 ? Polarity::Negative : Polarity::Positive;
    std::optional<RasterMask> m;
    if (t.pair.polarity == Polarity::Positive) m = RasterMask::rectangle(10, 10, 0, 0, i % 9, i % 7);
    t.mask = m;
    truth.push_back(t);
    self.push_back({t.pair.pair_id, m.value_or(RasterMask(10, 10)), ""});
  }
  auto s = score_segmentation(self, truth).overall;
  o.require(s.giou() == 1.0 && s.ciou() == 1.0 && s.n_acc() == 1.0, "self-evaluation");

  GroundTruthItem a, b;
  a.pair.pair_id = "a";
  a.pair.polarity = b.pair.polarity = Polarity::Positive;
  b.pair.pair_id = "b";
  a.mask = RasterMask::rectangle(8, 8, 0, 0, 0, 2);
  b.mask = RasterMask::rectangle(8, 8, 4, 0, 4, 3);
  auto w = score_segmentation({{"a", RasterMask::rectangle(8, 8, 0, 0, 0, 2), ""},
                               {"b", RasterMask::rectangle(8, 8, 4, 0, 4, 1), ""}},
                              {a, b})
               .overall;
  o.require(w.giou() && std::abs(*w.giou() - 0.75) <= 1e-12, "worked gIoU");
  o.require(w.ciou() && std::abs(*w.ciou() - 5.0 / 7.0) <= 1e-12, "worked cIoU");
  o.detail << "100 random sets, " << failures << " mismatches; worked example gIoU "
           << w.giou().value_or(-1) << " cIoU " << w.ciou().value_or(-1);
  return o;
}

std::map<std::string, std::string> canonical_outputs(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto text = read_text_file(e.path());
    if (e.path().extension() == ".jsonl") {
      std::vector<std::string> lines;
      std::istringstream in(text);
      for (std::string line; std::getline(in, line);) lines.push_back(line);
      std::sort(lines.begin(), lines.end());
      text.clear();
      for (const auto& l : lines) text += l + "\n";
    }
    out[fs::relative(e.path(), root).string()] = text;
  }
  return out;
}

Outcome a6(const fs::path& work) {
  Outcome o;
  CorpusOptions opts;
  opts.count = 60;
  opts.seed = 1004;
  opts.jitter = 2;
  opts.false_positives = 1;
  opts.qc_mismatch_rate = 0.1;
  auto corpus = make_corpus(opts, work / "a6" / "corpus");
  RunOptions one, eight;
  eight.parallelism = 8;
  run_pipeline(corpus.manifest, work / "a6" / "j1", one);
  run_pipeline(corpus.manifest, work / "a6" / "j8", eight);
  const auto want = canonical_outputs(work / "a6" / "j1");
  o.require(want == canonical_outputs(work / "a6" / "j8"), "j1 vs j8");

  const auto partial = work / "a6" / "partial";
  fs::create_directories(partial);
  fs::copy(work / "a6" / "j1", partial, fs::copy_options::recursive);
  std::size_t removed = 0;
  for (const auto& s : corpus.studies) {
    if (std::stoi(s.record.study_id.substr(1)) % 3 == 0) {
      removed += fs::remove(partial / "studies" / (s.record.study_id + ".json"));
    }
  }
  fs::remove(partial / "pairs.jsonl");
  fs::remove(partial / "stats.json");
  write_text_atomic(partial / "studies" / "s00001.json.tmp", "{\"truncated");
  auto summary = run_pipeline(corpus.manifest, partial, eight);
  o.require(canonical_outputs(partial) == want, "resume");
  o.detail << corpus.studies.size() << " studies, " << removed << " commits removed, "
           << summary.reused << " reused on resume";
  return o;
}

Outcome a7() {
  Outcome o;
  auto r = structure_report("The lower lung opacity is pneumonia.");
  const LabelSet bases{L::RightLungBase, L::LeftLungBase};
  o.require(r.findings.size() == 1, "finding count");
  if (r.findings.size() == 1) {
    const auto& f = r.findings[0];
    o.require(f.entity == "opacity" && f.sentence_index == 1 && f.presence == Presence::Positive &&
                  f.certainty == Certainty::Definitive && f.reported_locations == bases &&
                  f.predicted_lesion == LesionType::Pneumonia,
              "structured tuple");
  }
  auto m = map_locations({"lower lung"});
  o.require(m.labels == bases && m.unknown.empty(), "map_locations");
  GroundedLesion g;
  g.lesion = LesionType::Pneumonia;
  g.certainty = Certainty::Definitive;
  g.grounded_locations = g.reported_locations = bases;
  auto def = gen_basic(g);
  g.certainty = Certainty::Tentative;
  auto tent = gen_basic(g);
  o.require(def.size() == 1 && def[0].instruction ==
                                   "Segment the pneumonia in the right lung base and left lung base.",
            "definitive instruction");
  o.require(tent.size() == 1 && tent[0].instruction ==
                                    "Segment the opacity in the right lung base and left lung base.",
            "tentative instruction");
  if (!def.empty()) o.detail << "'" << def[0].instruction << "'";
  return o;
}

}  // namespace

int main() {
  testing_support::TempDir work("acceptance");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1 box filter and lesion mask match brute force", a1},
      {"A2 default thresholds", a2},
      {"A3 lesion-mask IoU on synthetic corpora", [&] { return a3(work.path()); }},
      {"A4 pair generation rules", [&] { return a4(work.path()); }},
      {"A5 metrics match brute force", a5},
      {"A6 parallel and resumed runs agree", [&] { return a6(work.path()); }},
      {"A7 report structuring and instruction text", a7},
  };
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
