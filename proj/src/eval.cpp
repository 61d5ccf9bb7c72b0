#include "cxrils/eval.hpp"

#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cxrils/png_io.hpp"
#include "cxrils/raster_ops.hpp"

namespace cxrils {

namespace fs = std::filesystem;

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0) return std::nullopt;
  return num / den;
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::string pct(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
  return buf;
}

json seg_json(const SegmentationTally& t) {
  return {{"giou", opt(t.giou())},
          {"ciou", opt(t.ciou())},
          {"n_acc", opt(t.n_acc())},
          {"positives", t.positives},
          {"negatives", t.negatives}};
}

json text_json(const TextTally& t) {
  return {{"accuracy", opt(t.accuracy())}, {"correct", t.correct}, {"total", t.total}};
}

}  // namespace

void SegmentationTally::add_positive(const RasterMask* pred, const RasterMask& truth) {
  ++positives;
  const auto gt = truth.count();
  if (pred == nullptr) {
    union_ += gt;
    return;
  }
  const auto i = intersection_count(*pred, truth);
  const auto u = union_count(*pred, truth);
  intersection += i;
  union_ += u;
  iou_sum += u == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(u);
}

void SegmentationTally::add_negative(const RasterMask* pred) {
  ++negatives;
  if (pred == nullptr || pred->empty()) ++negatives_correct;
}

void SegmentationTally::merge(const SegmentationTally& o) {
  iou_sum += o.iou_sum;
  positives += o.positives;
  intersection += o.intersection;
  union_ += o.union_;
  negatives += o.negatives;
  negatives_correct += o.negatives_correct;
}

std::optional<double> SegmentationTally::giou() const {
  return ratio(iou_sum, static_cast<double>(positives));
}

std::optional<double> SegmentationTally::ciou() const {
  if (positives == 0) return std::nullopt;
  if (union_ == 0) return 0.0;
  return static_cast<double>(intersection) / static_cast<double>(union_);
}

std::optional<double> SegmentationTally::n_acc() const {
  return ratio(static_cast<double>(negatives_correct), static_cast<double>(negatives));
}

std::optional<double> TextTally::accuracy() const {
  return ratio(static_cast<double>(correct), static_cast<double>(total));
}

namespace {

std::unordered_map<std::string, const Prediction*> index_predictions(
    const std::vector<Prediction>& preds, const std::vector<GroundTruthItem>& truth) {
  std::set<std::string> known;
  for (const auto& t : truth) known.insert(t.pair.pair_id);
  std::unordered_map<std::string, const Prediction*> out;
  for (const auto& p : preds) {
    if (!known.count(p.pair_id)) throw DataError("prediction for unknown pair_id " + p.pair_id);
    if (!out.emplace(p.pair_id, &p).second) {
      throw DataError("duplicate prediction for pair_id " + p.pair_id);
    }
  }
  return out;
}

}  // namespace

SegmentationScores score_segmentation(const std::vector<Prediction>& preds,
                                      const std::vector<GroundTruthItem>& truth) {
  auto by_id = index_predictions(preds, truth);
  SegmentationScores out;
  for (const auto& t : truth) {
    const RasterMask* pred = nullptr;
    if (auto it = by_id.find(t.pair.pair_id); it != by_id.end() && it->second->mask) {
      pred = &*it->second->mask;
    }
    SegmentationTally one;
    if (t.pair.polarity == Polarity::Positive) {
      if (!t.mask) throw DataError("positive pair " + t.pair.pair_id + " has no mask");
      one.add_positive(pred, *t.mask);
    } else {
      one.add_negative(pred);
    }
    out.overall.merge(one);
    out.per_lesion[t.pair.lesion].merge(one);
    out.per_template[t.pair.template_type].merge(one);
  }
  return out;
}

bool answer_matches(const InstructionAnswerPair& truth, std::string_view response,
                    const TemplateBank& bank) {
  auto expected = bank.parse_answer(truth.template_type, truth.answer_text);
  if (!expected) throw DataError("ground-truth answer does not parse: " + truth.answer_text);
  auto got = bank.parse_answer(truth.template_type, response);
  if (!got) return false;
  return got->variant == expected->variant && got->vars == expected->vars;
}

TextScores score_text(const std::vector<Prediction>& preds,
                      const std::vector<GroundTruthItem>& truth, const TemplateBank& bank) {
  auto by_id = index_predictions(preds, truth);
  TextScores out;
  for (const auto& t : truth) {
    bool ok = false;
    if (auto it = by_id.find(t.pair.pair_id); it != by_id.end()) {
      ok = answer_matches(t.pair, it->second->answer_text, bank);
    }
    out.overall.add(ok);
    out.per_template[t.pair.template_type].add(ok);
    out.per_polarity[t.pair.polarity].add(ok);
    out.per_lesion[t.pair.lesion].add(ok);
  }
  return out;
}

json scores_to_json(const SegmentationScores& seg, const TextScores& text) {
  json j;
  j["segmentation"]["overall"] = seg_json(seg.overall);
  for (const auto& [k, v] : seg.per_lesion) j["segmentation"]["lesion"][std::string(to_string(k))] = seg_json(v);
  for (const auto& [k, v] : seg.per_template) j["segmentation"]["template"][std::string(to_string(k))] = seg_json(v);
  j["text"]["overall"] = text_json(text.overall);
  for (const auto& [k, v] : text.per_template) j["text"]["template"][std::string(to_string(k))] = text_json(v);
  for (const auto& [k, v] : text.per_polarity) j["text"]["polarity"][std::string(to_string(k))] = text_json(v);
  for (const auto& [k, v] : text.per_lesion) j["text"]["lesion"][std::string(to_string(k))] = text_json(v);
  return j;
}

std::string scores_to_text(const SegmentationScores& seg, const TextScores& text) {
  std::ostringstream os;
  auto seg_row = [&](const std::string& name, const SegmentationTally& t) {
    os << std::left << std::setw(18) << name << std::right << std::setw(8) << pct(t.giou())
       << std::setw(8) << pct(t.ciou()) << std::setw(8) << pct(t.n_acc()) << "\n";
  };
  os << std::left << std::setw(18) << "segmentation" << std::right << std::setw(8) << "gIoU"
     << std::setw(8) << "cIoU" << std::setw(8) << "N-Acc" << "\n";
  for (const auto& [k, v] : seg.per_lesion) seg_row(std::string(to_string(k)), v);
  for (const auto& [k, v] : seg.per_template) seg_row(std::string(to_string(k)), v);
  seg_row("overall", seg.overall);
  os << "\n" << std::left << std::setw(18) << "text" << std::right << std::setw(8) << "acc"
     << "\n";
  auto text_row = [&](const std::string& name, const TextTally& t) {
    os << std::left << std::setw(18) << name << std::right << std::setw(8) << pct(t.accuracy())
       << "\n";
  };
  for (const auto& [k, v] : text.per_template) text_row(std::string(to_string(k)), v);
  for (const auto& [k, v] : text.per_polarity) text_row(std::string(to_string(k)), v);
  for (const auto& [k, v] : text.per_lesion) text_row(std::string(to_string(k)), v);
  text_row("overall", text.overall);
  return os.str();
}

std::vector<Prediction> load_predictions(const fs::path& path) {
  std::vector<Prediction> out;
  const auto root = path.parent_path();
  for (const auto& j : read_jsonl_file(path)) {
    Prediction p;
    p.pair_id = j.at("pair_id").get<std::string>();
    if (j.contains("mask_path") && !j.at("mask_path").is_null()) {
      fs::path mp = j.at("mask_path").get<std::string>();
      p.mask = read_png_mask(mp.is_absolute() ? mp : root / mp);
    }
    if (j.contains("answer_text") && !j.at("answer_text").is_null()) {
      p.answer_text = j.at("answer_text").get<std::string>();
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<GroundTruthItem> load_ground_truth(const fs::path& pairs_path,
                                               const fs::path& dataset_root,
                                               std::optional<Split> split) {
  std::vector<GroundTruthItem> out;
  std::map<std::string, RasterMask> cache;
  for (const auto& j : read_jsonl_file(pairs_path)) {
    GroundTruthItem item;
    item.pair = j.get<InstructionAnswerPair>();
    if (split && item.pair.split != *split) continue;
    if (item.pair.mask_ref) {
      auto it = cache.find(*item.pair.mask_ref);
      if (it == cache.end()) {
        it = cache.emplace(*item.pair.mask_ref, read_png_mask(dataset_root / *item.pair.mask_ref))
                 .first;
      }
      item.mask = it->second;
    }
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace cxrils
