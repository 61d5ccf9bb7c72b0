// Randomised oracle comparisons shared by the unit and acceptance suites.
#pragma once

#include <random>
#include <sstream>
#include <string>

#include "cxrils/grounding.hpp"
#include "cxrils/eval.hpp"
#include "cxrils/raster_ops.hpp"
#include "support.hpp"

namespace testing_support {

/// Empty string on agreement, otherwise a description of the mismatch.
inline std::string check_box_filter_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 32), nbox(0, 6), pct(0, 100);
  std::uniform_real_distribution<double> dens(0.05, 0.8);
  const int w = dim(rng), h = dim(rng);
  const Grid anomaly = random_grid(rng, w, h, dens(rng));
  auto rand_rect = [&] {
    std::uniform_int_distribution<int> rr(0, h - 1), cc(0, w - 1);
    int r0 = rr(rng), r1 = rr(rng), c0 = cc(rng), c1 = cc(rng);
    if (r0 > r1) std::swap(r0, r1);
    if (c0 > c1) std::swap(c0, c1);
    return std::array<int, 4>{c0, r0, c1, r1};
  };
  auto rect_or_noise = [&] {
    if (std::bernoulli_distribution(0.5)(rng)) return random_grid(rng, w, h, dens(rng));
    auto r = rand_rect();
    return rect_grid(w, h, r[1], r[0], r[3], r[2]);
  };
  const Grid anatomy = rect_or_noise();
  const Grid right = rect_or_noise();
  const Grid left = rect_or_noise();
  const int t_anat = pct(rng), t_conf = pct(rng), t_sig = pct(rng), t_size = pct(rng);
  cxrils::ThresholdSet th{0.1, t_anat / 100.0, t_conf / 100.0, t_sig / 100.0, t_size / 100.0};

  const int n = nbox(rng);
  std::vector<cxrils::DetectionBox> boxes;
  std::vector<int> confs;
  for (int i = 0; i < n; ++i) {
    auto r = rand_rect();
    confs.push_back(pct(rng));
    boxes.push_back({"Lung Opacity", confs.back() / 100.0, r[0], r[1], r[2], r[3]});
  }
  auto verdicts = cxrils::filter_boxes(boxes, to_mask(anatomy), to_mask(anomaly), to_mask(right),
                                       to_mask(left), th);
  std::ostringstream err;
  if (verdicts.size() != boxes.size()) return "verdict count";
  std::vector<std::array<int, 4>> accepted_rects;
  std::vector<cxrils::DetectionBox> accepted_boxes;
  for (int i = 0; i < n; ++i) {
    const auto& b = boxes[static_cast<std::size_t>(i)];
    const Grid bg = rect_grid(w, h, b.y_min, b.x_min, b.y_max, b.x_max);
    const bool c1 = ratio_at_least(count_and(bg, anatomy), count_or(bg, anatomy), t_anat);
    const bool c2 = confs[static_cast<std::size_t>(i)] >= t_conf;
    const bool c3 = ratio_at_least(count_and(bg, anomaly), count(bg), t_sig);
    const bool c4 = ratio_at_least(count_and(bg, right), count_or(bg, right), t_size) ||
                    ratio_at_least(count_and(bg, left), count_or(bg, left), t_size);
    const auto& v = verdicts[static_cast<std::size_t>(i)];
    if (v.box_index != i || v.c1 != c1 || v.c2 != c2 || v.c3 != c3 || v.c4 != c4 ||
        v.accepted != (c1 && c2 && c3 && c4)) {
      err << "box " << i << " on " << w << "x" << h << ": got " << v.c1 << v.c2 << v.c3 << v.c4
          << " want " << c1 << c2 << c3 << c4;
      return err.str();
    }
    if (c1 && c2 && c3 && c4) {
      accepted_rects.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
      accepted_boxes.push_back(b);
    }
  }
  const auto mask = cxrils::extract_lesion_mask(accepted_boxes, to_mask(anomaly));
  if (to_grid(mask) != union_of_hit_components(anomaly, accepted_rects)) {
    err << "lesion mask differs on " << w << "x" << h << " with " << accepted_rects.size()
        << " accepted boxes";
    return err.str();
  }
  return {};
}

/// Random prediction set scored by the library and by plain pixel loops.
inline std::string check_metric_instance(std::mt19937_64& rng) {
  using namespace cxrils;
  std::uniform_int_distribution<int> npairs(1, 12), dim(1, 12);
  std::bernoulli_distribution coin(0.5), rare(0.15);
  const int w = dim(rng), h = dim(rng);
  std::vector<GroundTruthItem> truth;
  std::vector<Prediction> preds;
  double iou_sum = 0;
  long inter = 0, uni = 0, positives = 0, negatives = 0, neg_ok = 0;
  const int n = npairs(rng);
  for (int i = 0; i < n; ++i) {
    GroundTruthItem t;
    t.pair.pair_id = "p" + std::to_string(i);
    t.pair.lesion = kAllLesions[static_cast<std::size_t>(i) % kLesionCount];
    const bool positive = coin(rng);
    t.pair.polarity = positive ? Polarity::Positive : Polarity::Negative;
    Grid gt = make_grid(w, h);
    if (positive) {
      gt = random_grid(rng, w, h, 0.4);
      t.mask = to_mask(gt);
    }
    truth.push_back(t);
    const bool missing = rare(rng);
    Grid pg = random_grid(rng, w, h, coin(rng) ? 0.4 : 0.0);
    if (!missing) preds.push_back({t.pair.pair_id, to_mask(pg), ""});
    if (positive) {
      ++positives;
      const long i_ = missing ? 0 : count_and(pg, gt);
      const long u_ = missing ? count(gt) : count_or(pg, gt);
      inter += i_;
      uni += u_;
      iou_sum += u_ == 0 ? 0.0 : static_cast<double>(i_) / static_cast<double>(u_);
    } else {
      ++negatives;
      neg_ok += (missing || count(pg) == 0) ? 1 : 0;
    }
  }
  const auto s = score_segmentation(preds, truth).overall;
  std::ostringstream err;
  auto near = [](std::optional<double> got, double want) { return got && std::abs(*got - want) <= 1e-9; };
  if (positives) {
    const double giou = iou_sum / static_cast<double>(positives);
    const double ciou = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    if (!near(s.giou(), giou)) err << "giou " << s.giou().value_or(-1) << " vs " << giou << "; ";
    if (!near(s.ciou(), ciou)) err << "ciou " << s.ciou().value_or(-1) << " vs " << ciou << "; ";
  } else if (s.giou() || s.ciou()) {
    err << "iou metrics defined without positives; ";
  }
  if (negatives) {
    const double nacc = static_cast<double>(neg_ok) / static_cast<double>(negatives);
    if (!near(s.n_acc(), nacc)) err << "n_acc " << s.n_acc().value_or(-1) << " vs " << nacc;
  } else if (s.n_acc()) {
    err << "n_acc defined without negatives";
  }
  return err.str();
}

}  // namespace testing_support
