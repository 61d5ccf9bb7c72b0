#include "cxrils/grounding.hpp"

#include <cmath>
#include <set>

#include "cxrils/raster_ops.hpp"
#include "cxrils/study.hpp"

namespace cxrils {

RasterMask AnomalyMap::threshold(double tau_ano) const {
  RasterMask out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (at(r, c) >= tau_ano) out.insert(r, c);
    }
  }
  return out;
}

AnomalyMap compute_anomaly_map(const ImageGray& image, const ImageGray& edited, double tau_ano) {
  if (image.width() != edited.width() || image.height() != edited.height()) {
    throw DataError("anomaly map: image " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + " vs edited " +
                    std::to_string(edited.width()) + "x" + std::to_string(edited.height()));
  }
  if (image.bit_depth() != edited.bit_depth()) throw DataError("anomaly map: bit depth mismatch");
  AnomalyMap out;
  out.width = image.width();
  out.height = image.height();
  const double imax = image.max_intensity();
  out.raw.resize(image.pixels().size());
  for (std::size_t i = 0; i < out.raw.size(); ++i) {
    out.raw[i] = (static_cast<double>(image.pixels()[i]) - edited.pixels()[i]) / imax;
  }
  out.thresholded = out.threshold(tau_ano);
  return out;
}

std::vector<BoxFilterVerdict> filter_boxes(const std::vector<DetectionBox>& boxes,
                                           const RasterMask& anatomy_union,
                                           const RasterMask& anomaly, const RasterMask& right_lung,
                                           const RasterMask& left_lung,
                                           const ThresholdSet& thresholds) {
  std::vector<BoxFilterVerdict> out;
  out.reserve(boxes.size());
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    const auto& box = boxes[j];
    auto b = box_to_mask(box, anomaly.width(), anomaly.height());
    BoxFilterVerdict v;
    v.box_index = static_cast<int>(j);
    v.anatomy_iou = iou(b, anatomy_union);
    v.signal_ratio = containment_ratio(b, anomaly);
    v.right_lung_iou = iou(b, right_lung);
    v.left_lung_iou = iou(b, left_lung);
    v.c1 = v.anatomy_iou >= thresholds.tau_anatomy;
    v.c2 = box.confidence >= thresholds.tau_conf;
    v.c3 = v.signal_ratio >= thresholds.tau_signal;
    v.c4 = v.right_lung_iou >= thresholds.tau_size || v.left_lung_iou >= thresholds.tau_size;
    v.accepted = v.c1 && v.c2 && v.c3 && v.c4;
    out.push_back(v);
  }
  return out;
}

RasterMask extract_lesion_mask(const std::vector<DetectionBox>& accepted_boxes,
                               const RasterMask& anomaly, const ComponentRefiner& refine) {
  RasterMask out(anomaly.width(), anomaly.height());
  if (accepted_boxes.empty()) return out;
  auto components = connected_components(anomaly);
  std::vector<int> label(anomaly.bits().size(), -1);
  for (std::size_t k = 0; k < components.size(); ++k) {
    for (const auto& p : components[k].members()) {
      label[static_cast<std::size_t>(p.row) * anomaly.width() + p.col] = static_cast<int>(k);
    }
  }
  std::set<int> hit;
  for (const auto& box : accepted_boxes) {
    box_to_mask(box, anomaly.width(), anomaly.height());  // bounds check
    for (int r = box.y_min; r <= box.y_max; ++r) {
      for (int c = box.x_min; c <= box.x_max; ++c) {
        const int k = label[static_cast<std::size_t>(r) * anomaly.width() + c];
        if (k >= 0) hit.insert(k);
      }
    }
  }
  for (int k : hit) {
    const auto& comp = components[static_cast<std::size_t>(k)];
    if (refine) {
      out |= refine(comp);
    } else {
      out |= comp;
    }
  }
  return out;
}

RasterMask refine(const RasterMask& component, const ImageGray& image, LesionType lesion,
                  const LungMasks& lungs, const RefineConfig& cfg) {
  auto opened = opening(component, cfg.noise_iterations);

  RasterMask kept(component.width(), component.height());
  const auto right_area = static_cast<double>(lungs.right.count());
  const auto left_area = static_cast<double>(lungs.left.count());
  for (const auto& comp : connected_components(opened)) {
    const auto in_right = intersection_count(comp, lungs.right);
    const auto in_left = intersection_count(comp, lungs.left);
    double lung_area = 0.0;
    if (in_right == 0 && in_left == 0) {
      lung_area = std::max(right_area, left_area);
    } else {
      lung_area = in_right >= in_left ? right_area : left_area;
    }
    if (static_cast<double>(comp.count()) >= cfg.min_area_fraction * lung_area) kept |= comp;
  }

  auto grown = intensity_expand(kept, image, cfg.delta, cfg.max_rounds);

  if (lesion == LesionType::Effusion && !grown.empty()) {
    const std::pair<const RasterMask*, const RasterMask*> sides[] = {
        {&lungs.right_base, &lungs.right},
        {&lungs.left_base, &lungs.left},
    };
    for (auto [base, lung] : sides) {
      if (base->empty() || !grown.intersects(*base)) continue;
      auto ext = lung->extent();
      if (!ext) continue;
      const int span = ext->max_row - ext->min_row + 1;
      const int rows = static_cast<int>(std::ceil(cfg.base_fraction * span - 1e-9));
      if (rows <= 0) continue;
      const int first = ext->max_row - rows + 1;
      auto band = RasterMask::rectangle(lung->width(), lung->height(), first, 0, ext->max_row,
                                        lung->width() - 1);
      grown |= band & *lung;
    }
  }
  return grown;
}

LabelSet empty_locations(const std::array<RasterMask, kLabelCount>& anatomy, LabelSet reported) {
  std::optional<RasterMask> reported_union;
  for (auto l : reported.labels()) {
    const auto& m = anatomy[static_cast<std::size_t>(l)];
    if (!reported_union) {
      reported_union = m;
    } else {
      *reported_union |= m;
    }
  }
  LabelSet out;
  for (auto l : kAllLabels) {
    const auto& m = anatomy[static_cast<std::size_t>(l)];
    if (m.empty()) continue;
    if (reported_union && m.intersects(*reported_union)) continue;
    out.insert(l);
  }
  return out;
}

std::optional<GroundedLesion> verify_locations(const StructuredFinding& finding, LesionType lesion,
                                               const RasterMask& lesion_mask,
                                               const std::array<RasterMask, kLabelCount>& anatomy,
                                               LabelSet all_reported_labels) {
  GroundedLesion g;
  g.lesion = lesion;
  g.certainty = finding.certainty;
  g.reported_locations = finding.reported_locations;
  g.source_finding_index = finding.sentence_index;
  for (auto l : finding.reported_locations.labels()) {
    if (anatomy[static_cast<std::size_t>(l)].intersects(lesion_mask)) g.grounded_locations.insert(l);
  }
  if (g.grounded_locations.empty()) return std::nullopt;
  g.empty_locations =
      empty_locations(anatomy, all_reported_labels | finding.reported_locations) -
      finding.reported_locations;
  g.mask = lesion_mask;
  return g;
}

ThresholdSet GroundingConfig::thresholds_for(LesionType lesion) const {
  if (auto it = overrides.find(lesion); it != overrides.end()) return it->second;
  return lesion == LesionType::Edema ? edema : general;
}

std::vector<GroundedLesion> StudyGrounding::lesions() const {
  std::vector<GroundedLesion> out;
  for (const auto& f : findings) {
    if (f.grounded) out.push_back(*f.grounded);
  }
  return out;
}

StudyGrounding ground_study(const StudyData& study, const std::vector<StructuredFinding>& findings,
                            const GroundingConfig& cfg) {
  StudyGrounding out;
  for (const auto& f : findings) {
    if (f.presence == Presence::Positive) out.all_reported = out.all_reported | f.reported_locations;
  }
  out.empty = empty_locations(study.anatomy, out.all_reported);

  const auto anomaly = compute_anomaly_map(study.image, study.edited, cfg.general.tau_ano);
  std::map<double, RasterMask> denoised;  // keyed by tau_ano
  auto anomaly_set = [&](double tau) -> const RasterMask& {
    auto it = denoised.find(tau);
    if (it == denoised.end()) {
      it = denoised.emplace(tau, opening(anomaly.threshold(tau), cfg.refine.noise_iterations)).first;
    }
    return it->second;
  };

  const LungMasks lungs{study.organs.right_lung, study.organs.left_lung,
                        study.anatomy_mask(AnatomicalLabel::RightLungBase),
                        study.anatomy_mask(AnatomicalLabel::LeftLungBase)};

  for (std::size_t i = 0; i < findings.size(); ++i) {
    const auto& f = findings[i];
    FindingGrounding fg;
    fg.finding_index = static_cast<int>(i);
    fg.finding = f;
    fg.lesion = f.target_lesion();
    if (f.presence == Presence::Negative) {
      fg.rejection = "negative finding";
    } else if (!fg.lesion) {
      fg.rejection = "not a target lesion";
    } else if (*fg.lesion == LesionType::Cardiomegaly) {
      GroundedLesion g;
      g.lesion = LesionType::Cardiomegaly;
      g.certainty = f.certainty;
      g.mask = study.organs.heart;
      g.source_finding_index = f.sentence_index;
      g.empty_locations = out.empty;
      fg.grounded = std::move(g);
    } else {
      const auto th = cfg.thresholds_for(*fg.lesion);
      const auto& a = anomaly_set(th.tau_ano);
      fg.verdicts = filter_boxes(study.detections, study.anatomy_union(f.reported_locations), a,
                                 study.organs.right_lung, study.organs.left_lung, th);
      std::vector<DetectionBox> accepted;
      for (const auto& v : fg.verdicts) {
        if (v.accepted) accepted.push_back(study.detections[static_cast<std::size_t>(v.box_index)]);
      }
      if (accepted.empty()) {
        fg.rejection = "no accepted box";
      } else {
        const LesionType lesion = *fg.lesion;
        auto mask = extract_lesion_mask(accepted, a, [&](const RasterMask& c) {
          return refine(c, study.image, lesion, lungs, cfg.refine);
        });
        fg.grounded = verify_locations(f, lesion, mask, study.anatomy, out.all_reported);
        if (!fg.grounded) fg.rejection = mask.empty() ? "empty lesion mask" : "mask failed to ground";
      }
    }
    out.findings.push_back(std::move(fg));
  }
  return out;
}

}  // namespace cxrils
