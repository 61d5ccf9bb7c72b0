#include "cxrils/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "cxrils/png_io.hpp"
#include "cxrils/raster_ops.hpp"

namespace cxrils {

namespace fs = std::filesystem;

namespace {

constexpr int kMargin = 4;

bool is_right(AnatomicalLabel l) { return static_cast<int>(l) < 5; }

/// Band index 0..3 for zone labels, -1 for whole-lung labels.
int band_of(AnatomicalLabel l) {
  switch (l) {
    case AnatomicalLabel::RightApicalZone:
    case AnatomicalLabel::LeftApicalZone:
      return 0;
    case AnatomicalLabel::RightUpperZone:
    case AnatomicalLabel::LeftUpperZone:
      return 1;
    case AnatomicalLabel::RightMidZone:
    case AnatomicalLabel::LeftMidZone:
      return 2;
    case AnatomicalLabel::RightLungBase:
    case AnatomicalLabel::LeftLungBase:
      return 3;
    default:
      return -1;
  }
}

AnatomicalLabel zone_label(bool right, int band) {
  static constexpr AnatomicalLabel kRight[] = {
      AnatomicalLabel::RightApicalZone, AnatomicalLabel::RightUpperZone,
      AnatomicalLabel::RightMidZone, AnatomicalLabel::RightLungBase};
  static constexpr AnatomicalLabel kLeft[] = {
      AnatomicalLabel::LeftApicalZone, AnatomicalLabel::LeftUpperZone,
      AnatomicalLabel::LeftMidZone, AnatomicalLabel::LeftLungBase};
  return right ? kRight[band] : kLeft[band];
}

struct Region {
  bool right = true;
  int band_lo = 0;
  int band_hi = 3;
};

std::vector<Region> regions_of(const LabelSet& zones) {
  std::vector<Region> out;
  for (bool right : {true, false}) {
    int lo = 4;
    int hi = -1;
    std::vector<int> bands;
    for (auto l : zones.labels()) {
      if (is_right(l) != right) continue;
      const int b = band_of(l);
      if (b < 0) {
        bands = {0, 1, 2, 3};
        break;
      }
      bands.push_back(b);
    }
    if (bands.empty()) continue;
    std::sort(bands.begin(), bands.end());
    bands.erase(std::unique(bands.begin(), bands.end()), bands.end());
    lo = bands.front();
    hi = bands.back();
    if (hi - lo + 1 != static_cast<int>(bands.size())) {
      throw DataError("placement zones on one side must be contiguous");
    }
    out.push_back({right, lo, hi});
  }
  return out;
}

std::uint16_t background(const PhantomGeometry& g, int row) {
  return static_cast<std::uint16_t>(
      std::lround(100.0 + 8.0 * row / std::max(1, g.height - 1)));
}

std::string lesion_noun(LesionType l, Rng& rng, bool varied) {
  if (!varied) return std::string(to_string(l));
  if (l == LesionType::Effusion) return rng.chance(0.5) ? "pleural effusion" : "effusion";
  if (l == LesionType::Edema) return rng.chance(0.3) ? "pulmonary edema" : "edema";
  return std::string(to_string(l));
}

std::string canonical_phrase(LabelSet s) {
  std::vector<std::string> names;
  for (auto l : s.labels()) names.emplace_back(to_string(l));
  return join(names, " and ");
}

std::string location_words(LabelSet s, Rng& rng, bool varied) {
  const auto canonical = canonical_phrase(s);
  if (!varied) return canonical;
  using L = AnatomicalLabel;
  const std::vector<std::pair<LabelSet, std::vector<std::string>>> options = {
      {LabelSet{L::RightLungBase, L::LeftLungBase}, {"bibasilar", "lower lung", "lung bases"}},
      {LabelSet{L::RightApicalZone, L::LeftApicalZone}, {"apices"}},
      {LabelSet{L::RightUpperZone, L::LeftUpperZone}, {"upper lobes", "upper lungs"}},
      {LabelSet{L::RightMidZone, L::LeftMidZone}, {"mid lungs"}},
      {LabelSet{L::RightLungBase}, {"right base", "right lower lobe"}},
      {LabelSet{L::LeftLungBase}, {"left base", "left lower lobe", "retrocardiac"}},
      {LabelSet{L::RightApicalZone}, {"right apex"}},
      {LabelSet{L::LeftApicalZone}, {"left apex"}},
      {LabelSet{L::RightUpperZone}, {"right upper lobe"}},
      {LabelSet{L::LeftUpperZone}, {"left upper lobe"}},
      {LabelSet{L::RightMidZone}, {"right middle lobe"}},
      {LabelSet{L::LeftMidZone}, {"lingula"}},
  };
  for (const auto& [set, words] : options) {
    if (set != s) continue;
    const auto k = rng.index(words.size() + 1);
    return k == words.size() ? canonical : words[k];
  }
  return canonical;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string finding_sentence(const LesionPlacement& p, Rng& rng, bool varied) {
  const auto noun = lesion_noun(p.lesion, rng, varied);
  if (p.lesion == LesionType::Cardiomegaly) {
    if (!varied) return "Cardiomegaly.";
    static const char* kForms[] = {"Cardiomegaly.", "Mild cardiomegaly.", "Moderate cardiomegaly."};
    return kForms[rng.index(3)];
  }
  const auto loc = location_words(p.zones, rng, varied);
  const bool tentative = p.certainty == Certainty::Tentative;
  if (!varied) {
    return capitalize((tentative ? "possibly " : "") + noun + " in the " + loc + ".");
  }
  const bool opacity_form_ok = p.lesion != LesionType::Opacity;
  const auto form = rng.index(opacity_form_ok ? 3 : 2);
  std::string s;
  if (form == 0) {
    s = loc + " " + noun;
    if (tentative) s = "possibly " + s;
  } else if (form == 1) {
    s = noun + " in the " + loc;
    if (tentative) s = "possibly " + s;
  } else {
    std::string link = "is";
    if (tentative) link = rng.chance(0.5) ? "may represent" : "is suggestive of";
    s = "the " + loc + " opacity " + link + " " + noun;
  }
  return capitalize(s) + ".";
}

RasterMask draw_blob(const PhantomGeometry& g, const Region& region, const LesionPlacement& p,
                     Rng& rng) {
  const int c0 = region.right ? g.right_c0 : g.left_c0;
  const int c1 = region.right ? g.right_c1 : g.left_c1;
  const int r0 = g.band_rows(region.band_lo).first;
  const int r1 = g.band_rows(region.band_hi).second;
  if (p.shape == LesionShape::BasalBand) {
    if (region.band_hi != 3) throw DataError("basal band placement must include a lung base");
    const int lung_h = g.lung_bottom - g.lung_top + 1;
    const int band_h =
        std::clamp(static_cast<int>(std::lround(p.band_fraction * lung_h)), 1, r1 - r0 + 1);
    return RasterMask::rectangle(g.width, g.height, g.lung_bottom - band_h + 1, c0, g.lung_bottom,
                                 c1);
  }
  const int avail_h = (r1 - r0 + 1) - 2 * kMargin;
  const int avail_w = (c1 - c0 + 1) - 2 * kMargin;
  if (avail_h < 3 || avail_w < 3) throw DataError("image too small for lesion placement");
  const double scale = std::clamp(p.size_scale, 0.05, 1.0);
  const int bh = std::max(3, static_cast<int>(std::lround(avail_h * scale)));
  const int bw = std::max(3, static_cast<int>(std::lround(avail_w * scale)));
  const int top = r0 + kMargin + rng.range(0, avail_h - bh);
  const int left = c0 + kMargin + rng.range(0, avail_w - bw);
  if (p.shape == LesionShape::Rectangle) {
    return RasterMask::rectangle(g.width, g.height, top, left, top + bh - 1, left + bw - 1);
  }
  RasterMask m(g.width, g.height);
  const double cr = top + (bh - 1) / 2.0;
  const double cc = left + (bw - 1) / 2.0;
  const double ar = bh / 2.0;
  const double ac = bw / 2.0;
  for (int r = top; r < top + bh; ++r) {
    for (int c = left; c < left + bw; ++c) {
      const double y = (r - cr) / ar;
      const double x = (c - cc) / ac;
      if (x * x + y * y <= 1.0) m.insert(r, c);
    }
  }
  return m;
}

std::string detection_label(LesionType l) {
  switch (l) {
    case LesionType::Atelectasis: return "Atelectasis";
    case LesionType::Consolidation: return "Consolidation";
    case LesionType::Edema: return "Infiltration";
    case LesionType::Effusion: return "Pleural effusion";
    default: return "Lung Opacity";
  }
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

RasterMask shift_cols(const RasterMask& m, int dc) {
  RasterMask out(m.width(), m.height());
  for (const auto& p : m.members()) {
    if (out.in_bounds(p.row, p.col + dc)) out.insert(p.row, p.col + dc);
  }
  return out;
}

}  // namespace

std::string_view to_string(LesionShape s) {
  switch (s) {
    case LesionShape::Ellipse: return "ellipse";
    case LesionShape::Rectangle: return "rectangle";
    case LesionShape::BasalBand: return "basal_band";
  }
  return "ellipse";
}

PhantomGeometry PhantomGeometry::for_size(int width, int height) {
  if (width < 64 || height < 64) throw DataError("phantom images must be at least 64x64");
  PhantomGeometry g;
  g.width = width;
  g.height = height;
  g.lung_top = height * 32 / 256;
  g.lung_bottom = height * 224 / 256 - 1;
  g.right_c0 = width * 22 / 256;
  g.right_c1 = width * 110 / 256 - 1;
  g.left_c0 = width * 146 / 256;
  g.left_c1 = width * 234 / 256 - 1;
  g.heart_top = height * 120 / 256;
  g.heart_bottom = height * 216 / 256 - 1;
  return g;
}

std::pair<int, int> PhantomGeometry::band_rows(int band) const {
  const int h = lung_bottom - lung_top + 1;
  return {lung_top + band * h / 4, lung_top + (band + 1) * h / 4 - 1};
}

RasterMask PhantomGeometry::zone_mask(AnatomicalLabel label) const {
  const bool right = is_right(label);
  const int c0 = right ? right_c0 : left_c0;
  const int c1 = right ? right_c1 : left_c1;
  const int b = band_of(label);
  if (b < 0) return RasterMask::rectangle(width, height, lung_top, c0, lung_bottom, c1);
  auto [r0, r1] = band_rows(b);
  return RasterMask::rectangle(width, height, r0, c0, r1, c1);
}

RasterMask PhantomGeometry::heart_mask(double ctr) const {
  const int w = std::clamp(static_cast<int>(std::lround(ctr * thoracic_width())), 1, width);
  const int c0 = std::max(0, width / 2 - w / 2);
  return RasterMask::rectangle(width, height, heart_top, c0, heart_bottom, c0 + w - 1);
}

json OracleTruth::to_json() const {
  json j{{"study_id", study_id}, {"ctr", ctr}, {"report", report}};
  j["negated"] = json::array();
  for (auto l : negated) j["negated"].push_back(std::string(to_string(l)));
  j["lesions"] = json::array();
  for (const auto& l : lesions) {
    j["lesions"].push_back({{"lesion", to_string(l.lesion)},
                            {"certainty", to_string(l.certainty)},
                            {"zones", l.zones},
                            {"mask", l.mask_path},
                            {"pixels", l.mask.count()}});
  }
  return j;
}

SynthStudy make_study(const SynthSpec& spec, const fs::path& root) {
  if (spec.study_id.empty()) throw DataError("synthetic study needs an id");
  const auto g = PhantomGeometry::for_size(spec.width, spec.height);
  Rng rng(spec.seed ^ fnv1a64(spec.study_id));
  const fs::path dir = root / spec.study_id;
  fs::create_directories(dir / "anatomy");
  fs::create_directories(dir / "organs");
  fs::create_directories(dir / "oracle");

  ImageGray edited(g.width, g.height, 8);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) edited.set(r, c, background(g, r));
  }
  ImageGray image = edited;
  const int imax = image.max_intensity();
  const auto heart = g.heart_mask(spec.ctr);

  OracleTruth truth;
  truth.study_id = spec.study_id;
  truth.ctr = spec.ctr;
  truth.negated = spec.negated;

  json detections = json::array();
  std::vector<std::vector<RasterMask>> blobs(spec.placements.size());
  for (std::size_t i = 0; i < spec.placements.size(); ++i) {
    const auto& p = spec.placements[i];
    if (!(p.peak_delta >= 0.0 && p.peak_delta <= 1.0)) {
      throw DataError("placement peak delta must lie in [0,1]");
    }
    OracleLesion ol;
    ol.lesion = p.lesion;
    ol.certainty = p.certainty;
    ol.zones = p.zones;
    if (p.lesion == LesionType::Cardiomegaly) {
      ol.mask = heart;
    } else {
      if (p.zones.empty()) throw DataError("lung lesion placement needs zone labels");
      ol.mask = RasterMask(g.width, g.height);
      for (const auto& region : regions_of(p.zones)) {
        auto blob = draw_blob(g, region, p, rng);
        ol.mask |= blob;
        blobs[i].push_back(std::move(blob));
      }
    }
    truth.lesions.push_back(std::move(ol));
  }

  for (std::size_t i = 0; i < truth.lesions.size(); ++i) {
    for (std::size_t j = i + 1; j < truth.lesions.size(); ++j) {
      const auto& a = truth.lesions[i];
      const auto& b = truth.lesions[j];
      if (a.lesion == b.lesion || a.lesion == LesionType::Cardiomegaly ||
          b.lesion == LesionType::Cardiomegaly) {
        continue;
      }
      if (morph(a.mask, MorphKind::Dilate, 1).intersects(b.mask)) {
        throw DataError("placements of " + std::string(to_string(a.lesion)) + " and " +
                        std::string(to_string(b.lesion)) + " touch");
      }
    }
  }

  for (std::size_t i = 0; i < spec.placements.size(); ++i) {
    const auto& p = spec.placements[i];
    if (p.lesion == LesionType::Cardiomegaly) continue;
    const auto add = static_cast<int>(std::lround(p.peak_delta * imax));
    for (const auto& px : truth.lesions[i].mask.members()) {
      image.set(px.row, px.col,
                static_cast<std::uint16_t>(std::min(imax, image.at(px.row, px.col) + add)));
    }
    for (const auto& blob : blobs[i]) {
      auto e = *blob.extent();
      const int j = spec.noise.jitter;
      int x0 = std::clamp(e.min_col + rng.range(-j, j), 0, g.width - 1);
      int x1 = std::clamp(e.max_col + rng.range(-j, j), 0, g.width - 1);
      int y0 = std::clamp(e.min_row + rng.range(-j, j), 0, g.height - 1);
      int y1 = std::clamp(e.max_row + rng.range(-j, j), 0, g.height - 1);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      double conf = rng.uniform(spec.noise.confidence_min, spec.noise.confidence_max);
      if (spec.noise.confidence_noise > 0) {
        conf += rng.uniform(-spec.noise.confidence_noise, spec.noise.confidence_noise);
      }
      conf = round3(std::clamp(conf, 0.0, 1.0));
      detections.push_back(DetectionBox{detection_label(p.lesion), conf, x0, y0, x1, y1});
    }
  }

  // False positives sit in zone cells without any lesion, so they carry no
  // anomaly signal.
  std::vector<AnatomicalLabel> free_cells;
  for (bool right : {true, false}) {
    for (int b = 0; b < 4; ++b) {
      auto cell = g.zone_mask(zone_label(right, b));
      bool used = false;
      for (const auto& l : truth.lesions) {
        if (l.lesion != LesionType::Cardiomegaly && l.mask.intersects(cell)) used = true;
      }
      if (!used) free_cells.push_back(zone_label(right, b));
    }
  }
  for (int k = 0; k < spec.noise.false_positives && !free_cells.empty(); ++k) {
    auto e = *g.zone_mask(free_cells[rng.index(free_cells.size())]).extent();
    const int h = std::max(3, (e.max_row - e.min_row + 1) / 2);
    const int w = std::max(3, (e.max_col - e.min_col + 1) / 3);
    const int y0 = e.min_row + rng.range(0, e.max_row - e.min_row + 1 - h);
    const int x0 = e.min_col + rng.range(0, e.max_col - e.min_col + 1 - w);
    detections.push_back(DetectionBox{"Nodule/Mass", round3(rng.uniform(0.2, 0.9)), x0, y0,
                                      x0 + w - 1, y0 + h - 1});
  }
  if (rng.chance(0.2)) {
    auto e = *heart.extent();
    detections.push_back(DetectionBox{"Aortic enlargement", round3(rng.uniform(0.3, 0.9)),
                                      e.min_col, std::max(0, e.min_row - 20), e.max_col,
                                      e.min_row});
  }

  std::vector<std::string> sentences;
  for (const auto& p : spec.placements) {
    sentences.push_back(finding_sentence(p, rng, spec.varied_wording));
  }
  for (auto l : spec.negated) {
    sentences.push_back("No " + lesion_noun(l, rng, spec.varied_wording) + ".");
  }
  if (sentences.empty()) sentences.emplace_back("No acute findings.");
  truth.report = join(sentences, " ");

  StudyRecord rec;
  rec.study_id = spec.study_id;
  rec.split = spec.split;
  rec.image = dir / "image.png";
  rec.edited_image = dir / "edited.png";
  rec.report = dir / "report.txt";
  rec.anatomy_mask_dir = dir / "anatomy";
  rec.detections = dir / "detections.json";
  rec.right_lung = dir / "organs" / "right_lung.png";
  rec.left_lung = dir / "organs" / "left_lung.png";
  rec.heart = dir / "organs" / "heart.png";
  rec.qc_flags = spec.qc_flags;

  write_png_gray(rec.image, image);
  write_png_gray(rec.edited_image, edited);
  write_text_atomic(rec.report, truth.report + "\n");
  write_text_atomic(rec.detections, detections.dump(1) + "\n");

  const int shift = spec.qc_mismatch ? static_cast<int>(std::lround(0.2 * g.width)) : 0;
  for (auto label : kAllLabels) {
    auto m = g.zone_mask(label);
    if (shift && band_of(label) < 0) m = shift_cols(m, is_right(label) ? shift : -shift);
    write_png_mask(rec.anatomy_mask_dir / anatomy_mask_filename(label), m);
  }
  write_png_mask(rec.anatomy_mask_dir / kAnatomyHeartFile, heart);
  write_png_mask(rec.right_lung, g.zone_mask(AnatomicalLabel::RightLung));
  write_png_mask(rec.left_lung, g.zone_mask(AnatomicalLabel::LeftLung));
  write_png_mask(rec.heart, heart);

  for (std::size_t i = 0; i < truth.lesions.size(); ++i) {
    auto& l = truth.lesions[i];
    l.mask_path = "oracle/" + std::to_string(i) + "_" + std::string(to_string(l.lesion)) + ".png";
    write_png_mask(dir / l.mask_path, l.mask);
  }
  write_text_atomic(dir / "oracle_truth.json", truth.to_json().dump(1) + "\n");
  return {rec, truth};
}

SynthSpec random_spec(const std::string& study_id, Rng& rng, const CorpusOptions& opts) {
  SynthSpec spec;
  spec.study_id = study_id;
  spec.width = opts.width;
  spec.height = opts.height;
  const double u = rng.unit();
  spec.split = u < 0.7 ? Split::Train : (u < 0.8 ? Split::Validation : Split::Test);
  spec.noise.jitter = opts.jitter;
  spec.noise.confidence_noise = opts.confidence_noise;
  if (opts.confidence_noise > 0) spec.noise.confidence_min = 0.4;
  spec.noise.false_positives = opts.false_positives;
  spec.seed = rng.next();

  const double v = rng.unit();
  const int n = v < 0.15 ? 0 : (v < 0.6 ? 1 : (v < 0.9 ? 2 : 3));
  std::vector<LesionType> types(kAllLesions.begin(), kAllLesions.end());
  rng.shuffle(types);

  bool used[2][4] = {};
  auto free_cell = [&](int side, int band) { return !used[side][band]; };
  bool cardiomegaly = false;
  for (int k = 0; k < n; ++k) {
    const auto lesion = types[static_cast<std::size_t>(k)];
    LesionPlacement p;
    p.lesion = lesion;
    if (lesion == LesionType::Cardiomegaly) {
      cardiomegaly = true;
      spec.placements.push_back(p);
      continue;
    }
    p.certainty = rng.chance(opts.tentative_rate) ? Certainty::Tentative : Certainty::Definitive;
    p.peak_delta = lesion == LesionType::Edema ? rng.uniform(0.06, 0.09) : rng.uniform(0.2, 0.45);
    std::vector<std::pair<int, int>> cells;
    bool multi = false;
    for (int attempt = 0; attempt < 20 && cells.empty(); ++attempt) {
      if (lesion == LesionType::Effusion) {
        if (rng.chance(0.25) && free_cell(0, 3) && free_cell(1, 3)) {
          cells = {{0, 3}, {1, 3}};
        } else {
          const int side = static_cast<int>(rng.index(2));
          if (free_cell(side, 3)) cells = {{side, 3}};
        }
        continue;
      }
      const double pattern = rng.unit();
      if (pattern < 0.6) {
        const int side = static_cast<int>(rng.index(2));
        const int band = static_cast<int>(rng.index(4));
        if (free_cell(side, band)) cells = {{side, band}};
      } else if (pattern < 0.8) {
        const int band = static_cast<int>(rng.index(4));
        if (free_cell(0, band) && free_cell(1, band)) cells = {{0, band}, {1, band}};
      } else {
        const int side = static_cast<int>(rng.index(2));
        const int band = static_cast<int>(rng.index(3));
        if (free_cell(side, band) && free_cell(side, band + 1)) {
          cells = {{side, band}, {side, band + 1}};
        }
      }
    }
    if (cells.empty()) continue;
    multi = cells.size() > 1;
    for (auto [side, band] : cells) {
      used[side][band] = true;
      p.zones.insert(zone_label(side == 0, band));
    }
    if (lesion == LesionType::Effusion) {
      p.shape = LesionShape::BasalBand;
      p.band_fraction = rng.uniform(0.16, 0.24);
    } else {
      p.shape = rng.chance(0.6) ? LesionShape::Ellipse : LesionShape::Rectangle;
      p.size_scale = multi ? rng.uniform(0.9, 1.0) : rng.uniform(0.85, 1.0);
    }
    spec.placements.push_back(p);
  }
  spec.ctr = cardiomegaly ? rng.uniform(0.5, 0.6) : rng.uniform(0.38, 0.52);

  for (auto l : kAllLesions) {
    bool placed = false;
    for (const auto& p : spec.placements) placed = placed || p.lesion == l;
    if (!placed && rng.chance(0.3)) spec.negated.push_back(l);
  }
  if (rng.chance(opts.qc_mismatch_rate)) spec.qc_mismatch = true;
  if (rng.chance(opts.qc_flag_rate)) spec.qc_flags.emplace_back("lateral_view");
  return spec;
}

Corpus make_corpus(const CorpusOptions& opts, const fs::path& root) {
  Corpus corpus;
  fs::create_directories(root);
  Rng rng(opts.seed);
  std::string manifest;
  for (int i = 0; i < opts.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "s%05d", i);
    auto spec = random_spec(id, rng, opts);
    auto study = make_study(spec, root);
    manifest += study_record_to_json(study.record, root).dump() + "\n";
    corpus.studies.push_back(std::move(study));
  }
  corpus.manifest = root / "manifest.jsonl";
  write_text_atomic(corpus.manifest, manifest);
  return corpus;
}

}  // namespace cxrils
