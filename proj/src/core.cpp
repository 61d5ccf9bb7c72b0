#include "cxrils/core.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

namespace cxrils {

namespace {

constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "right lung",       "right apical zone",     "right upper zone lung",
    "right mid zone lung", "right lung base",    "left lung",
    "left apical zone", "left upper zone lung",  "left mid zone lung",
    "left lung base",
};

constexpr std::array<std::string_view, kLesionCount> kLesionNames = {
    "cardiomegaly", "pneumonia", "atelectasis", "opacity",
    "consolidation", "edema", "effusion",
};

template <typename Enum, std::size_t N>
std::optional<Enum> find_name(const std::array<std::string_view, N>& names,
                              std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

[[noreturn]] void bad_enum(std::string_view kind, std::string_view value) {
  throw DataError("unknown " + std::string(kind) + " '" + std::string(value) + "'");
}

}  // namespace

ImageGray::ImageGray(int width, int height, int bit_depth)
    : ImageGray(width, height,
                std::vector<std::uint16_t>(
                    static_cast<std::size_t>(std::max(width, 0)) *
                    static_cast<std::size_t>(std::max(height, 0))),
                bit_depth) {}

ImageGray::ImageGray(int width, int height, std::vector<std::uint16_t> pixels, int bit_depth)
    : width_(width), height_(height), bit_depth_(bit_depth), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0) throw DataError("negative image dimensions");
  if (bit_depth < 1 || bit_depth > 16) throw DataError("unsupported bit depth");
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DataError("pixel count does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  const int imax = max_intensity();
  for (auto v : pixels_) {
    if (v > imax) throw DataError("pixel intensity exceeds maximum for bit depth");
  }
}

void ImageGray::set(int row, int col, std::uint16_t value) {
  if (value > max_intensity()) throw DataError("pixel intensity exceeds maximum");
  pixels_[index(row, col)] = value;
}

RasterMask::RasterMask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DataError("negative mask dimensions");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

RasterMask RasterMask::from_pixels(int width, int height, std::span<const Pixel> pixels) {
  RasterMask m(width, height);
  for (const auto& p : pixels) m.insert(p.row, p.col);
  return m;
}

RasterMask RasterMask::full(int width, int height) {
  RasterMask m(width, height);
  std::fill(m.bits_.begin(), m.bits_.end(), std::uint8_t{1});
  return m;
}

RasterMask RasterMask::rectangle(int width, int height, int row0, int col0, int row1,
                                 int col1) {
  RasterMask m(width, height);
  for (int r = std::max(row0, 0); r <= std::min(row1, height - 1); ++r) {
    for (int c = std::max(col0, 0); c <= std::min(col1, width - 1); ++c) {
      m.bits_[m.index(r, c)] = 1;
    }
  }
  return m;
}

void RasterMask::insert(int row, int col) {
  if (!in_bounds(row, col)) {
    throw DataError("pixel (" + std::to_string(row) + "," + std::to_string(col) +
                    ") outside " + std::to_string(width_) + "x" + std::to_string(height_) +
                    " grid");
  }
  bits_[index(row, col)] = 1;
}

void RasterMask::erase(int row, int col) {
  if (in_bounds(row, col)) bits_[index(row, col)] = 0;
}

bool RasterMask::empty() const {
  return std::none_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

std::size_t RasterMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

std::vector<Pixel> RasterMask::members() const {
  std::vector<Pixel> out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (bits_[index(r, c)]) out.push_back({r, c});
    }
  }
  return out;
}

std::optional<Extent> RasterMask::extent() const {
  std::optional<Extent> e;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (!bits_[index(r, c)]) continue;
      if (!e) {
        e = Extent{r, r, c, c};
      } else {
        e->max_row = r;
        e->min_col = std::min(e->min_col, c);
        e->max_col = std::max(e->max_col, c);
      }
    }
  }
  return e;
}

void RasterMask::require_same_shape(const RasterMask& other, const char* op) const {
  if (!same_shape(other)) {
    throw DataError(std::string(op) + ": mask size mismatch " + std::to_string(width_) + "x" +
                    std::to_string(height_) + " vs " + std::to_string(other.width_) + "x" +
                    std::to_string(other.height_));
  }
}

RasterMask& RasterMask::operator|=(const RasterMask& other) {
  require_same_shape(other, "union");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

RasterMask& RasterMask::operator&=(const RasterMask& other) {
  require_same_shape(other, "intersection");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

RasterMask& RasterMask::operator-=(const RasterMask& other) {
  require_same_shape(other, "difference");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (other.bits_[i]) bits_[i] = 0;
  }
  return *this;
}

bool RasterMask::intersects(const RasterMask& other) const {
  require_same_shape(other, "intersects");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && other.bits_[i]) return true;
  }
  return false;
}

bool RasterMask::subset_of(const RasterMask& other) const {
  require_same_shape(other, "subset");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

std::string_view to_string(AnatomicalLabel label) {
  return kLabelNames[static_cast<std::size_t>(label)];
}

std::optional<AnatomicalLabel> try_parse_label(std::string_view name) {
  return find_name<AnatomicalLabel>(kLabelNames, name);
}

AnatomicalLabel parse_label(std::string_view name) {
  if (auto l = try_parse_label(name)) return *l;
  bad_enum("anatomical label", name);
}

LabelSet::LabelSet(std::initializer_list<AnatomicalLabel> labels) {
  for (auto l : labels) insert(l);
}

std::size_t LabelSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<AnatomicalLabel> LabelSet::labels() const {
  std::vector<AnatomicalLabel> out;
  for (auto l : kAllLabels) {
    if (contains(l)) out.push_back(l);
  }
  return out;
}

std::string_view to_string(LesionType lesion) {
  return kLesionNames[static_cast<std::size_t>(lesion)];
}

std::optional<LesionType> try_parse_lesion(std::string_view name) {
  return find_name<LesionType>(kLesionNames, name);
}

LesionType parse_lesion(std::string_view name) {
  if (auto l = try_parse_lesion(name)) return *l;
  bad_enum("lesion type", name);
}

std::string_view to_string(Presence v) { return v == Presence::Positive ? "positive" : "negative"; }
std::string_view to_string(Certainty v) {
  return v == Certainty::Definitive ? "definitive" : "tentative";
}
std::string_view to_string(Polarity v) { return v == Polarity::Positive ? "positive" : "negative"; }

std::string_view to_string(Split v) {
  switch (v) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

std::string_view to_string(TemplateType v) {
  switch (v) {
    case TemplateType::Basic: return "basic";
    case TemplateType::Global: return "global";
    case TemplateType::LesionInference: return "lesion_inference";
  }
  return "basic";
}

Presence parse_presence(std::string_view s) {
  if (s == "positive") return Presence::Positive;
  if (s == "negative") return Presence::Negative;
  bad_enum("presence", s);
}

Certainty parse_certainty(std::string_view s) {
  if (s == "definitive") return Certainty::Definitive;
  if (s == "tentative") return Certainty::Tentative;
  bad_enum("certainty", s);
}

Polarity parse_polarity(std::string_view s) {
  if (s == "positive") return Polarity::Positive;
  if (s == "negative") return Polarity::Negative;
  bad_enum("polarity", s);
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  bad_enum("split", s);
}

TemplateType parse_template_type(std::string_view s) {
  if (s == "basic") return TemplateType::Basic;
  if (s == "global") return TemplateType::Global;
  if (s == "lesion_inference") return TemplateType::LesionInference;
  bad_enum("template type", s);
}

std::optional<LesionType> StructuredFinding::target_lesion() const {
  if (predicted_lesion) return predicted_lesion;
  std::string lowered;
  lowered.reserve(entity.size());
  for (char ch : entity) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (auto l = try_parse_lesion(lowered)) return l;
  // Entities such as "pleural effusion" or "opacities" name a lesion inside a
  // longer phrase; pick the first lesion name that occurs as a prefix of a word.
  for (auto lesion : kAllLesions) {
    auto name = to_string(lesion);
    std::string_view stem = name;
    if (lesion == LesionType::Opacity) stem = "opacit";
    for (std::size_t pos = lowered.find(stem); pos != std::string::npos;
         pos = lowered.find(stem, pos + 1)) {
      if (pos == 0 || lowered[pos - 1] == ' ') return lesion;
    }
  }
  return std::nullopt;
}

std::optional<std::string> StructuredFinding::violation() const {
  if (entity.empty()) return "entity";
  if (sentence_index < 1) return "sentence_index";
  if (presence == Presence::Positive && reported_locations.empty() && !whole_heart()) {
    return "reported_locations";
  }
  return std::nullopt;
}

std::optional<std::string> DetectionBox::violation(int width, int height) const {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    return "confidence " + std::to_string(confidence) + " outside [0,1]";
  }
  if (x_min > x_max || y_min > y_max) return "inverted bbox";
  if (x_min < 0 || y_min < 0 || x_max >= width || y_max >= height) {
    return "bbox outside " + std::to_string(width) + "x" + std::to_string(height) + " image";
  }
  return std::nullopt;
}

bool ThresholdSet::valid() const {
  for (double v : {tau_ano, tau_anatomy, tau_conf, tau_signal, tau_size}) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

}  // namespace cxrils
