#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cxrils {

/// Raised for malformed or inconsistent input data (files, records, masks).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

/// Grayscale image, row-major. Intensities are bounded by 2^bit_depth - 1.
class ImageGray {
 public:
  ImageGray() = default;
  ImageGray(int width, int height, int bit_depth = 8);
  ImageGray(int width, int height, std::vector<std::uint16_t> pixels, int bit_depth = 8);

  int width() const { return width_; }
  int height() const { return height_; }
  int bit_depth() const { return bit_depth_; }
  int max_intensity() const { return (1 << bit_depth_) - 1; }

  std::uint16_t at(int row, int col) const { return pixels_[index(row, col)]; }
  void set(int row, int col, std::uint16_t value);
  std::span<const std::uint16_t> pixels() const { return pixels_; }

  bool operator==(const ImageGray&) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  int bit_depth_ = 8;
  std::vector<std::uint16_t> pixels_;
};

struct Extent {
  int min_row = 0;
  int max_row = 0;
  int min_col = 0;
  int max_col = 0;
};

/// Binary pixel set over a width x height grid. Stored as a bitmap; equality
/// is set equality over identically sized grids.
class RasterMask {
 public:
  RasterMask() = default;
  RasterMask(int width, int height);

  static RasterMask from_pixels(int width, int height, std::span<const Pixel> pixels);
  static RasterMask full(int width, int height);
  static RasterMask rectangle(int width, int height, int row0, int col0, int row1, int col1);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  bool same_shape(const RasterMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool contains(int row, int col) const {
    return in_bounds(row, col) && bits_[index(row, col)] != 0;
  }
  void insert(int row, int col);
  void erase(int row, int col);

  bool empty() const;
  std::size_t count() const;
  std::vector<Pixel> members() const;
  std::optional<Extent> extent() const;
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::uint8_t bit(std::size_t i) const { return bits_[i]; }

  RasterMask& operator|=(const RasterMask& other);
  RasterMask& operator&=(const RasterMask& other);
  RasterMask& operator-=(const RasterMask& other);
  friend RasterMask operator|(RasterMask a, const RasterMask& b) { return a |= b; }
  friend RasterMask operator&(RasterMask a, const RasterMask& b) { return a &= b; }
  friend RasterMask operator-(RasterMask a, const RasterMask& b) { return a -= b; }

  bool intersects(const RasterMask& other) const;
  bool subset_of(const RasterMask& other) const;

  bool operator==(const RasterMask&) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  void require_same_shape(const RasterMask& other, const char* op) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// The ten valid target locations. Enumerator order is the canonical phrase
// order: right before left, broad region first, then apical -> base.
enum class AnatomicalLabel : std::uint8_t {
  RightLung,
  RightApicalZone,
  RightUpperZone,
  RightMidZone,
  RightLungBase,
  LeftLung,
  LeftApicalZone,
  LeftUpperZone,
  LeftMidZone,
  LeftLungBase,
};

inline constexpr std::size_t kLabelCount = 10;
inline constexpr std::array<AnatomicalLabel, kLabelCount> kAllLabels = {
    AnatomicalLabel::RightLung,      AnatomicalLabel::RightApicalZone,
    AnatomicalLabel::RightUpperZone, AnatomicalLabel::RightMidZone,
    AnatomicalLabel::RightLungBase,  AnatomicalLabel::LeftLung,
    AnatomicalLabel::LeftApicalZone, AnatomicalLabel::LeftUpperZone,
    AnatomicalLabel::LeftMidZone,    AnatomicalLabel::LeftLungBase,
};

std::string_view to_string(AnatomicalLabel label);
std::optional<AnatomicalLabel> try_parse_label(std::string_view name);
AnatomicalLabel parse_label(std::string_view name);  // throws DataError

/// Small value-type set of anatomical labels, iterated in canonical order.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<AnatomicalLabel> labels);

  void insert(AnatomicalLabel label) { bits_ |= bit(label); }
  void erase(AnatomicalLabel label) { bits_ &= static_cast<std::uint16_t>(~bit(label)); }
  bool contains(AnatomicalLabel label) const { return (bits_ & bit(label)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<AnatomicalLabel> labels() const;
  std::uint16_t raw() const { return bits_; }

  bool subset_of(LabelSet other) const { return (bits_ & ~other.bits_) == 0; }
  friend LabelSet operator|(LabelSet a, LabelSet b) { return from_raw(a.bits_ | b.bits_); }
  friend LabelSet operator&(LabelSet a, LabelSet b) { return from_raw(a.bits_ & b.bits_); }
  friend LabelSet operator-(LabelSet a, LabelSet b) { return from_raw(a.bits_ & ~b.bits_); }
  bool operator==(const LabelSet&) const = default;

  static LabelSet from_raw(unsigned bits) {
    LabelSet s;
    s.bits_ = static_cast<std::uint16_t>(bits & 0x3FFu);
    return s;
  }

 private:
  static std::uint16_t bit(AnatomicalLabel label) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(label));
  }
  std::uint16_t bits_ = 0;
};

enum class LesionType : std::uint8_t {
  Cardiomegaly,
  Pneumonia,
  Atelectasis,
  Opacity,
  Consolidation,
  Edema,
  Effusion,
};

inline constexpr std::size_t kLesionCount = 7;
inline constexpr std::array<LesionType, kLesionCount> kAllLesions = {
    LesionType::Cardiomegaly, LesionType::Pneumonia,     LesionType::Atelectasis,
    LesionType::Opacity,      LesionType::Consolidation, LesionType::Edema,
    LesionType::Effusion,
};

std::string_view to_string(LesionType lesion);
std::optional<LesionType> try_parse_lesion(std::string_view name);
LesionType parse_lesion(std::string_view name);  // throws DataError

enum class Presence : std::uint8_t { Positive, Negative };
enum class Certainty : std::uint8_t { Definitive, Tentative };
enum class Split : std::uint8_t { Train, Validation, Test };
enum class TemplateType : std::uint8_t { Basic, Global, LesionInference };
enum class Polarity : std::uint8_t { Positive, Negative };

std::string_view to_string(Presence v);
std::string_view to_string(Certainty v);
std::string_view to_string(Split v);
std::string_view to_string(TemplateType v);
std::string_view to_string(Polarity v);
Presence parse_presence(std::string_view s);
Certainty parse_certainty(std::string_view s);
Split parse_split(std::string_view s);
TemplateType parse_template_type(std::string_view s);
Polarity parse_polarity(std::string_view s);

/// One structured report sentence: (entity, sentence index, presence,
/// certainty, locations, predicted lesion type).
struct StructuredFinding {
  std::string entity;
  int sentence_index = 1;
  Presence presence = Presence::Positive;
  Certainty certainty = Certainty::Definitive;
  LabelSet reported_locations;
  std::optional<LesionType> predicted_lesion;

  /// The lesion this finding is about: the predicted type when given,
  /// otherwise the lesion named by the entity. Empty for findings outside
  /// the seven lesion types.
  std::optional<LesionType> target_lesion() const;
  bool whole_heart() const { return target_lesion() == LesionType::Cardiomegaly; }

  /// Empty when valid, otherwise the name of the violated field.
  std::optional<std::string> violation() const;

  bool operator==(const StructuredFinding&) const = default;
};

struct DetectionBox {
  std::string label;
  double confidence = 0.0;
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  std::optional<std::string> violation(int width, int height) const;
  bool operator==(const DetectionBox&) const = default;
};

struct ThresholdSet {
  double tau_ano = 0.10;
  double tau_anatomy = 0.25;
  double tau_conf = 0.20;
  double tau_signal = 0.20;
  double tau_size = 0.10;

  static ThresholdSet general_defaults() { return {0.10, 0.25, 0.20, 0.20, 0.10}; }
  static ThresholdSet edema_defaults() { return {0.01, 0.25, 0.01, 0.20, 0.10}; }
  bool valid() const;
  bool operator==(const ThresholdSet&) const = default;
};

struct GroundedLesion {
  LesionType lesion = LesionType::Opacity;
  Certainty certainty = Certainty::Definitive;
  RasterMask mask;
  LabelSet reported_locations;
  LabelSet grounded_locations;
  LabelSet empty_locations;
  int source_finding_index = 0;
};

struct InstructionAnswerPair {
  std::string pair_id;
  std::string study_id;
  Split split = Split::Train;
  LesionType lesion = LesionType::Opacity;
  /// Lesion name used in the instruction; differs from `lesion` when a
  /// tentative finding is phrased as opacity.
  LesionType target = LesionType::Opacity;
  TemplateType template_type = TemplateType::Basic;
  Polarity polarity = Polarity::Positive;
  std::optional<Certainty> certainty;
  std::string instruction;
  std::string answer_text;
  std::optional<std::string> mask_ref;
  LabelSet locations;

  bool operator==(const InstructionAnswerPair&) const = default;
};

}  // namespace cxrils
