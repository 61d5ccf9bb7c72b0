#include "cxrils/qc.hpp"

#include <cmath>
#include <sstream>

#include "cxrils/study.hpp"

namespace cxrils {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

CrossCheck cross_check_masks(const OrganMasks& primary, const OrganMasks& secondary,
                             double rel_tol) {
  CrossCheck out;
  for (const auto* m : {&primary.right_lung, &primary.left_lung, &primary.heart,
                        &secondary.right_lung, &secondary.left_lung, &secondary.heart}) {
    if (m->empty()) {
      out.pass = false;
      out.reasons.push_back("empty mask");
      return out;
    }
  }
  const int width = primary.right_lung.width();
  const int height = primary.right_lung.height();
  auto a_lungs = (primary.right_lung | primary.left_lung).extent();
  auto b_lungs = (secondary.right_lung | secondary.left_lung).extent();
  auto a_heart = primary.heart.extent();
  auto b_heart = secondary.heart.extent();

  const double col_tol = rel_tol * width;
  const double row_tol = rel_tol * height;
  if (std::abs(a_lungs->min_col - b_lungs->min_col) > col_tol) {
    out.pass = false;
    out.reasons.push_back("lung leftmost column differs: " + std::to_string(a_lungs->min_col) +
                          " vs " + std::to_string(b_lungs->min_col) + " (tolerance " +
                          fmt(col_tol) + ")");
  }
  if (std::abs(a_lungs->max_col - b_lungs->max_col) > col_tol) {
    out.pass = false;
    out.reasons.push_back("lung rightmost column differs: " + std::to_string(a_lungs->max_col) +
                          " vs " + std::to_string(b_lungs->max_col) + " (tolerance " +
                          fmt(col_tol) + ")");
  }
  if (std::abs(a_heart->max_row - b_heart->max_row) > row_tol) {
    out.pass = false;
    out.reasons.push_back("heart lowermost row differs: " + std::to_string(a_heart->max_row) +
                          " vs " + std::to_string(b_heart->max_row) + " (tolerance " +
                          fmt(row_tol) + ")");
  }
  return out;
}

double compute_ctr(const RasterMask& right_lung, const RasterMask& left_lung,
                   const RasterMask& heart) {
  if (right_lung.empty() || left_lung.empty() || heart.empty()) {
    throw DataError("compute_ctr: empty mask");
  }
  auto lungs = (right_lung | left_lung).extent();
  auto h = heart.extent();
  return static_cast<double>(h->max_col - h->min_col + 1) /
         static_cast<double>(lungs->max_col - lungs->min_col + 1);
}

json QcReport::to_json() const {
  json j{{"study_id", study_id},
         {"flags", flags},
         {"ctr", nullptr},
         {"cross_check", {{"pass", cross_check.pass}, {"reasons", cross_check.reasons}}},
         {"excluded", excluded()}};
  if (ctr) j["ctr"] = *ctr;
  return j;
}

QcReport run_qc(const std::string& study_id, const std::vector<std::string>& flags,
                const OrganMasks& organs, const OrganMasks& anatomy, const QcConfig& cfg) {
  QcReport r;
  r.study_id = study_id;
  r.flags = flags;
  r.cross_check = cross_check_masks(organs, anatomy, cfg.rel_tol);
  if (!organs.right_lung.empty() && !organs.left_lung.empty() && !organs.heart.empty()) {
    r.ctr = compute_ctr(organs.right_lung, organs.left_lung, organs.heart);
  }
  return r;
}

}  // namespace cxrils
