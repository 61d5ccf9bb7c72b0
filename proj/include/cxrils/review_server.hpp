#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxrils/review.hpp"
#include "cxrils/study.hpp"

namespace httplib {
class Server;
}

namespace cxrils {

struct ReviewOptions {
  /// Pipeline output directory (pairs.jsonl, masks/).
  std::filesystem::path dataset_dir;
  /// Manifest for study images and reports.
  std::filesystem::path manifest;
  std::filesystem::path verdict_log;
  std::vector<std::string> experts;
  std::uint64_t seed = 0;
  /// Only pairs of this split are reviewed; all splits when empty.
  std::optional<Split> split = Split::Test;
};

/// Raised by ReviewService for requests that map to an HTTP status.
class ReviewError : public std::runtime_error {
 public:
  ReviewError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// Review workflow state behind the HTTP endpoints.
class ReviewService {
 public:
  explicit ReviewService(const ReviewOptions& opts);

  json worklist(const std::string& expert) const;
  json sample(const std::string& sample_id) const;
  std::string overlay_png(const std::string& sample_id) const;
  /// Body {expert, sample, decision}.
  void submit(const json& body);
  json export_json() const;

  const Worklists& worklists() const { return worklists_; }
  const std::vector<ReviewSample>& samples() const { return samples_; }

 private:
  const ReviewSample& find(const std::string& sample_id) const;

  ReviewOptions opts_;
  std::vector<ReviewSample> samples_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::string, StudyRecord> studies_;
  Worklists worklists_;
  VerdictStore store_;
};

/// Registers the /api routes on `server`; serves `static_dir` at "/" when given.
void mount_review_routes(httplib::Server& server, ReviewService& service,
                         const std::optional<std::filesystem::path>& static_dir = std::nullopt);

}  // namespace cxrils
