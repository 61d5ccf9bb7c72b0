#include "cxrils/review_server.hpp"

#include <chrono>
#include <set>

#include <httplib.h>

#include "cxrils/overlay.hpp"
#include "cxrils/png_io.hpp"
#include "cxrils/templates.hpp"
#include "cxrils/util.hpp"

namespace cxrils {

namespace fs = std::filesystem;

ReviewService::ReviewService(const ReviewOptions& opts)
    : opts_(opts), store_(opts.verdict_log) {
  std::vector<InstructionAnswerPair> pairs;
  for (const auto& j : read_jsonl_file(opts.dataset_dir / "pairs.jsonl")) {
    auto p = j.get<InstructionAnswerPair>();
    if (!opts.split || p.split == *opts.split) pairs.push_back(std::move(p));
  }
  samples_ = group_samples(pairs);
  for (std::size_t i = 0; i < samples_.size(); ++i) by_id_[samples_[i].sample_id] = i;
  for (auto& r : load_manifest(opts.manifest)) studies_[r.study_id] = std::move(r);
  worklists_ = assign_samples(samples_, opts.experts, opts.seed);
}

const ReviewSample& ReviewService::find(const std::string& sample_id) const {
  auto it = by_id_.find(sample_id);
  if (it == by_id_.end()) throw ReviewError(404, "unknown sample " + sample_id);
  return samples_[it->second];
}

json ReviewService::worklist(const std::string& expert) const {
  auto it = worklists_.find(expert);
  if (it == worklists_.end()) throw ReviewError(403, "unknown expert " + expert);
  json items = json::array();
  std::size_t reviewed = 0;
  for (const auto& id : it->second) {
    const auto& s = find(id);
    auto v = store_.get(expert, id);
    if (v) ++reviewed;
    items.push_back({{"sample", id},
                     {"lesion", to_string(s.lesion)},
                     {"polarity", to_string(s.polarity)},
                     {"status", v ? json(to_string(v->decision)) : json("pending")}});
  }
  return {{"expert", expert},
          {"assigned", it->second.size()},
          {"reviewed", reviewed},
          {"samples", std::move(items)}};
}

json ReviewService::sample(const std::string& sample_id) const {
  const auto& s = find(sample_id);
  json pairs = json::array();
  for (const auto& p : s.pairs) {
    pairs.push_back({{"pair_id", p.pair_id},
                     {"template_type", to_string(p.template_type)},
                     {"instruction", p.instruction},
                     {"answer", p.answer_text}});
  }
  std::string report;
  if (auto it = studies_.find(s.study_id); it != studies_.end()) {
    report = trim(read_text_file(it->second.report));
  }
  return {{"sample", s.sample_id},
          {"study_id", s.study_id},
          {"lesion", to_string(s.lesion)},
          {"target", to_string(s.target)},
          {"polarity", to_string(s.polarity)},
          {"locations", s.locations},
          {"location_phrase", location_phrase(s.locations)},
          {"instruction", s.pairs.front().instruction},
          {"report", report},
          {"pairs", std::move(pairs)}};
}

std::string ReviewService::overlay_png(const std::string& sample_id) const {
  const auto& s = find(sample_id);
  auto it = studies_.find(s.study_id);
  if (it == studies_.end()) throw ReviewError(404, "study " + s.study_id + " not in manifest");
  const auto image = read_png_gray(it->second.image);
  RasterMask mask(image.width(), image.height());
  if (s.mask_ref) mask = read_png_mask(opts_.dataset_dir / *s.mask_ref);
  return encode_png_rgb(render_overlay(image, mask));
}

void ReviewService::submit(const json& body) {
  if (!body.is_object() || !body.contains("expert") || !body.contains("sample") ||
      !body.contains("decision") || !body["expert"].is_string() || !body["sample"].is_string() ||
      !body["decision"].is_string()) {
    throw ReviewError(400, "verdict needs string fields expert, sample, decision");
  }
  Verdict v;
  v.expert_id = body["expert"].get<std::string>();
  v.sample_id = body["sample"].get<std::string>();
  try {
    v.decision = parse_decision(body["decision"].get<std::string>());
  } catch (const DataError& e) {
    throw ReviewError(400, e.what());
  }
  find(v.sample_id);
  auto it = worklists_.find(v.expert_id);
  if (it == worklists_.end()) throw ReviewError(403, "unknown expert " + v.expert_id);
  if (std::find(it->second.begin(), it->second.end(), v.sample_id) == it->second.end()) {
    throw ReviewError(403, "sample " + v.sample_id + " is not assigned to " + v.expert_id);
  }
  v.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  store_.submit(std::move(v));
}

json ReviewService::export_json() const {
  auto result = export_filtered(samples_, worklists_, store_.snapshot());
  return {{"pairs", result.kept}, {"report", result.report.to_json()}};
}

void mount_review_routes(httplib::Server& server, ReviewService& service,
                         const std::optional<fs::path>& static_dir) {
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const ReviewError& e) {
        res.status = e.status();
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  };
  server.Get("/api/worklist", guarded([&service](const httplib::Request& req, httplib::Response& res) {
               if (!req.has_param("expert")) throw ReviewError(400, "missing expert parameter");
               res.set_content(service.worklist(req.get_param_value("expert")).dump(),
                               "application/json");
             }));
  server.Get("/api/sample/:id/overlay.png",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               res.set_content(service.overlay_png(req.path_params.at("id")), "image/png");
             }));
  server.Get("/api/sample/:id", guarded([&service](const httplib::Request& req, httplib::Response& res) {
               res.set_content(service.sample(req.path_params.at("id")).dump(), "application/json");
             }));
  server.Post("/api/verdict", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                json body;
                try {
                  body = json::parse(req.body);
                } catch (const json::exception&) {
                  throw ReviewError(400, "verdict body is not JSON");
                }
                service.submit(body);
                res.status = 204;
              }));
  server.Get("/api/export", guarded([&service](const httplib::Request&, httplib::Response& res) {
               res.set_content(service.export_json().dump(), "application/json");
             }));
  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace cxrils
