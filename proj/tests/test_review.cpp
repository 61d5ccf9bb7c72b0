#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "cxrils/pipeline.hpp"
#include "cxrils/review.hpp"
#include "cxrils/review_server.hpp"
#include "cxrils/synth.hpp"
#include "support.hpp"

using namespace cxrils;
namespace fs = std::filesystem;

namespace {

std::vector<ReviewSample> fake_samples(std::size_t positives, std::size_t negatives) {
  std::vector<ReviewSample> out;
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    ReviewSample s;
    s.sample_id = "x" + std::to_string(i);
    s.polarity = i < positives ? Polarity::Positive : Polarity::Negative;
    out.push_back(s);
  }
  return out;
}

std::size_t count_polarity(const std::vector<ReviewSample>& samples, const std::vector<std::string>& ids,
                           Polarity pol) {
  std::map<std::string, Polarity> by_id;
  for (const auto& s : samples) by_id[s.sample_id] = s.polarity;
  std::size_t n = 0;
  for (const auto& id : ids) n += by_id.at(id) == pol;
  return n;
}

}  // namespace

TEST(Review, AssignmentSplitsNegatives) {
  auto samples = fake_samples(1841, 8860);
  auto lists = assign_samples(samples, {"e1", "e2", "e3", "e4"}, 7);
  ASSERT_EQ(lists.size(), 4u);
  std::map<std::string, int> negative_owners;
  for (const auto& [e, ids] : lists) {
    EXPECT_EQ(count_polarity(samples, ids, Polarity::Positive), 1841u) << e;
    EXPECT_EQ(count_polarity(samples, ids, Polarity::Negative), 2215u) << e;
    for (const auto& id : ids) ++negative_owners[id];
  }
  std::size_t shared = 0;
  for (const auto& [id, n] : negative_owners) shared += n == 4;
  EXPECT_EQ(shared, 1841u);
  EXPECT_EQ(negative_owners.size(), samples.size());
  EXPECT_EQ(assign_samples(samples, {"e1", "e2", "e3", "e4"}, 7), lists);
}

TEST(Review, AssignmentEdgeCases) {
  auto samples = fake_samples(3, 5);
  auto one = assign_samples(samples, {"solo"}, 1);
  EXPECT_EQ(one.at("solo").size(), 8u);
  auto no_neg = assign_samples(fake_samples(4, 0), {"a", "b"}, 1);
  EXPECT_EQ(no_neg.at("a"), no_neg.at("b"));
  EXPECT_THROW(assign_samples(samples, {}, 1), DataError);
  EXPECT_THROW(assign_samples(samples, {"a", "a"}, 1), DataError);
}

TEST(Review, VerdictLogReplayLastWins) {
  testing_support::TempDir dir("verdicts");
  const auto log = dir / "log.jsonl";
  {
    VerdictStore store(log);
    store.submit({"e1", "s1", Decision::NotAcceptable, 1});
    store.submit({"e1", "s1", Decision::Acceptable, 2});
    store.submit({"e2", "s1", Decision::NotAcceptable, 3});
  }
  VerdictStore replay(log);
  EXPECT_EQ(replay.get("e1", "s1")->decision, Decision::Acceptable);
  EXPECT_EQ(replay.get("e2", "s1")->decision, Decision::NotAcceptable);
  EXPECT_FALSE(replay.get("e3", "s1"));
  EXPECT_EQ(replay.snapshot().size(), 2u);
  EXPECT_THROW(parse_decision("maybe"), DataError);
}

TEST(Review, ExportRules) {
  auto samples = fake_samples(2, 2);
  for (auto& s : samples) {
    InstructionAnswerPair p;
    p.pair_id = s.sample_id + "p";
    s.pairs.push_back(p);
  }
  auto lists = assign_samples(samples, {"a", "b"}, 3);
  std::map<VerdictStore::Key, Verdict> v;
  for (const auto& [e, ids] : lists) {
    for (const auto& id : ids) v[{e, id}] = {e, id, Decision::Acceptable, 0};
  }
  auto all = export_filtered(samples, lists, v);
  EXPECT_EQ(all.kept.size(), 4u);
  EXPECT_EQ(*all.report.overall.total.rate(), 1.0);
  EXPECT_TRUE(all.report.pending.empty());

  // Exclusion is monotone: adding a rejection never brings a sample back.
  v[{"a", "x0"}].decision = Decision::NotAcceptable;
  auto one = export_filtered(samples, lists, v);
  EXPECT_EQ(one.report.excluded, std::vector<std::string>{"x0"});
  EXPECT_EQ(one.kept.size(), 3u);
  EXPECT_DOUBLE_EQ(*one.report.overall.positive.rate(), 0.5);
  v.erase({"b", "x1"});
  auto pending = export_filtered(samples, lists, v);
  EXPECT_EQ(pending.report.pending, std::vector<std::string>{"x1"});
  EXPECT_EQ(pending.report.overall.positive.reviewed, 1u);
  EXPECT_EQ(pending.report.excluded, std::vector<std::string>{"x0"});
}

TEST(Review, HttpRoundTrip) {
  testing_support::TempDir dir("review_http");
  CorpusOptions copts;
  copts.count = 12;
  copts.seed = 31;
  auto corpus = make_corpus(copts, dir / "corpus");
  run_pipeline(corpus.manifest, dir / "out", {});

  ReviewOptions opts;
  opts.dataset_dir = dir / "out";
  opts.manifest = corpus.manifest;
  opts.verdict_log = dir / "verdicts.jsonl";
  opts.experts = {"e1", "e2", "e3", "e4"};
  opts.split = std::nullopt;
  ReviewService service(opts);

  httplib::Server server;
  mount_review_routes(server, service);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  std::set<std::string> ids;
  std::string target;
  std::size_t positives = 0;
  for (const auto& e : opts.experts) {
    auto res = client.Get("/api/worklist?expert=" + e);
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    auto j = json::parse(res->body);
    EXPECT_EQ(j.at("expert"), e);
    for (const auto& s : j.at("samples")) {
      ids.insert(s.at("sample").get<std::string>());
      if (target.empty() && s.at("polarity") == "positive") target = s.at("sample");
    }
  }
  for (const auto& s : service.samples()) positives += s.polarity == Polarity::Positive;
  ASSERT_FALSE(target.empty());
  ASSERT_GT(positives, 1u);
  EXPECT_EQ(ids.size(), service.samples().size());

  EXPECT_EQ(client.Get("/api/worklist?expert=nobody")->status, 403);
  EXPECT_EQ(client.Get("/api/sample/doesnotexist")->status, 404);
  auto detail = client.Get("/api/sample/" + target);
  ASSERT_EQ(detail->status, 200);
  EXPECT_FALSE(json::parse(detail->body).at("instruction").get<std::string>().empty());
  auto png = client.Get("/api/sample/" + target + "/overlay.png");
  ASSERT_EQ(png->status, 200);
  EXPECT_EQ(png->body.substr(1, 3), "PNG");
  EXPECT_EQ(client.Post("/api/verdict", R"({"expert":"e1","sample":")" + target + R"(","decision":"meh"})",
                        "application/json")->status,
            400);
  EXPECT_EQ(client.Post("/api/verdict", "not json", "application/json")->status, 400);

  for (const auto& [e, list] : service.worklists()) {
    for (const auto& id : list) {
      const auto decision = (e == "e1" && id == target) ? "not_acceptable" : "acceptable";
      json body{{"expert", e}, {"sample", id}, {"decision", decision}};
      auto res = client.Post("/api/verdict", body.dump(), "application/json");
      ASSERT_EQ(res->status, 204) << res->body;
    }
  }
  auto exp = client.Get("/api/export");
  ASSERT_EQ(exp->status, 200);
  auto j = json::parse(exp->body);
  EXPECT_EQ(j.at("report").at("excluded"), json::array({target}));
  std::size_t kept_pairs = 0;
  std::size_t target_pairs = 0;
  for (const auto& s : service.samples()) {
    (s.sample_id == target ? target_pairs : kept_pairs) += s.pairs.size();
  }
  EXPECT_EQ(j.at("pairs").size(), kept_pairs);
  EXPECT_GT(target_pairs, 0u);
  const auto& pos = j.at("report").at("overall").at("positive");
  EXPECT_EQ(pos.at("reviewed"), positives);
  EXPECT_EQ(pos.at("accepted"), positives - 1);
  EXPECT_TRUE(j.at("report").at("pending").empty());

  server.stop();
  thread.join();

  // The log replays into a fresh service.
  ReviewService again(opts);
  EXPECT_EQ(again.export_json().at("report").at("excluded"), json::array({target}));
}
