#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "cxrils/config.hpp"
#include "cxrils/eval.hpp"
#include "cxrils/overlay.hpp"
#include "cxrils/pipeline.hpp"
#include "cxrils/png_io.hpp"
#include "cxrils/qc.hpp"
#include "cxrils/review_server.hpp"
#include "cxrils/synth.hpp"
#include "cxrils/templates.hpp"
#include "cxrils/util.hpp"

namespace fs = std::filesystem;
using namespace cxrils;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "override, e.g. thresholds.edema.tau_ano=0.02");
    cmd->add_option("--seed", seed, "negative sampling seed");
  }

  PipelineConfig load() const {
    PipelineConfig cfg;
    if (!path.empty()) cfg = load_config(path);
    std::string ini;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      const auto dot = s.rfind('.', eq);
      if (eq == std::string::npos || dot == std::string::npos) {
        throw CLI::ValidationError("--set", "expected section.key=value, got " + s);
      }
      ini += "[" + s.substr(0, dot) + "]\n" + s.substr(dot + 1, eq - dot - 1) + " = " +
             s.substr(eq + 1) + "\n";
    }
    if (!ini.empty()) cfg = parse_config(ini, cfg);
    if (seed) cfg.negative_seed = *seed;
    return cfg;
  }
};

struct RunArgs {
  std::string manifest;
  std::string out;
  int jobs = 1;
  std::string lexicon;
  ConfigArgs config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--manifest", manifest, "manifest.jsonl")->required();
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("-j,--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--lexicon", lexicon, "location lexicon TSV")->check(CLI::ExistingFile);
    config.attach(cmd);
  }
};

int run_stage(const RunArgs& args, Stage stage) {
  RunOptions opts;
  opts.config = args.config.load();
  opts.parallelism = args.jobs;
  opts.stage = stage;
  if (!args.lexicon.empty()) opts.lexicon = LocationLexicon::load(args.lexicon);
  const auto s = run_pipeline(args.manifest, args.out, opts);
  std::cout << "studies " << s.studies << ", grounded " << s.grounded << ", qc excluded "
            << s.qc_excluded << ", quarantined " << s.quarantined << ", reused " << s.reused;
  if (stage != Stage::Ground) std::cout << ", pairs " << s.pairs;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cxrils: lesion segmentation dataset toolkit"};
  app.require_subcommand(1);

  RunArgs ground_args, pairs_args, run_args;
  auto* ground = app.add_subcommand("ground", "QC and lesion grounding");
  ground_args.attach(ground);
  auto* pairs = app.add_subcommand("pairs", "instruction-answer pairs from grounded studies");
  pairs_args.attach(pairs);
  auto* run = app.add_subcommand("run", "QC, grounding and pair generation");
  run_args.attach(run);

  std::string qc_manifest, qc_out;
  ConfigArgs qc_config;
  auto* qc = app.add_subcommand("qc", "QC report for every study");
  qc->add_option("--manifest", qc_manifest)->required();
  qc->add_option("--out", qc_out, "write JSON here instead of stdout");
  qc_config.attach(qc);

  std::string eval_pairs, eval_dataset, eval_preds, eval_split, eval_json;
  auto* eval = app.add_subcommand("eval", "score predictions against the dataset");
  eval->add_option("--pairs", eval_pairs, "pairs.jsonl")->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", eval_dataset, "directory mask_ref paths are relative to");
  eval->add_option("--predictions", eval_preds)->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split, "train, validation or test");
  eval->add_option("--json", eval_json, "also write scores as JSON");

  CorpusOptions synth_opts;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "synthetic studies with oracle truth");
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--count", synth_opts.count)->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_opts.seed);
  synth->add_option("--size", synth_opts.width, "image width and height")
      ->check(CLI::Range(64, 4096));
  synth->add_option("--jitter", synth_opts.jitter, "box jitter in pixels")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--confidence-noise", synth_opts.confidence_noise)
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--false-positives", synth_opts.false_positives)
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--qc-mismatch-rate", synth_opts.qc_mismatch_rate)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--qc-flag-rate", synth_opts.qc_flag_rate)->check(CLI::Range(0.0, 1.0));

  std::string ov_image, ov_mask, ov_out;
  auto* overlay = app.add_subcommand("overlay", "tint mask pixels on an image");
  overlay->add_option("--image", ov_image)->required()->check(CLI::ExistingFile);
  overlay->add_option("--mask", ov_mask)->required()->check(CLI::ExistingFile);
  overlay->add_option("--out", ov_out)->required();

  ReviewOptions review;
  std::string review_dataset, review_manifest, review_log, review_static, review_split = "test";
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "expert review service");
  serve->add_option("--dataset", review_dataset, "pipeline output directory")->required();
  serve->add_option("--manifest", review_manifest)->required()->check(CLI::ExistingFile);
  serve->add_option("--experts", review.experts, "expert ids")->required()->delimiter(',');
  serve->add_option("--log", review_log, "verdict log")->required();
  serve->add_option("--seed", review.seed);
  serve->add_option("--split", review_split, "split to review, or 'all'");
  serve->add_option("--static", review_static, "directory served at /");
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  bool dump = false, self_test = false;
  ConfigArgs cfg_args;
  auto* config = app.add_subcommand("config", "show or check configuration");
  config->add_flag("--dump", dump, "print the effective configuration");
  config->add_flag("--self-test", self_test, "check shipped defaults");
  cfg_args.attach(config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ground) return run_stage(ground_args, Stage::Ground);
    if (*pairs) return run_stage(pairs_args, Stage::Pairs);
    if (*run) return run_stage(run_args, Stage::All);
    if (*qc) {
      const auto cfg = qc_config.load();
      json out = json::array();
      for (const auto& r : load_manifest(qc_manifest)) {
        try {
          const auto study = load_study(r);
          const OrganMasks anatomy{study.anatomy_mask(AnatomicalLabel::RightLung),
                                   study.anatomy_mask(AnatomicalLabel::LeftLung),
                                   study.anatomy_heart};
          out.push_back(run_qc(r.study_id, r.qc_flags, study.organs, anatomy, cfg.qc).to_json());
        } catch (const DataError& e) {
          out.push_back({{"study_id", r.study_id}, {"error", e.what()}});
        }
      }
      if (qc_out.empty()) {
        std::cout << out.dump(1) << "\n";
      } else {
        write_text_atomic(qc_out, out.dump(1) + "\n");
      }
      return 0;
    }
    if (*eval) {
      std::optional<Split> split;
      if (!eval_split.empty()) split = parse_split(eval_split);
      const fs::path root = eval_dataset.empty() ? fs::path(eval_pairs).parent_path() : fs::path(eval_dataset);
      const auto truth = load_ground_truth(eval_pairs, root, split);
      const auto preds = load_predictions(eval_preds);
      const auto seg = score_segmentation(preds, truth);
      const auto text = score_text(preds, truth, TemplateBank::standard());
      std::cout << scores_to_text(seg, text);
      if (!eval_json.empty()) write_text_atomic(eval_json, scores_to_json(seg, text).dump(1) + "\n");
      return 0;
    }
    if (*synth) {
      synth_opts.height = synth_opts.width;
      const auto corpus = make_corpus(synth_opts, synth_out);
      std::cout << "wrote " << corpus.studies.size() << " studies, manifest "
                << corpus.manifest.string() << "\n";
      return 0;
    }
    if (*overlay) {
      render_overlay(read_png_gray(ov_image), read_png_mask(ov_mask), fs::path(ov_out));
      return 0;
    }
    if (*serve) {
      review.dataset_dir = review_dataset;
      review.manifest = review_manifest;
      review.verdict_log = review_log;
      if (review_split == "all") {
        review.split.reset();
      } else {
        review.split = parse_split(review_split);
      }
      ReviewService service(review);
      httplib::Server server;
      std::optional<fs::path> static_dir;
      if (!review_static.empty()) static_dir = review_static;
      mount_review_routes(server, service, static_dir);
      std::cout << "serving " << service.samples().size() << " samples on " << host << ":"
                << port << std::endl;
      if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return kExitData;
      }
      return 0;
    }
    if (*config) {
      if (self_test) {
        const auto r = config_self_test();
        for (const auto& line : r.lines) std::cout << line << "\n";
        if (!r.ok) return kExitData;
      }
      if (dump || !self_test) std::cout << dump_config(cfg_args.load());
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
