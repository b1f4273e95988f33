#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bankdial/eval.hpp"
#include "bankdial/memnet.hpp"
#include "bankdial/pipeline.hpp"
#include "bankdial/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bankdial;

namespace {

struct CommonOpts {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file (JSON)");
  cmd->add_option("--seed", opts.seed, "master seed override")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--out", opts.out, "output directory override");
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg =
      opts.config_path.empty() ? RunConfig{} : RunConfig::from_file(opts.config_path);
  if (opts.seed_set) cfg.master_seed = opts.seed;
  if (!opts.out.empty()) cfg.out_dir = opts.out;
  return cfg;
}

int cmd_generate(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts);
  GenerateResult res = generate_all(cfg);
  for (const auto& [tag, n] : res.counts)
    std::cout << tag << ": " << n << " dialogues\n";
  std::cout << "manifest: " << res.manifest_path << "\n";
  return 0;
}

int cmd_split_templates(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts);
  auto entries = parse_templates_file(cfg.templates_path);
  TemplateSplit split = split_templates(build_store(entries), cfg.master_seed);
  fs::create_directories(cfg.out_dir);
  auto dump = [&](const TemplateStore& store, const std::string& name) {
    std::string path = (fs::path(cfg.out_dir) / ("templates_" + name + ".txt")).string();
    std::ofstream out(path);
    size_t n = 0;
    for (const auto& [form, es] : store)
      for (const auto& e : es) {
        out << e.logical_form << " ||| " << e.surface;
        if (!e.author_id.empty()) out << " ||| " << e.author_id;
        out << '\n';
        ++n;
      }
    std::cout << name << ": " << n << " templates -> " << path << "\n";
  };
  dump(split.train, "train");
  dump(split.dev, "dev");
  dump(split.test, "test");
  return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& model) {
  RunConfig cfg = load_config(opts);
  TrainOutcome out = run_training(cfg, model);
  if (!out.log.empty()) {
    const TrainLogEntry& last = out.log.back();
    std::cout << "final epoch " << last.epoch << ": loss " << last.loss << ", dev accuracy "
              << last.dev_accuracy << "\n";
  }
  std::cout << "checkpoint: " << out.checkpoint_path << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& model, std::string checkpoint,
             std::vector<std::string> testsets, bool assert_trends) {
  RunConfig cfg = load_config(opts);
  EvalOutcome out = run_evaluation(cfg, model, std::move(checkpoint), std::move(testsets));
  for (const auto& res : out.results) std::cout << res.testset << ": " << res.accuracy_pct << "\n";
  std::cout << "report: " << out.report_path << "\npredictions: " << out.predictions_path << "\n";

  if (assert_trends) {
    auto violations = trend_violations(out.data);
    for (const auto& v : violations) std::cerr << "ASSERT FAILED: " << v << "\n";
    if (!violations.empty()) return 1;
  }
  return 0;
}

int cmd_report(const CommonOpts& opts, bool assert_trends) {
  RunConfig cfg = load_config(opts);
  ReportData data;
  for (const std::string model : {"smn", "mmn"}) {
    std::string path = (fs::path(cfg.out_dir) / ("report_" + model + ".json")).string();
    if (!fs::exists(path)) continue;
    json j;
    std::ifstream(path) >> j;
    for (const auto& [tag, acc] : j.at("accuracy_pct").at(model).items())
      if (tag.rfind("oop_avg", 0) != 0) data[model][tag] = acc.get<double>();
  }
  if (data.empty()) {
    std::cout << "no data: run eval first\n";
    return 0;
  }
  std::string table = render_report(data);
  std::cout << table;
  std::string path = (fs::path(cfg.out_dir) / "report.txt").string();
  std::ofstream(path) << table;
  std::cout << "written: " << path << "\n";

  if (assert_trends) {
    auto violations = trend_violations(data);
    for (const auto& v : violations) std::cerr << "ASSERT FAILED: " << v << "\n";
    if (!violations.empty()) return 1;
  }
  return 0;
}

int cmd_inspect(const CommonOpts& opts, const std::string& dialogue_id) {
  RunConfig cfg = load_config(opts);
  for (const auto& tag : all_testset_tags()) {
    std::string path = corpus_path(cfg, tag);
    if (!fs::exists(path)) continue;
    for (const auto& d : read_corpus(path)) {
      if (d.id != dialogue_id) continue;
      std::cout << "id: " << d.id << "\nintent: " << d.intent << "\nseed: " << d.seed
                << "\ntestset: " << tag << "\nchallenge: " << to_string(d.tags.challenge)
                << (d.tags.multiple ? " (multiple)" : "")
                << "\ncondition: " << to_string(d.tags.condition) << "\n\n";
      for (const auto& t : d.turns) {
        std::cout << to_string(t.speaker) << ": ";
        if (!t.text.empty())
          std::cout << t.text;
        else
          std::cout << "<" << t.action.act << (t.action.api.empty() ? "" : " " + t.action.api)
                    << ">";
        if (!t.action.bindings.empty()) {
          std::cout << "  [";
          for (size_t i = 0; i < t.action.bindings.size(); ++i)
            std::cout << (i ? ", " : "") << t.action.bindings[i].first << "="
                      << t.action.bindings[i].second;
          std::cout << "]";
        }
        std::cout << "\n";
      }
      return 0;
    }
  }
  std::cerr << "dialogue not found: " << dialogue_id << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic banking dialogue generation, training and evaluation"};
  app.require_subcommand(1);

  CommonOpts gen_opts, split_opts, train_opts, eval_opts, report_opts, inspect_opts;
  std::string train_model = "smn", eval_model = "smn", eval_ckpt, inspect_id;
  std::vector<std::string> eval_testsets;
  bool eval_assert = false, report_assert = false;

  add_common(app.add_subcommand("generate", "generate all corpora and manifests"), gen_opts);
  add_common(app.add_subcommand("split-templates", "write the per-partition template pools"),
             split_opts);

  auto* train = app.add_subcommand("train", "train a model on the generated corpora");
  add_common(train, train_opts);
  train->add_option("--model", train_model, "smn or mmn")
      ->check(CLI::IsMember({"smn", "mmn"}));

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test sets");
  add_common(eval, eval_opts);
  eval->add_option("--model", eval_model, "smn or mmn")->check(CLI::IsMember({"smn", "mmn"}));
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint path (default: <out>/<model>.ckpt)");
  eval->add_option("--testset", eval_testsets, "testset tag (repeatable; default: all)");
  eval->add_flag("--assert", eval_assert, "nonzero exit when the accuracy profile is violated");

  auto* report = app.add_subcommand("report", "render the combined accuracy tables");
  add_common(report, report_opts);
  report->add_flag("--assert", report_assert, "nonzero exit when the accuracy profile is violated");

  auto* inspect = app.add_subcommand("inspect", "pretty-print one dialogue by id");
  add_common(inspect, inspect_opts);
  inspect->add_option("dialogue-id", inspect_id, "dialogue id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("generate")) return cmd_generate(gen_opts);
    if (app.got_subcommand("split-templates")) return cmd_split_templates(split_opts);
    if (app.got_subcommand("train")) return cmd_train(train_opts, train_model);
    if (app.got_subcommand("eval"))
      return cmd_eval(eval_opts, eval_model, eval_ckpt, eval_testsets, eval_assert);
    if (app.got_subcommand("report")) return cmd_report(report_opts, report_assert);
    if (app.got_subcommand("inspect")) return cmd_inspect(inspect_opts, inspect_id);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
