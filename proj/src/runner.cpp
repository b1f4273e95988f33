#include "bankdial/runner.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

namespace bankdial {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> default_eval_tags() {
  std::vector<std::string> tags;
  for (const auto& t : all_testset_tags())
    if (t != "train" && t != "dev") tags.push_back(t);
  return tags;
}

CandidateSet load_candidate_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusIoError("cannot open candidate list: " + path);
  CandidateSet cs;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) cs.add(line);
  return cs;
}

TrainOutcome run_training(const RunConfig& cfg, const std::string& model) {
  if (model != "smn" && model != "mmn") throw MemNetError("unknown model type: " + model);
  MemNetConfig mcfg = MemNetConfig::from_json(cfg.model);

  auto require = [](const std::string& path) {
    if (!fs::exists(path)) throw CorpusIoError("missing corpus file: " + path);
    return path;
  };
  Corpus train = read_corpus(require(corpus_path(cfg, "train")));
  Corpus dev = read_corpus(require(corpus_path(cfg, "dev")));
  CandidateSet cands = load_candidate_file((fs::path(cfg.out_dir) / "candidates.txt").string());
  Vocabulary vocab = build_vocabulary(train, cands, mcfg);

  TrainOutcome out;
  Checkpoint ckpt;
  ckpt.model_type = model;
  ckpt.config = mcfg;
  ckpt.vocab = vocab;
  ckpt.candidates = cands.items();
  if (model == "smn") {
    CandidateTokens ct = CandidateTokens::build(cands, vocab);
    auto tr = build_dataset(train, cands, vocab, mcfg);
    auto dv = build_dataset(dev, cands, vocab, mcfg);
    ckpt.smn =
        train_smn(tr, dv, ct, mcfg, RngStream::derive(cfg.master_seed, "train-smn", 0), &out.log);
  } else {
    // Per-intent candidate subsets restrict each expert's answer space.
    std::map<std::string, std::vector<int>> expert_candidates;
    std::string by_intent_path = (fs::path(cfg.out_dir) / "candidates_by_intent.json").string();
    if (fs::exists(by_intent_path)) {
      json j;
      std::ifstream(by_intent_path) >> j;
      for (const auto& [intent, ids] : j.items())
        expert_candidates[intent] = ids.get<std::vector<int>>();
    }
    ckpt.mmn = train_mmn(train, dev, cands, vocab, mcfg,
                         RngStream::derive(cfg.master_seed, "train-mmn", 0), expert_candidates,
                         &out.log);
  }
  out.checkpoint_path = (fs::path(cfg.out_dir) / (model + ".ckpt")).string();
  save_checkpoint(out.checkpoint_path, ckpt);

  json jlog = json::array();
  for (const auto& e : out.log)
    jlog.push_back(json{{"epoch", e.epoch}, {"loss", e.loss}, {"dev_accuracy", e.dev_accuracy}});
  out.log_path = (fs::path(cfg.out_dir) / (model + "_train_log.json")).string();
  std::ofstream(out.log_path) << jlog.dump(2) << '\n';
  return out;
}

EvalOutcome run_evaluation(const RunConfig& cfg, const std::string& model, std::string checkpoint,
                           std::vector<std::string> testsets) {
  if (checkpoint.empty()) checkpoint = (fs::path(cfg.out_dir) / (model + ".ckpt")).string();
  Checkpoint ckpt = load_checkpoint(checkpoint);
  if (ckpt.model_type != model)
    throw EvalError("checkpoint is a " + ckpt.model_type + " model, not " + model);

  CandidateSet cands;
  for (const auto& c : ckpt.candidates) cands.add(c);
  CandidateTokens ct = CandidateTokens::build(cands, ckpt.vocab);
  if (testsets.empty()) testsets = default_eval_tags();

  EvalOutcome out;
  out.predictions_path = (fs::path(cfg.out_dir) / ("predictions_" + model + ".jsonl")).string();
  std::ofstream preds(out.predictions_path);
  for (const auto& tag : testsets) {
    std::string path = corpus_path(cfg, tag);
    if (!fs::exists(path)) throw CorpusIoError("missing corpus file: " + path);
    Corpus corpus = read_corpus(path);
    EvalResult res = model == "smn"
                         ? evaluate_smn(corpus, tag, ckpt.smn, ckpt.config, cands, ct, ckpt.vocab)
                         : evaluate_mmn(corpus, tag, ckpt.mmn, ckpt.config, cands, ct, ckpt.vocab);
    out.data[model][tag] = res.accuracy_pct;
    for (const auto& r : res.records)
      preds << json{{"testset", tag},
                    {"dialogue_id", r.dialogue_id},
                    {"turn_index", r.turn_index},
                    {"gold", r.gold},
                    {"predicted", r.predicted},
                    {"intent", r.intent},
                    {"challenge", to_string(r.challenge)},
                    {"condition", to_string(r.condition)}}
                   .dump()
            << '\n';
    res.records.clear();  // aggregates only in the report file
    out.results.push_back(std::move(res));
  }

  out.report_path = (fs::path(cfg.out_dir) / ("report_" + model + ".json")).string();
  std::ofstream(out.report_path) << report_json(out.data, out.results).dump(2) << '\n';
  return out;
}

}  // namespace bankdial
