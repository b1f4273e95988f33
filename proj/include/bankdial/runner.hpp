#pragma once

#include <string>
#include <vector>

#include "bankdial/eval.hpp"
#include "bankdial/memnet.hpp"
#include "bankdial/pipeline.hpp"

namespace bankdial {

// Evaluation-relevant corpus tags: everything except train and dev.
std::vector<std::string> default_eval_tags();

// Candidate list file as written by the generation stage (one canonical
// string per line, ids by position).
CandidateSet load_candidate_file(const std::string& path);

struct TrainOutcome {
  std::string checkpoint_path;
  std::string log_path;
  std::vector<TrainLogEntry> log;
};

// Trains "smn" or "mmn" on the corpora under cfg.out_dir and writes
// <out>/<model>.ckpt plus <model>_train_log.json. The multi-network model
// picks up per-intent candidate subsets from candidates_by_intent.json when
// the generation stage produced one.
TrainOutcome run_training(const RunConfig& cfg, const std::string& model);

struct EvalOutcome {
  ReportData data;                  // model -> tag -> accuracy_pct
  std::vector<EvalResult> results;  // per-record details cleared, aggregates kept
  std::string report_path;
  std::string predictions_path;
};

// Evaluates a checkpoint (default <out>/<model>.ckpt) on the given tags (all
// eval tags when empty) and writes predictions_<model>.jsonl and
// report_<model>.json under cfg.out_dir.
EvalOutcome run_evaluation(const RunConfig& cfg, const std::string& model,
                           std::string checkpoint = "", std::vector<std::string> testsets = {});

}  // namespace bankdial
