#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bankdial/corpus.hpp"
#include "bankdial/memnet.hpp"

namespace bankdial {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PredictionRecord {
  std::string dialogue_id;
  int turn_index = -1;
  int gold = -1;
  int predicted = -1;
  std::string intent;
  ChallengeKind challenge = ChallengeKind::none;
  TemplateCondition condition = TemplateCondition::unrendered;
};

// correct / total over every record; throws EvalError on an empty set.
double per_response_accuracy(const std::vector<PredictionRecord>& records);

struct EvalResult {
  std::string testset;
  std::vector<PredictionRecord> records;
  double accuracy_pct = 0.0;  // 0..100
  std::map<std::string, std::pair<size_t, size_t>> per_intent;  // intent -> (correct, total)
};

EvalResult summarize(const std::string& testset, std::vector<PredictionRecord> records);

EvalResult evaluate_smn(const Corpus& testset, const std::string& tag, const MemNetParams& params,
                        const MemNetConfig& config, const CandidateSet& cand_set,
                        const CandidateTokens& cands, const Vocabulary& vocab);

EvalResult evaluate_mmn(const Corpus& testset, const std::string& tag, const MmnModel& model,
                        const MemNetConfig& config, const CandidateSet& cand_set,
                        const CandidateTokens& cands, const Vocabulary& vocab);

// Baselines used to pin down the evaluation arithmetic.
EvalResult evaluate_oracle(const Corpus& testset, const std::string& tag,
                           const CandidateSet& cand_set, const Vocabulary& vocab,
                           const MemNetConfig& config);
EvalResult evaluate_random(const Corpus& testset, const std::string& tag,
                           const CandidateSet& cand_set, const Vocabulary& vocab,
                           const MemNetConfig& config, uint64_t seed);

// Accuracies by model ("smn"/"mmn") and testset tag, as produced by a full
// evaluation sweep.
using ReportData = std::map<std::string, std::map<std::string, double>>;

// Plain-text tables: the main single-occurrence table (non-OOP plus the five
// kinds and their unweighted average, IT and OOT) and the multiple-occurrence
// table. Missing cells print as "--".
std::string render_report(const ReportData& data);

// Machine-readable mirror with per-intent breakdowns (an extension beyond
// the text table, for debugging).
nlohmann::json report_json(const ReportData& data, const std::vector<EvalResult>& results);

// Mean accuracy over the five single-occurrence challenge tags for one model
// and condition suffix ("it"/"oot"); negative when a tag is missing.
double oop_average(const std::map<std::string, double>& by_tag, const std::string& suffix);

// The expected degradation profile: high non-OOP accuracy, a large drop on
// out-of-pattern sets with new-API worst, the multi-network model ahead on
// turn compression / audit more (in-template), the single network ahead on
// reordering / another slot, and multiple audit-more occurrences hurting
// more than single ones. Returns one message per violated condition; empty
// means the profile holds. Cross-model checks are skipped unless both
// models are present.
std::vector<std::string> trend_violations(const ReportData& data);

}  // namespace bankdial
