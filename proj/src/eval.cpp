#include "bankdial/eval.hpp"

#include <cstdio>
#include <sstream>

namespace bankdial {

using nlohmann::json;

double per_response_accuracy(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw EvalError("no prediction records");
  size_t correct = 0;
  for (const auto& r : records)
    if (r.predicted == r.gold) ++correct;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

EvalResult summarize(const std::string& testset, std::vector<PredictionRecord> records) {
  EvalResult res;
  res.testset = testset;
  res.accuracy_pct = per_response_accuracy(records) * 100.0;
  for (const auto& r : records) {
    auto& [correct, total] = res.per_intent[r.intent];
    ++total;
    if (r.predicted == r.gold) ++correct;
  }
  res.records = std::move(records);
  return res;
}

namespace {

PredictionRecord record_of(const TrainingExample& ex, int predicted) {
  PredictionRecord r;
  r.dialogue_id = ex.dialogue_id;
  r.turn_index = ex.turn_index;
  r.gold = ex.gold;
  r.predicted = predicted;
  r.intent = ex.intent;
  r.challenge = ex.challenge;
  r.condition = ex.condition;
  return r;
}

}  // namespace

EvalResult evaluate_smn(const Corpus& testset, const std::string& tag, const MemNetParams& params,
                        const MemNetConfig& config, const CandidateSet& cand_set,
                        const CandidateTokens& cands, const Vocabulary& vocab) {
  if (static_cast<size_t>(params.W.rows()) != vocab.size())
    throw EvalError("checkpoint/vocabulary mismatch: " + std::to_string(params.W.rows()) +
                    " embedding rows vs " + std::to_string(vocab.size()) + " tokens");
  std::vector<PredictionRecord> records;
  for (const auto& d : testset) {
    for (const auto& ex : build_examples(d, cand_set, vocab, config)) {
      Eigen::VectorXd scores = forward(ex, params, config, cands);
      records.push_back(record_of(ex, argmax_lowest(scores)));
    }
  }
  return summarize(tag, std::move(records));
}

EvalResult evaluate_mmn(const Corpus& testset, const std::string& tag, const MmnModel& model,
                        const MemNetConfig& config, const CandidateSet& cand_set,
                        const CandidateTokens& cands, const Vocabulary& vocab) {
  std::vector<PredictionRecord> records;
  MmnScorer scorer = MmnScorer::build(model, cand_set, vocab);
  for (const auto& d : testset) {
    auto exs = build_examples(d, cand_set, vocab, config);
    auto preds = mmn_predict_dialogue(exs, model, config, cand_set, cands, nullptr, &scorer);
    for (size_t i = 0; i < exs.size(); ++i) records.push_back(record_of(exs[i], preds[i]));
  }
  return summarize(tag, std::move(records));
}

EvalResult evaluate_oracle(const Corpus& testset, const std::string& tag,
                           const CandidateSet& cand_set, const Vocabulary& vocab,
                           const MemNetConfig& config) {
  std::vector<PredictionRecord> records;
  for (const auto& d : testset)
    for (const auto& ex : build_examples(d, cand_set, vocab, config))
      records.push_back(record_of(ex, ex.gold));
  return summarize(tag, std::move(records));
}

EvalResult evaluate_random(const Corpus& testset, const std::string& tag,
                           const CandidateSet& cand_set, const Vocabulary& vocab,
                           const MemNetConfig& config, uint64_t seed) {
  RngStream rng(RngStream::derive(seed, "random-predictor", 0));
  std::vector<PredictionRecord> records;
  for (const auto& d : testset)
    for (const auto& ex : build_examples(d, cand_set, vocab, config))
      records.push_back(
          record_of(ex, rng.uniform_int(0, static_cast<int>(cand_set.size()) - 1)));
  return summarize(tag, std::move(records));
}

namespace {

std::string cell(const std::map<std::string, double>& by_tag, const std::string& tag) {
  auto it = by_tag.find(tag);
  if (it == by_tag.end()) return "    --";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%6.2f", it->second);
  return buf;
}

const std::vector<std::pair<std::string, std::string>>& single_rows() {
  static const std::vector<std::pair<std::string, std::string>> rows = {
      {"Non OOP", "test"},
      {"Turn Comp.", "turn_compression"},
      {"New API", "new_api"},
      {"Reordering", "reordering"},
      {"Another Slot", "another_slot"},
      {"Audit More", "audit_more"},
  };
  return rows;
}

}  // namespace

double oop_average(const std::map<std::string, double>& by_tag, const std::string& suffix) {
  double sum = 0.0;
  for (ChallengeKind kind : all_challenge_kinds()) {
    auto it = by_tag.find(to_string(kind) + "_" + suffix);
    if (it == by_tag.end()) return -1.0;
    sum += it->second;
  }
  return sum / static_cast<double>(all_challenge_kinds().size());
}

std::string render_report(const ReportData& data) {
  static const std::map<std::string, double> empty;
  auto tags = [&](const std::string& model) -> const std::map<std::string, double>& {
    auto it = data.find(model);
    return it == data.end() ? empty : it->second;
  };
  const auto& smn = tags("smn");
  const auto& mmn = tags("mmn");

  std::ostringstream out;
  out << "Per-response accuracy (%)\n";
  out << "                    In template          Out of template\n";
  out << "Test set            SMN     MMN          SMN     MMN\n";
  for (const auto& [label, tag] : single_rows()) {
    out << label << std::string(20 - label.size(), ' ');
    out << cell(smn, tag + "_it") << "  " << cell(mmn, tag + "_it") << "       "
        << cell(smn, tag + "_oot") << "  " << cell(mmn, tag + "_oot") << "\n";
  }
  auto avg_cell = [&](const std::map<std::string, double>& by_tag, const std::string& suffix) {
    double v = oop_average(by_tag, suffix);
    if (v < 0.0) return std::string("    --");
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6.2f", v);
    return std::string(buf);
  };
  out << "OOP Avg.            " << avg_cell(smn, "it") << "  " << avg_cell(mmn, "it") << "       "
      << avg_cell(smn, "oot") << "  " << avg_cell(mmn, "oot") << "\n";

  out << "\nMultiple out-of-pattern occurrences per dialogue\n";
  out << "                    In template          Out of template\n";
  out << "Test set            SMN     MMN          SMN     MMN\n";
  for (const auto* row : {"turn_compression", "audit_more"}) {
    std::string tag = std::string("multi_") + row;
    std::string label = std::string(row) == "turn_compression" ? "Turn Compression" : "Audit More";
    out << label << std::string(20 - label.size(), ' ');
    out << cell(smn, tag + "_it") << "  " << cell(mmn, tag + "_it") << "       "
        << cell(smn, tag + "_oot") << "  " << cell(mmn, tag + "_oot") << "\n";
  }
  return out.str();
}

std::vector<std::string> trend_violations(const ReportData& data) {
  std::vector<std::string> out;
  char buf[160];
  auto fail = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out.emplace_back(buf);
  };
  auto get = [&](const std::string& model, const std::string& tag) -> const double* {
    auto mit = data.find(model);
    if (mit == data.end()) return nullptr;
    auto tit = mit->second.find(tag);
    return tit == mit->second.end() ? nullptr : &tit->second;
  };

  for (const std::string model : {"smn", "mmn"}) {
    if (data.find(model) == data.end()) continue;
    const auto& by_tag = data.at(model);
    for (const std::string cond : {"it", "oot"}) {
      const double* non_oop = get(model, "test_" + cond);
      double avg = oop_average(by_tag, cond);
      if (non_oop && *non_oop < 80.0)
        fail("%s %s non-OOP %.2f < 80", model.c_str(), cond.c_str(), *non_oop);
      if (avg >= 0.0) {
        if (avg > 55.0) fail("%s %s OOP average %.2f > 55", model.c_str(), cond.c_str(), avg);
        if (non_oop && *non_oop - avg < 30.0)
          fail("%s %s OOP drop %.2f < 30 points", model.c_str(), cond.c_str(), *non_oop - avg);
      }
      const double* na = get(model, "new_api_" + cond);
      if (na) {
        for (ChallengeKind kind : all_challenge_kinds()) {
          if (kind == ChallengeKind::new_api) continue;
          const double* other = get(model, to_string(kind) + "_" + cond);
          if (other && *other < *na)
            fail("%s %s new_api %.2f not lowest (%s %.2f)", model.c_str(), cond.c_str(), *na,
                 to_string(kind).c_str(), *other);
        }
      }
      // multiple occurrences of audit-more must hurt more than single ones
      const double* multi = get(model, "multi_audit_more_" + cond);
      const double* single = get(model, "audit_more_" + cond);
      if (multi && single && !(*multi < *single))
        fail("%s %s multi audit_more %.2f not below single %.2f", model.c_str(), cond.c_str(),
             *multi, *single);
    }
  }

  if (data.count("smn") && data.count("mmn")) {
    for (const std::string tag : {"turn_compression_it", "audit_more_it"}) {
      const double* s = get("smn", tag);
      const double* m = get("mmn", tag);
      if (s && m && *m - *s < 10.0)
        fail("mmn lead on %s is %.2f < 10 points", tag.c_str(), *m - *s);
    }
    for (const std::string tag : {"reordering_it", "another_slot_it"}) {
      const double* s = get("smn", tag);
      const double* m = get("mmn", tag);
      if (s && m && !(*s > *m)) fail("smn not ahead on %s (%.2f vs %.2f)", tag.c_str(), *s, *m);
    }
  }
  return out;
}

json report_json(const ReportData& data, const std::vector<EvalResult>& results) {
  json j;
  j["format_version"] = 1;
  j["accuracy_pct"] = json::object();
  for (const auto& [model, by_tag] : data) {
    for (const auto& [tag, acc] : by_tag) j["accuracy_pct"][model][tag] = acc;
    double it = oop_average(by_tag, "it"), oot = oop_average(by_tag, "oot");
    if (it >= 0.0) j["accuracy_pct"][model]["oop_avg_it"] = it;
    if (oot >= 0.0) j["accuracy_pct"][model]["oop_avg_oot"] = oot;
  }
  // per-intent breakdowns: extra debugging detail beyond the text table
  j["per_intent"] = json::object();
  for (const auto& r : results) {
    json intents = json::object();
    for (const auto& [intent, ct] : r.per_intent)
      intents[intent] = json{{"correct", ct.first},
                             {"total", ct.second},
                             {"accuracy_pct", 100.0 * static_cast<double>(ct.first) /
                                                  static_cast<double>(ct.second)}};
    j["per_intent"][r.testset] = intents;
  }
  return j;
}

}  // namespace bankdial
