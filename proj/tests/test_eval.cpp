#include <doctest.h>

#include <cmath>

#include "bankdial/eval.hpp"
#include "bankdial/pipeline.hpp"
#include "bankdial/policy.hpp"
#include "bankdial/selfplay.hpp"

using namespace bankdial;

namespace {

PredictionRecord rec(const std::string& intent, int gold, int predicted) {
  PredictionRecord r;
  r.dialogue_id = "d";
  r.turn_index = 0;
  r.gold = gold;
  r.predicted = predicted;
  r.intent = intent;
  return r;
}

Corpus tiny_corpus() {
  PolicyConfig policy;
  Corpus corpus;
  for (const auto& schema : builtin_schemas()) {
    RngStream prng(RngStream::derive(8, "profile", 0));
    UserProfile p = sample_profile(ProfilePools::defaults(), prng);
    Dialogue d = run_episode(schema, p, policy, 21);
    d.id = "eval-" + schema.name + "-0";
    corpus.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace

TEST_CASE("per-response accuracy is plain counting") {
  std::vector<PredictionRecord> all_right(10, rec("transfer", 3, 3));
  CHECK(per_response_accuracy(all_right) == 1.0);

  std::vector<PredictionRecord> three_of_four = {rec("transfer", 1, 1), rec("transfer", 2, 2),
                                                 rec("balance", 3, 3), rec("balance", 4, 5)};
  CHECK(per_response_accuracy(three_of_four) == 0.75);

  CHECK_THROWS_AS(per_response_accuracy({}), EvalError);
}

TEST_CASE("summaries carry percentages and per-intent counts") {
  std::vector<PredictionRecord> records = {rec("transfer", 1, 1), rec("transfer", 2, 0),
                                           rec("transfer", 3, 3), rec("balance", 4, 4),
                                           rec("balance", 5, 5), rec("limit", 6, 0)};
  EvalResult r = summarize("test_it", records);
  CHECK(r.testset == "test_it");
  CHECK(r.accuracy_pct == doctest::Approx(100.0 * 4.0 / 6.0));
  CHECK(r.per_intent.at("transfer") == std::make_pair(size_t{2}, size_t{3}));
  CHECK(r.per_intent.at("balance") == std::make_pair(size_t{2}, size_t{2}));
  CHECK(r.per_intent.at("limit") == std::make_pair(size_t{0}, size_t{1}));
}

TEST_CASE("the oracle baseline scores 100 and random lands near chance") {
  Corpus corpus = tiny_corpus();
  CandidateSet cands = extract_candidates(corpus);
  MemNetConfig config;
  Vocabulary vocab = build_vocabulary(corpus, cands, config);

  EvalResult oracle = evaluate_oracle(corpus, "test_it", cands, vocab, config);
  CHECK(oracle.accuracy_pct == 100.0);
  CHECK(!oracle.records.empty());

  // law-of-large-numbers band: within 3 standard errors of 1/|C|
  size_t n = oracle.records.size();
  double p = 1.0 / static_cast<double>(cands.size());
  double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  double rnd = evaluate_random(corpus, "test_it", cands, vocab, config, 77).accuracy_pct / 100.0;
  CHECK(rnd >= std::max(0.0, p - 3.0 * se - p));  // never negative
  CHECK(std::abs(rnd - p) <= std::max(3.0 * se, 2.0 / static_cast<double>(n)));
}

TEST_CASE("oop average is the unweighted mean of the five kinds") {
  std::map<std::string, double> by_tag = {
      {"turn_compression_it", 50.0}, {"new_api_it", 10.0},      {"reordering_it", 30.0},
      {"another_slot_it", 40.0},     {"audit_more_it", 20.0},   {"test_it", 90.0}};
  CHECK(oop_average(by_tag, "it") == doctest::Approx(30.0));
  by_tag.erase("new_api_it");
  CHECK(oop_average(by_tag, "it") < 0.0);
}

TEST_CASE("report tables include every row and mark missing cells") {
  ReportData data;
  for (const std::string& cond : {"it", "oot"}) {
    data["smn"]["test_" + cond] = 85.0;
    data["smn"]["turn_compression_" + cond] = 40.0;
    data["smn"]["new_api_" + cond] = 5.0;
    data["smn"]["reordering_" + cond] = 50.0;
    data["smn"]["another_slot_" + cond] = 45.0;
    data["smn"]["audit_more_" + cond] = 30.0;
    data["smn"]["multi_turn_compression_" + cond] = 35.0;
  }
  std::string table = render_report(data);
  for (const char* row : {"Non OOP", "Turn Comp.", "New API", "Reordering", "Another Slot",
                          "Audit More", "OOP Avg."})
    CHECK(table.find(row) != std::string::npos);
  CHECK(table.find("85.0") != std::string::npos);
  CHECK(table.find("34.0") != std::string::npos);  // the OOP average
  CHECK(table.find("--") != std::string::npos);    // mmn column absent
}

TEST_CASE("trend checking accepts the expected profile and names violations") {
  ReportData good;
  auto fill = [&](const std::string& model, double non_oop, double tc, double na, double ro,
                  double as, double am, double multi_tc, double multi_am) {
    for (const std::string& cond : {"it", "oot"}) {
      good[model]["test_" + cond] = non_oop;
      good[model]["turn_compression_" + cond] = tc;
      good[model]["new_api_" + cond] = na;
      good[model]["reordering_" + cond] = ro;
      good[model]["another_slot_" + cond] = as;
      good[model]["audit_more_" + cond] = am;
      good[model]["multi_turn_compression_" + cond] = multi_tc;
      good[model]["multi_audit_more_" + cond] = multi_am;
    }
  };
  fill("smn", 90.0, 30.0, 5.0, 55.0, 50.0, 35.0, 25.0, 30.0);
  fill("mmn", 88.0, 45.0, 6.0, 40.0, 38.0, 50.0, 40.0, 35.0);
  CHECK(trend_violations(good).empty());

  ReportData bad = good;
  bad["smn"]["test_it"] = 60.0;  // non-OOP accuracy too low
  CHECK(!trend_violations(bad).empty());

  ReportData worst_kind = good;
  worst_kind["smn"]["new_api_it"] = 70.0;  // new API must stay the worst set
  worst_kind["smn"]["new_api_oot"] = 70.0;
  CHECK(!trend_violations(worst_kind).empty());

  ReportData no_gap = good;
  // the multi-network lead on turn compression must be at least 10 points
  no_gap["mmn"]["turn_compression_it"] = 32.0;
  CHECK(!trend_violations(no_gap).empty());

  // single-model data skips cross-model checks
  ReportData solo;
  solo["smn"] = good["smn"];
  CHECK(trend_violations(solo).empty());
}
