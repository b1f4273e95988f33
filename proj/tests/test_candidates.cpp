#include <doctest.h>

#include "bankdial/candidates.hpp"
#include "bankdial/normalize.hpp"
#include "bankdial/policy.hpp"
#include "bankdial/selfplay.hpp"
#include "bankdial/surface.hpp"

using namespace bankdial;

namespace {

std::vector<Dialogue> small_corpus() {
  PolicyConfig policy;
  std::vector<Dialogue> corpus;
  for (const auto& schema : builtin_schemas()) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
      RngStream prng(RngStream::derive(seed, "profile", 0));
      UserProfile p = sample_profile(ProfilePools::defaults(), prng);
      corpus.push_back(run_episode(schema, p, policy, seed));
    }
  }
  return corpus;
}

}  // namespace

TEST_CASE("candidate ids follow first occurrence and deduplicate") {
  CandidateSet set;
  CHECK(set.add("alpha") == 0);
  CHECK(set.add("beta") == 1);
  CHECK(set.add("alpha") == 0);
  CHECK(set.size() == 2);
  CHECK(set.at(1) == "beta");
  CHECK(set.id_of("beta") == 1);
  CHECK(!set.id_of("gamma").has_value());
}

TEST_CASE("only system utterances and api calls are candidate turns") {
  for (const Dialogue& d : small_corpus()) {
    for (const Turn& t : d.turns) {
      bool expect = (t.speaker == Speaker::system) ||
                    (t.speaker == Speaker::api && t.action.act == acts::api_call);
      CHECK(is_candidate_turn(t) == expect);
    }
  }
}

TEST_CASE("candidate strings are normalized canonical action strings") {
  Turn t;
  t.speaker = Speaker::api;
  t.action.speaker = Speaker::api;
  t.action.act = acts::api_call;
  t.action.api = "check_partner";
  t.action.intent = "transfer";
  t.action.bindings = {{"partner_name", "Megan"}};
  CHECK(candidate_string(t) == "api partner check megan");
  CHECK(candidate_string(t) == normalize_text(canonical_action_string(t.action)));
}

TEST_CASE("extraction covers every candidate turn of the corpus") {
  auto corpus = small_corpus();
  CandidateSet set = extract_candidates(corpus);
  CHECK(set.size() > 10);
  for (const Dialogue& d : corpus)
    for (const Turn& t : d.turns)
      if (is_candidate_turn(t)) CHECK(set.id_of(candidate_string(t)).has_value());
  // extraction order is deterministic
  CandidateSet again = extract_candidates(corpus);
  CHECK(again.items() == set.items());
  // first dialogue's first candidate turn owns id 0
  for (const Turn& t : corpus.front().turns)
    if (is_candidate_turn(t)) {
      CHECK(set.id_of(candidate_string(t)) == 0);
      break;
    }
}
