#include <doctest.h>

#include <set>

#include "bankdial/challenge.hpp"
#include "bankdial/policy.hpp"

using namespace bankdial;

namespace {

UserProfile profile_for(uint64_t seed) {
  RngStream rng(RngStream::derive(seed, "profile", 0));
  return sample_profile(ProfilePools::defaults(), rng);
}

}  // namespace

TEST_CASE("eligibility lists match the schemas") {
  // every intent can compress a turn; the others need enough slots
  CHECK(eligible_intents(ChallengeKind::turn_compression, false) == intent_names());
  for (ChallengeKind k : {ChallengeKind::new_api, ChallengeKind::reordering,
                          ChallengeKind::another_slot, ChallengeKind::audit_more}) {
    auto is = eligible_intents(k, false);
    std::set<std::string> s(is.begin(), is.end());
    CHECK(s.count("transfer") == 1);
    CHECK(s.count("balance") == 0);
    CHECK(s.count("limit") == 0);
  }
  // multiple variants need at least two primary slots
  CHECK(!eligible_intents(ChallengeKind::turn_compression, true).empty());
  CHECK(!eligible_intents(ChallengeKind::audit_more, true).empty());
  for (const auto& intent : eligible_intents(ChallengeKind::turn_compression, true))
    CHECK(schema_for(intent).primary_slots.size() >= 2);
}

TEST_CASE("each generator produces exactly its own phenomenon") {
  PolicyConfig policy;
  for (ChallengeKind kind : all_challenge_kinds()) {
    for (const std::string& intent : eligible_intents(kind, false)) {
      for (uint64_t seed = 0; seed < 10; ++seed) {
        UserProfile p = profile_for(seed + 40);
        Dialogue d = gen_challenge(kind, false, schema_for(intent), p, policy, seed);
        CAPTURE(to_string(kind));
        CAPTURE(intent);
        CAPTURE(seed);
        CHECK(verify_pattern(d, kind));
        CHECK(count_pattern(d, kind) >= 1);
        for (ChallengeKind other : all_challenge_kinds())
          if (other != kind) CHECK(count_pattern(d, other) == 0);
        CHECK(d.tags.challenge == kind);
        CHECK(!d.tags.multiple);
      }
    }
  }
}

TEST_CASE("multiple variants repeat the phenomenon at least twice") {
  PolicyConfig policy;
  for (ChallengeKind kind : {ChallengeKind::turn_compression, ChallengeKind::audit_more}) {
    for (const std::string& intent : eligible_intents(kind, true)) {
      for (uint64_t seed = 0; seed < 10; ++seed) {
        UserProfile p = profile_for(seed + 90);
        Dialogue d = gen_challenge(kind, true, schema_for(intent), p, policy, seed);
        CAPTURE(to_string(kind));
        CAPTURE(intent);
        CHECK(verify_pattern(d, kind));
        CHECK(count_pattern(d, kind) >= 2);
        CHECK(d.tags.multiple);
      }
    }
  }
}

TEST_CASE("plain dialogues contain none of the phenomena") {
  PolicyConfig policy;
  for (const auto& schema : builtin_schemas()) {
    for (uint64_t seed = 0; seed < 30; ++seed) {
      UserProfile p = profile_for(seed);
      Dialogue d = run_episode(schema, p, policy, seed * 13 + 5);
      for (ChallengeKind k : all_challenge_kinds()) CHECK(count_pattern(d, k) == 0);
    }
  }
}

TEST_CASE("compressed change turns answer the change question with the value") {
  PolicyConfig policy;
  UserProfile p = profile_for(3);
  Dialogue d = gen_turn_compression(schema_for("transfer"), p, policy, 3, false);
  bool saw = false;
  for (size_t i = 0; i + 2 < d.turns.size(); ++i) {
    if (d.turns[i].action.act != acts::confirm_inform) continue;
    saw = true;
    CHECK(d.turns[i - 1].action.act == acts::fail_confirm);
    // the next system-side move validates the new value immediately
    CHECK(d.turns[i + 1].action.act == acts::api_call);
    REQUIRE(!d.turns[i + 1].action.bindings.empty());
    std::string value;
    for (const auto& [k, v] : d.turns[i].action.bindings)
      if (k != "confirm") value = v;
    CHECK(d.turns[i + 1].action.bindings[0].second == value);
  }
  CHECK(saw);
}

TEST_CASE("opening slot counts split by parity between train and challenge sets") {
  PolicyConfig policy;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    UserProfile p = profile_for(seed);
    Dialogue d = gen_new_api(schema_for("transfer"), p, policy, seed, NewApiParity::test);
    const Action& opening = d.turns.at(1).action;
    REQUIRE(opening.act == acts::inform_intent);
    CHECK(opening.bindings.size() % 2 == 0);
    CHECK(!opening.bindings.empty());

    Dialogue plain = run_episode(schema_for("transfer"), p, policy, seed);
    const Action& plain_opening = plain.turns.at(1).action;
    CHECK((plain_opening.bindings.empty() || plain_opening.bindings.size() % 2 == 1));
  }
}

TEST_CASE("reordering requests a non-canonical permutation of all primary slots") {
  PolicyConfig policy;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    UserProfile p = profile_for(seed);
    Dialogue d = gen_reordering(schema_for("transfer"), p, policy, seed);
    std::vector<std::string> requested;
    for (const auto& t : d.turns)
      if (t.action.act == acts::request_slot)
        for (const auto& [k, v] : t.action.bindings)
          if (k == "slot") requested.push_back(v);
    std::vector<std::string> canonical;
    for (const auto& s : schema_for("transfer").primary_slots) canonical.push_back(s.name);
    CHECK(requested != canonical);
    std::vector<std::string> sorted_req = requested, sorted_can = canonical;
    std::sort(sorted_req.begin(), sorted_req.end());
    std::sort(sorted_can.begin(), sorted_can.end());
    CHECK(sorted_req == sorted_can);
  }
}

TEST_CASE("another-slot answers carry a different slot than was requested") {
  PolicyConfig policy;
  UserProfile p = profile_for(8);
  Dialogue d = gen_another_slot(schema_for("transfer"), p, policy, 8);
  bool saw = false;
  for (size_t i = 1; i < d.turns.size(); ++i) {
    if (d.turns[i].action.act != acts::inform) continue;
    if (d.turns[i - 1].action.act != acts::request_slot) continue;
    std::string asked;
    for (const auto& [k, v] : d.turns[i - 1].action.bindings)
      if (k == "slot") asked = v;
    for (const auto& [slot, _] : d.turns[i].action.bindings)
      if (slot != asked) saw = true;
  }
  CHECK(saw);
}

TEST_CASE("audited extras are validated in one combined call") {
  PolicyConfig policy;
  UserProfile p = profile_for(12);
  Dialogue d = gen_audit_more(schema_for("transfer"), p, policy, 12, false);
  bool saw = false;
  for (size_t i = 0; i + 1 < d.turns.size(); ++i) {
    const Action& a = d.turns[i].action;
    // the audited answer is a plain inform carrying the requested slot plus extras
    if (d.turns[i].speaker != Speaker::user || a.act != acts::inform || a.bindings.size() < 2)
      continue;
    saw = true;
    const Action& call = d.turns[i + 1].action;
    CHECK(call.act == acts::api_call);
    CHECK(call.api == "multi_check");
    CHECK(call.bindings.size() == a.bindings.size());
  }
  CHECK(saw);
}

TEST_CASE("infeasible kind and intent combinations fail loudly") {
  PolicyConfig policy;
  UserProfile p = profile_for(1);
  CHECK_THROWS_AS(gen_reordering(schema_for("balance"), p, policy, 1), GenerationError);
  CHECK_THROWS_AS(gen_another_slot(schema_for("balance"), p, policy, 1), GenerationError);
}
