#include <doctest.h>

#include "bankdial/policy.hpp"
#include "bankdial/selfplay.hpp"

using namespace bankdial;

namespace {

UserProfile profile_for(uint64_t seed) {
  RngStream rng(RngStream::derive(seed, "profile", 0));
  return sample_profile(ProfilePools::defaults(), rng);
}

bool has_violation(const std::vector<Violation>& vs, ViolationCode code) {
  for (const auto& v : vs)
    if (v.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("empty and truncated dialogues are flagged") {
  PolicyConfig policy;
  Dialogue empty;
  empty.intent = "transfer";
  CHECK(has_violation(validate_policy(empty, policy), ViolationCode::MissingOpening));

  UserProfile p = profile_for(1);
  Dialogue d = run_episode(schema_for("transfer"), p, policy, 1);
  Dialogue cut = d;
  cut.turns.pop_back();  // drop the closing turn
  CHECK(has_violation(validate_policy(cut, policy), ViolationCode::MissingClosing));
}

TEST_CASE("generated dialogues carry no violations") {
  PolicyConfig policy;
  for (const auto& schema : builtin_schemas()) {
    UserProfile p = profile_for(9);
    Dialogue d = run_episode(schema, p, policy, 17);
    CHECK(validate_policy(d, policy).empty());
  }
}

TEST_CASE("tampering is detected") {
  PolicyConfig policy;
  UserProfile p = profile_for(2);

  SUBCASE("an inform without its validation call") {
    Dialogue d = run_episode(schema_for("transfer"), p, policy, 2);
    for (size_t i = 0; i + 1 < d.turns.size(); ++i) {
      if (d.turns[i].action.act == acts::inform &&
          d.turns[i + 1].action.act == acts::api_call) {
        d.turns.erase(d.turns.begin() + static_cast<long>(i) + 1);
        break;
      }
    }
    CHECK(has_violation(validate_policy(d, policy), ViolationCode::UnvalidatedValue));
  }

  SUBCASE("too many consecutive failures without termination") {
    PolicyConfig strict = policy;
    strict.invalid_prob = 1.0;
    strict.change_yes_prob = 1.0;
    strict.recall_fail_prob = 0.0;
    Dialogue d = run_episode(schema_for("transfer"), p, strict, 3);
    PolicyConfig tighter = strict;
    tighter.max_consecutive_invalid = 2;
    CHECK(has_violation(validate_policy(d, tighter), ViolationCode::MaxInvalidExceeded));
  }

  SUBCASE("a dialogue that does not open with the greeting") {
    Dialogue d = run_episode(schema_for("balance"), p, policy, 4);
    d.turns.erase(d.turns.begin());
    CHECK(has_violation(validate_policy(d, policy), ViolationCode::MissingOpening));
  }

  SUBCASE("turns without an action are structural errors") {
    Dialogue d = run_episode(schema_for("balance"), p, policy, 5);
    d.turns[0].action.act = "";
    CHECK_THROWS_AS(validate_policy(d, policy), StructuralError);
  }
}
