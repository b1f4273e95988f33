#include <doctest.h>

#include <set>

#include "bankdial/schema.hpp"

using namespace bankdial;

TEST_CASE("the six intent schemas match the domain description") {
  CHECK(intent_names() == std::vector<std::string>{"transfer", "cancel_transfer", "block_card",
                                                   "transaction_history", "balance", "limit"});

  const IntentSchema& transfer = schema_for("transfer");
  REQUIRE(transfer.primary_slots.size() == 3);
  CHECK(transfer.primary_slots[0].name == "user_account");
  CHECK(transfer.primary_slots[1].name == "partner_name");
  CHECK(transfer.primary_slots[2].name == "amount");
  CHECK(transfer.needs_final_confirm);

  const IntentSchema& cancel = schema_for("cancel_transfer");
  CHECK(cancel.primary_slots[0].name == "transaction_id");
  REQUIRE(cancel.fallback_slots.size() == 1);
  CHECK(cancel.fallback_slots[0].name == "partner_name");
  CHECK(cancel.recall_optional_slot == "transaction_id");

  const IntentSchema& block = schema_for("block_card");
  CHECK(block.primary_slots[0].name == "card_id");
  REQUIRE(block.fallback_slots.size() == 2);
  CHECK(block.fallback_slots[0].name == "user_account");
  CHECK(block.fallback_slots[1].name == "card_type");

  CHECK(schema_for("transaction_history").primary_slots[0].name == "note");

  // balance and limit differ only in name and final api
  const IntentSchema& balance = schema_for("balance");
  const IntentSchema& limit = schema_for("limit");
  REQUIRE(balance.primary_slots.size() == 1);
  CHECK(balance.primary_slots[0].name == limit.primary_slots[0].name);
  CHECK(balance.primary_slots[0].name == "user_account");
  CHECK(balance.fallback_slots.empty());
  CHECK(limit.fallback_slots.empty());
  CHECK(balance.needs_final_confirm == limit.needs_final_confirm);
  CHECK(balance.final_api != limit.final_api);
}

TEST_CASE("slot specs resolve against sampled profiles") {
  ProfilePools pools = ProfilePools::defaults();
  for (uint64_t seed = 0; seed < 50; ++seed) {
    RngStream rng(seed);
    UserProfile p = sample_profile(pools, rng);
    for (const auto& schema : builtin_schemas())
      for (const auto& spec : schema.canonical_slots())
        CHECK(!p.valid_values(spec.name).empty());
  }
}

TEST_CASE("distractor pools are disjoint from valid values") {
  ProfilePools pools = ProfilePools::defaults();
  for (uint64_t seed = 0; seed < 100; ++seed) {
    RngStream rng(seed);
    UserProfile p = sample_profile(pools, rng);
    for (const auto& [slot, distractors] : p.distractors) {
      CHECK(!distractors.empty());
      auto valid = p.valid_values(slot);
      std::set<std::string> vs(valid.begin(), valid.end());
      for (const auto& d : distractors) {
        CHECK(vs.count(d) == 0);
        CHECK(!p.is_valid(slot, d));
      }
      for (const auto& v : valid) CHECK(p.is_valid(slot, v));
    }
  }
}

TEST_CASE("card types depend on the chosen account") {
  ProfilePools pools = ProfilePools::defaults();
  RngStream rng(11);
  UserProfile p = sample_profile(pools, rng);
  REQUIRE(p.accounts.size() >= 2);
  auto all = p.valid_values("card_type");
  auto scoped = p.valid_values("card_type", p.accounts[0]);
  CHECK(scoped.size() <= all.size());
  for (const auto& t : scoped) CHECK(p.is_valid("card_type", t, p.accounts[0]));
  for (const auto& id : p.card_ids()) CHECK(id.find('-') != std::string::npos);
}

TEST_CASE("policy parameter validation") {
  PolicyConfig p;
  CHECK(p.valid());
  CHECK(p.max_consecutive_invalid == 3);
  p.invalid_prob = 2.0;
  CHECK(!p.valid());
  p.invalid_prob = 0.3;
  p.max_consecutive_invalid = 0;
  CHECK(!p.valid());
}
