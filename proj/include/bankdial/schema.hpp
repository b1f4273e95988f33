#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bankdial/rng.hpp"

namespace bankdial {

struct SlotSpec {
  std::string name;
  std::string validation_api;  // api act issued to check a value
  std::string value_source;    // profile field supplying legal values
};

// The six banking intents. Slot orders are fixed; generation follows them
// strictly unless a challenge compiler says otherwise.
struct IntentSchema {
  std::string name;
  std::vector<SlotSpec> primary_slots;
  std::vector<SlotSpec> fallback_slots;   // entered when recall_optional_slot is unrecalled
  std::string recall_optional_slot;       // empty if none
  std::vector<std::string> opening_slots; // slots the user may volunteer in the opening
  std::string opening_check_phrase;       // e.g. "TRANSFER CHECK" for the combined opening call
  std::string final_api;
  bool needs_final_confirm = false;       // transactional intents confirm before executing

  // primary then fallback; the canonical request order.
  std::vector<SlotSpec> canonical_slots() const;
  const SlotSpec* find_slot(const std::string& name) const;
};

const std::vector<IntentSchema>& builtin_schemas();
const IntentSchema& schema_for(const std::string& intent);
const std::vector<std::string>& intent_names();

// Value pools the profile sampler draws from. Human-editable via JSON.
struct ProfilePools {
  std::vector<std::string> accounts;
  std::vector<std::string> partners;
  std::vector<std::string> amounts;
  std::vector<std::string> notes;
  std::vector<std::string> card_types;
  std::vector<std::string> transaction_ids;

  static ProfilePools defaults();
  static ProfilePools from_json_file(const std::string& path);
};

// The small per-dialogue KB. Valid slot values come from here; invalid ones
// from the disjoint per-profile distractor pools.
struct UserProfile {
  std::vector<std::string> accounts;
  std::vector<std::string> partners;
  std::map<std::string, std::vector<std::string>> cards;  // account -> card types
  struct Transaction {
    std::string id, partner, amount, note;
  };
  std::vector<Transaction> transactions;
  std::map<std::string, std::string> balances;  // account -> amount
  std::map<std::string, std::string> limits;
  std::vector<std::string> amounts;  // transferable amounts

  std::map<std::string, std::vector<std::string>> distractors;  // slot -> invalid values

  // Legal values for a slot. card_type depends on the already-filled account,
  // passed via filled_account (empty -> union over accounts).
  std::vector<std::string> valid_values(const std::string& slot,
                                        const std::string& filled_account = "") const;
  bool is_valid(const std::string& slot, const std::string& value,
                const std::string& filled_account = "") const;
  std::vector<std::string> card_ids() const;  // "<account>-<card type first word>"
};

UserProfile sample_profile(const ProfilePools& pools, RngStream& rng);

struct PolicyConfig {
  int max_consecutive_invalid = 3;
  double invalid_prob = 0.15;
  double final_success_prob = 0.5;
  double recall_fail_prob = 0.5;  // transaction_id / card_id "cannot recall"
  double change_yes_prob = 0.9;   // answer to the change-confirmation question

  bool valid() const {
    auto p01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    return max_consecutive_invalid >= 1 && p01(invalid_prob) && p01(final_success_prob) &&
           p01(recall_fail_prob) && p01(change_yes_prob);
  }
};

}  // namespace bankdial
