#pragma once

#include <stdexcept>
#include <map>
#include <string>
#include <vector>

#include "bankdial/action.hpp"
#include "bankdial/rng.hpp"
#include "bankdial/schema.hpp"

namespace bankdial {

// System bot state. One dialogue is one walk of this machine.
struct BotState {
  std::string intent;
  enum class Path { primary, fallback };
  Path active_path = Path::primary;
  enum class Phase {
    opening,         // greeting not yet answered
    slot_filling,    // a request_slot is outstanding
    validating,      // an api_call is outstanding
    change_confirm,  // a fail_confirm question is outstanding
    final_confirm,   // waiting for the user's go-ahead
    closing,         // final api_call is outstanding
    closed
  };
  Phase phase = Phase::opening;
  std::vector<std::string> pending;            // slots still to request, in order
  std::vector<std::string> preset_order;       // overrides primary order when set (reordering)
  std::string awaiting_slot;                   // slot of the outstanding request / change question
  std::string pending_invalid_value;           // rejected value under change-confirm
  std::map<std::string, std::string> filled;   // validated values only
  int consecutive_invalid = 0;
};

struct StepResult {
  BotState state;
  std::vector<Action> actions;
};

// One system-bot transition. Deterministic given inputs; throws FsmError when
// the incoming act is not legal in the current phase.
StepResult system_step(const BotState& state, const Action& incoming, const UserProfile& profile,
                       const PolicyConfig& policy);

// One user-bot move in reply to a system action.
Action user_step(const BotState& state, const Action& incoming, const UserProfile& profile,
                 const PolicyConfig& policy, RngStream& rng);

// Adjudicates an api_call against the profile. `filled` supplies context for
// slots whose legal values depend on earlier answers (card_type).
Action simulate_api(const Action& call, const UserProfile& profile, const PolicyConfig& policy,
                    RngStream& rng, const std::map<std::string, std::string>& filled);

struct FsmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scripted deviations injected by the challenge compilers. An empty script
// yields a plain policy-conformant dialogue.
struct ChallengeScript {
  ChallengeKind kind = ChallengeKind::none;
  bool multiple = false;

  // turn_compression: slots whose first answer is forced invalid and whose
  // change question gets the compressed "yes + new value" reply.
  // another_slot: pairs (requested slot -> slot actually informed).
  // audit_more: occurrences of (change-turn slot, extra slot, extra value valid?).
  struct AuditOccurrence {
    std::string slot;        // change turn happens here (first answer forced invalid)
    std::string extra_slot;  // additionally informed slot
    bool extra_valid = true; // invalid extras chain into the next occurrence
  };
  std::vector<std::string> compression_slots;
  std::vector<std::pair<std::string, std::string>> another_slot_pairs;
  std::vector<AuditOccurrence> audit_occurrences;
  std::vector<std::string> request_order;  // reordering: permutation of primary slots
  int opening_count = -1;                  // new_api: forced number of opening slots
};

// Runs the full two-bot game and returns the action-level dialogue
// (turn texts empty). Deterministic given (schema, profile, policy, seed).
Dialogue run_episode(const IntentSchema& schema, const UserProfile& profile,
                     const PolicyConfig& policy, uint64_t seed,
                     const ChallengeScript& script = {});

}  // namespace bankdial
