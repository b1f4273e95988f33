#pragma once

#include <vector>

#include "bankdial/action.hpp"
#include "bankdial/rng.hpp"
#include "bankdial/schema.hpp"
#include "bankdial/selfplay.hpp"

namespace bankdial {

// Which intents can host a given out-of-pattern phenomenon. Intents that
// cannot are left out of that test set rather than padded.
std::vector<std::string> eligible_intents(ChallengeKind kind, bool multiple);

Dialogue gen_turn_compression(const IntentSchema& schema, const UserProfile& profile,
                              const PolicyConfig& policy, uint64_t seed, bool multiple);

enum class NewApiParity { train, test };
Dialogue gen_new_api(const IntentSchema& schema, const UserProfile& profile,
                     const PolicyConfig& policy, uint64_t seed, NewApiParity parity);

Dialogue gen_reordering(const IntentSchema& schema, const UserProfile& profile,
                        const PolicyConfig& policy, uint64_t seed);

Dialogue gen_another_slot(const IntentSchema& schema, const UserProfile& profile,
                          const PolicyConfig& policy, uint64_t seed);

Dialogue gen_audit_more(const IntentSchema& schema, const UserProfile& profile,
                        const PolicyConfig& policy, uint64_t seed, bool multiple);

// Dispatch on kind.
Dialogue gen_challenge(ChallengeKind kind, bool multiple, const IntentSchema& schema,
                       const UserProfile& profile, const PolicyConfig& policy, uint64_t seed);

// True iff the dialogue exhibits at least one instance of `kind` and zero
// instances of the other four kinds. Pure pattern scan over the actions.
bool verify_pattern(const Dialogue& d, ChallengeKind kind);

// Instances of each phenomenon present in the dialogue (the scanner behind
// verify_pattern, exposed for leakage audits).
int count_pattern(const Dialogue& d, ChallengeKind kind);

}  // namespace bankdial
