#include "bankdial/challenge.hpp"

#include <algorithm>
#include <stdexcept>

namespace bankdial {

namespace {

std::vector<std::string> primary_names(const IntentSchema& s) {
  std::vector<std::string> out;
  for (const auto& spec : s.primary_slots) out.push_back(spec.name);
  return out;
}

}  // namespace

std::vector<std::string> eligible_intents(ChallengeKind kind, bool multiple) {
  std::vector<std::string> out;
  for (const auto& schema : builtin_schemas()) {
    bool ok = false;
    switch (kind) {
      case ChallengeKind::turn_compression:
        ok = !schema.primary_slots.empty();
        break;
      case ChallengeKind::new_api:
        ok = schema.opening_slots.size() >= 2;
        break;
      case ChallengeKind::reordering:
      case ChallengeKind::another_slot:
      case ChallengeKind::audit_more:
        ok = schema.primary_slots.size() >= 2;
        break;
      case ChallengeKind::none:
        break;
    }
    if (multiple && schema.primary_slots.size() < 2) ok = false;
    if (ok) out.push_back(schema.name);
  }
  return out;
}

Dialogue gen_turn_compression(const IntentSchema& schema, const UserProfile& profile,
                              const PolicyConfig& policy, uint64_t seed, bool multiple) {
  std::vector<std::string> slots = primary_names(schema);
  ChallengeScript script;
  script.kind = ChallengeKind::turn_compression;
  script.multiple = multiple;
  script.opening_count = 0;  // compressed slots must actually be requested
  size_t n = multiple ? 2 : 1;
  if (slots.size() < n)
    throw GenerationError("intent " + schema.name + " cannot host " + std::to_string(n) +
                          " turn compressions");
  // compress the earliest requested slots so the phenomenon lands as soon
  // as possible and shapes the rest of the dialogue
  slots.resize(n);
  script.compression_slots = slots;
  return run_episode(schema, profile, policy, seed, script);
}

Dialogue gen_new_api(const IntentSchema& schema, const UserProfile& profile,
                     const PolicyConfig& policy, uint64_t seed, NewApiParity parity) {
  if (schema.opening_slots.size() < 2)
    throw GenerationError("intent " + schema.name + " cannot host an even opening slot count");
  ChallengeScript script;
  script.kind = ChallengeKind::new_api;
  if (parity == NewApiParity::test) {
    // largest even count is 2 for every eligible intent in this domain
    script.opening_count = 2;
  } else {
    RngStream rng(RngStream::derive(seed, "newapi-plan", 0));
    std::vector<int> allowed = {0};
    for (int k = 1; k <= static_cast<int>(schema.opening_slots.size()); k += 2) allowed.push_back(k);
    script.opening_count = allowed[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(allowed.size()) - 1))];
  }
  Dialogue d = run_episode(schema, profile, policy, seed, script);
  if (parity == NewApiParity::train) d.tags.challenge = ChallengeKind::none;
  return d;
}

Dialogue gen_reordering(const IntentSchema& schema, const UserProfile& profile,
                        const PolicyConfig& policy, uint64_t seed) {
  std::vector<std::string> order = primary_names(schema);
  if (order.size() < 2)
    throw GenerationError("intent " + schema.name + " has a single slot; nothing to reorder");
  RngStream rng(RngStream::derive(seed, "reorder-plan", 0));
  std::vector<std::string> shuffled = order;
  // deviate from the canonical order at the very first request
  do {
    rng.shuffle(shuffled);
  } while (shuffled == order || shuffled.front() == order.front());
  ChallengeScript script;
  script.kind = ChallengeKind::reordering;
  script.request_order = shuffled;
  script.opening_count = 0;  // the full permutation must be observable
  return run_episode(schema, profile, policy, seed, script);
}

Dialogue gen_another_slot(const IntentSchema& schema, const UserProfile& profile,
                          const PolicyConfig& policy, uint64_t seed) {
  std::vector<std::string> slots = primary_names(schema);
  if (slots.size() < 2)
    throw GenerationError("intent " + schema.name + " has no other slot to answer with");
  RngStream rng(RngStream::derive(seed, "another-plan", 0));
  // answer the very first request with a different slot
  size_t yi = static_cast<size_t>(rng.uniform_int(1, static_cast<int>(slots.size()) - 1));
  ChallengeScript script;
  script.kind = ChallengeKind::another_slot;
  script.another_slot_pairs = {{slots[0], slots[yi]}};
  script.opening_count = 0;  // both slots must still be open when X is requested
  return run_episode(schema, profile, policy, seed, script);
}

Dialogue gen_audit_more(const IntentSchema& schema, const UserProfile& profile,
                        const PolicyConfig& policy, uint64_t seed, bool multiple) {
  std::vector<std::string> slots = primary_names(schema);
  if (slots.size() < 2)
    throw GenerationError("intent " + schema.name + " has no extra slot to audit");
  ChallengeScript script;
  script.kind = ChallengeKind::audit_more;
  script.multiple = multiple;
  script.opening_count = 0;
  RngStream rng(RngStream::derive(seed, "audit-plan", 0));
  if (!multiple) {
    // the very first answer already carries a second slot
    size_t yi = static_cast<size_t>(rng.uniform_int(1, static_cast<int>(slots.size()) - 1));
    script.audit_occurrences.push_back({slots[0], slots[yi], true});
  } else {
    // The chain runs backwards through the slot order: the first answer drags
    // in the last slot with an invalid value, its re-request drags in the slot
    // before it, and so on. Every re-request after the first lands out of the
    // canonical order, and the skipped slots are never asked for directly.
    script.audit_occurrences.push_back({slots[0], slots.back(), false});
    for (size_t i = slots.size() - 1; i > 1; --i) {
      bool last = i == 2;
      script.audit_occurrences.push_back({slots[i], slots[i - 1], last});
    }
  }
  return run_episode(schema, profile, policy, seed, script);
}

Dialogue gen_challenge(ChallengeKind kind, bool multiple, const IntentSchema& schema,
                       const UserProfile& profile, const PolicyConfig& policy, uint64_t seed) {
  switch (kind) {
    case ChallengeKind::turn_compression:
      return gen_turn_compression(schema, profile, policy, seed, multiple);
    case ChallengeKind::new_api:
      return gen_new_api(schema, profile, policy, seed, NewApiParity::test);
    case ChallengeKind::reordering:
      return gen_reordering(schema, profile, policy, seed);
    case ChallengeKind::another_slot:
      return gen_another_slot(schema, profile, policy, seed);
    case ChallengeKind::audit_more:
      return gen_audit_more(schema, profile, policy, seed, multiple);
    case ChallengeKind::none:
      break;
  }
  throw std::invalid_argument("gen_challenge: bad kind");
}

int count_pattern(const Dialogue& d, ChallengeKind kind) {
  int hits = 0;
  std::string requested;  // slot of the most recent request_slot
  const IntentSchema& schema = schema_for(d.intent);

  // first-time request order for the reordering scan
  std::vector<std::string> first_requests;
  for (const auto& t : d.turns) {
    if (t.action.act == acts::request_slot) {
      std::string slot;
      for (const auto& [k, v] : t.action.bindings)
        if (k == "slot") slot = v;
      if (std::find(first_requests.begin(), first_requests.end(), slot) == first_requests.end())
        first_requests.push_back(slot);
    }
  }

  switch (kind) {
    case ChallengeKind::turn_compression:
      for (const auto& t : d.turns)
        if (t.action.act == acts::confirm_inform) ++hits;
      return hits;

    case ChallengeKind::new_api:
      for (const auto& t : d.turns) {
        if (t.action.act == acts::inform_intent && t.action.bindings.size() >= 2 &&
            t.action.bindings.size() % 2 == 0)
          ++hits;
      }
      return hits;

    case ChallengeKind::reordering: {
      std::vector<std::string> canonical;
      for (const auto& s : schema.canonical_slots()) canonical.push_back(s.name);
      size_t ci = 0;
      for (const auto& slot : first_requests) {
        while (ci < canonical.size() && canonical[ci] != slot) ++ci;
        if (ci == canonical.size()) return 1;
        ++ci;
      }
      return 0;
    }

    case ChallengeKind::another_slot:
      for (const auto& t : d.turns) {
        if (t.action.act == acts::request_slot) {
          for (const auto& [k, v] : t.action.bindings)
            if (k == "slot") requested = v;
        } else if (t.speaker == Speaker::user && t.action.act == acts::inform &&
                   t.action.bindings.size() == 1 && !requested.empty() &&
                   t.action.bindings[0].first != requested) {
          ++hits;
        }
      }
      return hits;

    case ChallengeKind::audit_more:
      for (const auto& t : d.turns)
        if (t.speaker == Speaker::user && t.action.act == acts::inform &&
            t.action.bindings.size() >= 2)
          ++hits;
      return hits;

    case ChallengeKind::none:
      break;
  }
  throw std::invalid_argument("count_pattern: bad kind");
}

bool verify_pattern(const Dialogue& d, ChallengeKind kind) {
  if (count_pattern(d, kind) < 1) return false;
  for (ChallengeKind other : all_challenge_kinds()) {
    if (other == kind) continue;
    if (count_pattern(d, other) > 0) return false;
  }
  return true;
}

}  // namespace bankdial
