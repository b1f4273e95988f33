#include "bankdial/selfplay.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace bankdial {

namespace {

std::string join(const std::vector<std::string>& xs, const std::string& sep = ", ") {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += sep;
    out += x;
  }
  return out;
}

std::string account_context(const std::map<std::string, std::string>& filled, const std::string& slot) {
  if (slot != "card_type") return "";
  auto it = filled.find("user_account");
  return it == filled.end() ? "" : it->second;
}

std::string fail_message(const std::string& slot, const UserProfile& profile,
                         const std::map<std::string, std::string>& filled) {
  if (slot == "user_account") return "list of available accounts " + join(profile.accounts);
  if (slot == "partner_name") return "list of saved partners " + join(profile.partners);
  if (slot == "amount") return "amount not allowed for this account";
  if (slot == "transaction_id") return "no transaction with this id";
  if (slot == "note") return "no transaction matching this note";
  if (slot == "card_id") return "no card with this id";
  if (slot == "card_type") {
    auto it = profile.cards.find(account_context(filled, slot));
    return "list of available cards " + (it == profile.cards.end() ? "" : join(it->second));
  }
  throw FsmError("no fail message for slot: " + slot);
}

Action make_request_slot(const std::string& slot, const UserProfile& profile,
                         const std::map<std::string, std::string>& filled) {
  Action a;
  a.speaker = Speaker::system;
  a.act = acts::request_slot;
  a.bindings = {{"slot", slot}};
  if (slot == "card_type") {
    auto it = profile.cards.find(account_context(filled, slot));
    a.bindings.emplace_back("options", it == profile.cards.end() ? "" : join(it->second));
  }
  return a;
}

Action make_final_call(const BotState& st) {
  const IntentSchema& schema = schema_for(st.intent);
  Action a;
  a.speaker = Speaker::api;
  a.act = acts::api_call;
  a.api = schema.final_api;
  a.intent = st.intent;
  auto filled_value = [&](const std::string& slot) {
    auto it = st.filled.find(slot);
    return it == st.filled.end() ? std::string() : it->second;
  };
  if (st.intent == "transfer") {
    a.bindings = {{"user_account", filled_value("user_account")},
                  {"partner_name", filled_value("partner_name")},
                  {"amount", filled_value("amount")}};
  } else if (st.intent == "cancel_transfer") {
    if (!filled_value("transaction_id").empty()) {
      a.bindings = {{"transaction_id", filled_value("transaction_id")}};
    } else {
      a.bindings = {{"partner_name", filled_value("partner_name")}};
    }
  } else if (st.intent == "block_card") {
    std::string card_id = filled_value("card_id");
    if (card_id.empty()) {
      std::string type = filled_value("card_type");
      card_id = filled_value("user_account") + "-" + type.substr(0, type.find(' '));
    }
    a.bindings = {{"card_id", card_id}};
  } else if (st.intent == "transaction_history") {
    a.bindings = {{"note", filled_value("note")}};
    if (!filled_value("partner_name").empty()) a.bindings.emplace_back("partner_name", filled_value("partner_name"));
  } else {  // balance / limit
    a.bindings = {{"user_account", filled_value("user_account")}};
  }
  return a;
}

// Request the next pending slot, or move into the final phase.
void advance(BotState& st, const UserProfile& profile, std::vector<Action>& out) {
  const IntentSchema& schema = schema_for(st.intent);
  if (!st.pending.empty()) {
    st.awaiting_slot = st.pending.front();
    st.phase = BotState::Phase::slot_filling;
    out.push_back(make_request_slot(st.awaiting_slot, profile, st.filled));
    return;
  }
  if (schema.needs_final_confirm) {
    Action a;
    a.speaker = Speaker::system;
    a.act = acts::request_final_confirm;
    a.intent = st.intent;
    st.phase = BotState::Phase::final_confirm;
    out.push_back(a);
    return;
  }
  st.phase = BotState::Phase::closing;
  out.push_back(make_final_call(st));
}

Action make_validation_call(const BotState& st, const std::vector<Binding>& values) {
  Action a;
  a.speaker = Speaker::api;
  a.act = acts::api_call;
  a.intent = st.intent;
  if (values.size() == 1) {
    const SlotSpec* spec = schema_for(st.intent).find_slot(values[0].first);
    if (spec == nullptr) throw FsmError("no slot spec for " + values[0].first + " in " + st.intent);
    a.api = spec->validation_api;
  } else {
    a.api = "multi_check";
  }
  a.bindings = values;
  return a;
}

void fill_slots(BotState& st, const std::vector<Binding>& values) {
  for (const auto& [slot, value] : values) {
    st.filled[slot] = value;
    st.pending.erase(std::remove(st.pending.begin(), st.pending.end(), slot), st.pending.end());
  }
}

Action make_end_call(const BotState& st, const std::string& outcome, const std::string& value) {
  Action a;
  a.speaker = Speaker::system;
  a.act = acts::end_call;
  a.intent = st.intent;
  a.bindings = {{"outcome", outcome}};
  if (!value.empty()) a.bindings.emplace_back("value", value);
  return a;
}

}  // namespace

StepResult system_step(const BotState& state, const Action& incoming, const UserProfile& profile,
                       const PolicyConfig& policy) {
  if (state.phase == BotState::Phase::closed) {
    throw FsmError("system_step after close (act " + incoming.act + ")");
  }
  StepResult r;
  r.state = state;
  BotState& st = r.state;
  const std::string phase_name = std::to_string(static_cast<int>(state.phase));

  if (incoming.act == acts::inform_intent) {
    if (state.phase != BotState::Phase::opening)
      throw FsmError("inform_intent outside the opening phase");
    st.intent = incoming.intent;
    const IntentSchema& schema = schema_for(st.intent);
    st.pending.clear();
    if (!st.preset_order.empty()) {
      st.pending = st.preset_order;
    } else {
      for (const auto& s : schema.primary_slots) st.pending.push_back(s.name);
    }
    if (!incoming.bindings.empty()) {
      Action call;
      call.speaker = Speaker::api;
      call.act = acts::api_call;
      call.api = "intent_check";
      call.intent = st.intent;
      call.bindings = incoming.bindings;
      st.phase = BotState::Phase::validating;
      r.actions.push_back(call);
    } else {
      advance(st, profile, r.actions);
    }
    return r;
  }

  if (incoming.act == acts::inform) {
    if (state.phase != BotState::Phase::slot_filling)
      throw FsmError("inform while no slot request is outstanding");
    st.phase = BotState::Phase::validating;
    r.actions.push_back(make_validation_call(st, incoming.bindings));
    return r;
  }

  if (incoming.act == acts::cannot_recall) {
    if (state.phase != BotState::Phase::slot_filling)
      throw FsmError("cannot_recall while no slot request is outstanding");
    const IntentSchema& schema = schema_for(st.intent);
    if (schema.fallback_slots.empty())
      throw FsmError("cannot_recall but intent " + st.intent + " has no fallback path");
    st.active_path = BotState::Path::fallback;
    st.pending.clear();
    for (const auto& s : schema.fallback_slots) st.pending.push_back(s.name);
    advance(st, profile, r.actions);
    return r;
  }

  if (incoming.act == acts::confirm || incoming.act == acts::confirm_inform) {
    bool yes = incoming.act == acts::confirm_inform ||
               (!incoming.bindings.empty() && incoming.bindings[0].second == "yes");
    if (state.phase == BotState::Phase::change_confirm) {
      if (incoming.act == acts::confirm_inform) {
        // compressed reply: confirmation and the new value in one move
        std::vector<Binding> values;
        for (const auto& b : incoming.bindings)
          if (b.first != "confirm") values.push_back(b);
        st.phase = BotState::Phase::validating;
        r.actions.push_back(make_validation_call(st, values));
      } else if (yes) {
        // re-ask the same slot (the change turn)
        st.phase = BotState::Phase::slot_filling;
        r.actions.push_back(make_request_slot(st.awaiting_slot, profile, st.filled));
      } else {
        // user keeps the value; re-validate it
        st.phase = BotState::Phase::validating;
        r.actions.push_back(make_validation_call(st, {{st.awaiting_slot, st.pending_invalid_value}}));
      }
      return r;
    }
    if (state.phase == BotState::Phase::final_confirm) {
      if (!yes) throw FsmError("final confirmation declined is not modeled");
      st.phase = BotState::Phase::closing;
      r.actions.push_back(make_final_call(st));
      return r;
    }
    throw FsmError("confirm outside a confirmation phase");
  }

  if (incoming.act == acts::api_response) {
    if (state.phase == BotState::Phase::closing) {
      st.phase = BotState::Phase::closed;
      bool ok = incoming.success.value_or(false);
      r.actions.push_back(make_end_call(st, ok ? "success" : "failure", ok ? incoming.message : ""));
      return r;
    }
    if (state.phase != BotState::Phase::validating)
      throw FsmError("api_response outside a validation phase");
    if (incoming.success.value_or(false)) {
      fill_slots(st, incoming.bindings);
      st.consecutive_invalid = 0;
      advance(st, profile, r.actions);
      return r;
    }
    // partial results: valid sub-checks are filled even when the whole fails
    fill_slots(st, incoming.bindings);
    st.consecutive_invalid += 1;
    if (st.consecutive_invalid >= policy.max_consecutive_invalid) {
      st.phase = BotState::Phase::closed;
      r.actions.push_back(make_end_call(st, "terminated", ""));
      return r;
    }
    const std::string& failing_slot = incoming.failed_slot;
    if (failing_slot.empty()) throw FsmError("failed api_response without failed_slot");
    Action fc;
    fc.speaker = Speaker::system;
    fc.act = acts::fail_confirm;
    fc.intent = st.intent;
    fc.bindings = {{"slot", failing_slot}};
    if (failing_slot == "user_account") {
      fc.bindings.emplace_back("available", join(profile.accounts));
    } else if (failing_slot == "card_type") {
      auto it = profile.cards.find(account_context(st.filled, failing_slot));
      fc.bindings.emplace_back("available", it == profile.cards.end() ? "" : join(it->second));
    }
    st.awaiting_slot = failing_slot;
    st.pending_invalid_value = incoming.failed_value;
    st.phase = BotState::Phase::change_confirm;
    r.actions.push_back(fc);
    return r;
  }

  throw FsmError("act " + incoming.act + " not legal in phase " + phase_name);
}

Action user_step(const BotState& state, const Action& incoming, const UserProfile& profile,
                 const PolicyConfig& policy, RngStream& rng) {
  const IntentSchema& schema = schema_for(state.intent);

  if (incoming.act == acts::request_intent) {
    Action a;
    a.speaker = Speaker::user;
    a.act = acts::inform_intent;
    a.intent = schema.name;
    // verbosity: 0 or an odd number of volunteered slots
    std::vector<int> allowed = {0};
    for (int k = 1; k <= static_cast<int>(schema.opening_slots.size()); k += 2) allowed.push_back(k);
    int k = allowed[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(allowed.size()) - 1))];
    if (k > 0) {
      std::vector<std::string> pool = schema.opening_slots;
      rng.shuffle(pool);
      pool.resize(static_cast<size_t>(k));
      for (const auto& slot : schema.opening_slots) {
        if (std::find(pool.begin(), pool.end(), slot) == pool.end()) continue;
        a.bindings.emplace_back(slot, rng.pick(profile.valid_values(slot)));
      }
    }
    return a;
  }

  if (incoming.act == acts::request_slot) {
    std::string slot = incoming.bindings[0].second;
    if (slot == schema.recall_optional_slot && state.active_path == BotState::Path::primary &&
        rng.bernoulli(policy.recall_fail_prob)) {
      Action a;
      a.speaker = Speaker::user;
      a.act = acts::cannot_recall;
      a.bindings = {{slot, ""}};
      return a;
    }
    Action a;
    a.speaker = Speaker::user;
    a.act = acts::inform;
    bool invalid = rng.bernoulli(policy.invalid_prob);
    const auto it = profile.distractors.find(slot);
    if (invalid && (it == profile.distractors.end() || it->second.empty())) invalid = false;
    std::string value = invalid
        ? rng.pick(it->second)
        : rng.pick(profile.valid_values(slot, account_context(state.filled, slot)));
    a.bindings = {{slot, value}};
    return a;
  }

  if (incoming.act == acts::fail_confirm) {
    Action a;
    a.speaker = Speaker::user;
    a.act = acts::confirm;
    a.bindings = {{"confirm", rng.bernoulli(policy.change_yes_prob) ? "yes" : "no"}};
    return a;
  }

  if (incoming.act == acts::request_final_confirm) {
    Action a;
    a.speaker = Speaker::user;
    a.act = acts::confirm;
    a.bindings = {{"confirm", "yes"}};
    return a;
  }

  throw FsmError("user_step: unsupported system act " + incoming.act);
}

Action simulate_api(const Action& call, const UserProfile& profile, const PolicyConfig& policy,
                    RngStream& rng, const std::map<std::string, std::string>& filled) {
  Action resp;
  resp.speaker = Speaker::api;
  resp.act = acts::api_response;
  resp.api = call.api;
  resp.intent = call.intent;

  auto validate_one = [&](const std::string& slot, const std::string& value) {
    return profile.is_valid(slot, value, account_context(filled, slot));
  };

  if (call.api == "intent_check" || call.api == "multi_check" ||
      call.api.rfind("check_", 0) == 0) {
    std::vector<Binding> valid_pairs;
    std::string failing_slot, failing_value;
    for (const auto& [slot, value] : call.bindings) {
      if (validate_one(slot, value)) {
        valid_pairs.push_back({slot, value});
      } else if (failing_slot.empty()) {
        failing_slot = slot;
        failing_value = value;
      }
    }
    resp.success = failing_slot.empty();
    resp.bindings = valid_pairs;
    if (!failing_slot.empty()) {
      resp.failed_slot = failing_slot;
      resp.failed_value = failing_value;
      resp.message = fail_message(failing_slot, profile, filled);
    }
    return resp;
  }

  // final apis
  bool ok = rng.bernoulli(policy.final_success_prob);
  resp.success = ok;
  if (ok) {
    if (call.api == "get_balance") {
      auto it = profile.balances.find(call.bindings[0].second);
      resp.message = it == profile.balances.end() ? "" : it->second;
    } else if (call.api == "get_limit") {
      auto it = profile.limits.find(call.bindings[0].second);
      resp.message = it == profile.limits.end() ? "" : it->second;
    } else if (call.api == "search_transactions") {
      for (const auto& t : profile.transactions) {
        if (t.note == call.bindings[0].second) {
          resp.message = t.id + " to " + t.partner + " for " + t.amount;
          break;
        }
      }
      if (resp.message.empty()) resp.success = false;
    }
  }
  if (call.api != "get_balance" && call.api != "get_limit" && call.api != "search_transactions" &&
      call.api != "execute_transfer" && call.api != "cancel_transfer" && call.api != "block_card") {
    throw FsmError("unknown api: " + call.api);
  }
  return resp;
}

namespace {

// Script-aware user move. Falls back to user_step for everything unscripted.
struct ScriptDriver {
  const ChallengeScript& script;
  const IntentSchema& schema;
  std::set<std::string> force_invalid_pending;
  std::set<std::string> compression_pending;
  std::vector<ChallengeScript::AuditOccurrence> audits;
  std::vector<std::pair<std::string, std::string>> another_pending;
  std::string change_turn_slot;  // set after a scripted confirm-yes

  explicit ScriptDriver(const ChallengeScript& s, const IntentSchema& sch) : script(s), schema(sch) {
    for (const auto& slot : s.compression_slots) {
      force_invalid_pending.insert(slot);
      compression_pending.insert(slot);
    }
    if (!s.audit_occurrences.empty()) force_invalid_pending.insert(s.audit_occurrences.front().slot);
    audits = s.audit_occurrences;
    another_pending = s.another_slot_pairs;
  }

  const ChallengeScript::AuditOccurrence* audit_for(const std::string& slot) const {
    for (const auto& occ : audits)
      if (occ.slot == slot) return &occ;
    return nullptr;
  }

  Action act(const BotState& st, const Action& incoming, const UserProfile& profile,
             const PolicyConfig& policy, RngStream& rng) {
    if (incoming.act == acts::request_intent && script.opening_count >= 0) {
      Action a;
      a.speaker = Speaker::user;
      a.act = acts::inform_intent;
      a.intent = schema.name;
      std::vector<std::string> pool = schema.opening_slots;
      rng.shuffle(pool);
      pool.resize(static_cast<size_t>(script.opening_count));
      for (const auto& slot : schema.opening_slots) {
        if (std::find(pool.begin(), pool.end(), slot) == pool.end()) continue;
        a.bindings.emplace_back(slot, rng.pick(profile.valid_values(slot)));
      }
      return a;
    }

    if (incoming.act == acts::request_slot) {
      std::string slot = incoming.bindings[0].second;
      // audit-more change turn: requested slot plus extras in one utterance
      if (slot == change_turn_slot) {
        change_turn_slot.clear();
        if (const auto* occ = audit_for(slot)) {
          Action a;
          a.speaker = Speaker::user;
          a.act = acts::inform;
          std::string value = rng.pick(profile.valid_values(slot, ""));
          std::string extra_value = occ->extra_valid
              ? rng.pick(profile.valid_values(occ->extra_slot, ""))
              : rng.pick(profile.distractors.at(occ->extra_slot));
          a.bindings = {{slot, value}, {occ->extra_slot, extra_value}};
          audits.erase(std::remove_if(audits.begin(), audits.end(),
                                      [&](const auto& o) { return o.slot == slot; }),
                       audits.end());
          return a;
        }
      }
      if (!another_pending.empty() && another_pending.front().first == slot) {
        Action a;
        a.speaker = Speaker::user;
        a.act = acts::inform;
        std::string other = another_pending.front().second;
        a.bindings = {{other, rng.pick(profile.valid_values(other, ""))}};
        another_pending.erase(another_pending.begin());
        return a;
      }
      if (force_invalid_pending.count(slot) > 0) {
        force_invalid_pending.erase(slot);
        Action a;
        a.speaker = Speaker::user;
        a.act = acts::inform;
        a.bindings = {{slot, rng.pick(profile.distractors.at(slot))}};
        return a;
      }
      return user_step(st, incoming, profile, policy, rng);
    }

    if (incoming.act == acts::fail_confirm) {
      std::string slot = incoming.bindings[0].second;
      if (compression_pending.count(slot) > 0) {
        compression_pending.erase(slot);
        Action a;
        a.speaker = Speaker::user;
        a.act = acts::confirm_inform;
        a.bindings = {{"confirm", "yes"},
                      {slot, rng.pick(profile.valid_values(slot, ""))}};
        return a;
      }
      if (audit_for(slot) != nullptr) {
        change_turn_slot = slot;
        Action a;
        a.speaker = Speaker::user;
        a.act = acts::confirm;
        a.bindings = {{"confirm", "yes"}};
        return a;
      }
      return user_step(st, incoming, profile, policy, rng);
    }

    return user_step(st, incoming, profile, policy, rng);
  }
};

}  // namespace

Dialogue run_episode(const IntentSchema& schema, const UserProfile& profile,
                     const PolicyConfig& policy, uint64_t seed, const ChallengeScript& script) {
  if (!policy.valid()) throw GenerationError("invalid policy configuration");
  for (const auto& spec : schema.canonical_slots()) {
    if (profile.valid_values(spec.name).empty()) {
      throw GenerationError("profile cannot supply values for slot " + spec.name + " of intent " +
                            schema.name);
    }
  }

  PolicyConfig effective = policy;
  if (script.kind != ChallengeKind::none) {
    // scripted failures only: keep the phenomenon the single deviation
    effective.invalid_prob = 0.0;
    effective.change_yes_prob = 1.0;
    effective.recall_fail_prob = 0.0;
  }

  RngStream rng(seed);
  Dialogue d;
  d.intent = schema.name;
  d.seed = seed;
  d.tags.challenge = script.kind;
  d.tags.multiple = script.multiple;

  BotState st;
  st.intent = schema.name;
  st.preset_order = script.request_order;

  auto push = [&](const Action& a) { d.turns.push_back(Turn{a.speaker, "", a}); };

  Action greeting;
  greeting.speaker = Speaker::system;
  greeting.act = acts::request_intent;
  push(greeting);

  ScriptDriver driver(script, schema);
  Action last_system = greeting;

  for (int guard = 0; guard < 200; ++guard) {
    if (st.phase == BotState::Phase::closed) return d;

    Action user_action = driver.act(st, last_system, profile, effective, rng);
    push(user_action);

    Action incoming = user_action;
    while (true) {
      StepResult r = system_step(st, incoming, profile, effective);
      st = r.state;
      bool got_call = false;
      for (const auto& a : r.actions) {
        push(a);
        if (a.act == acts::api_call) {
          Action resp = simulate_api(a, profile, effective, rng, st.filled);
          push(resp);
          incoming = resp;
          got_call = true;
        } else if (a.speaker == Speaker::system) {
          last_system = a;
        }
      }
      if (!got_call) break;
      if (st.phase == BotState::Phase::closed) break;
    }
  }
  throw GenerationError("episode did not terminate (intent " + schema.name + ", seed " +
                        std::to_string(seed) + ")");
}

}  // namespace bankdial
