#include "bankdial/policy.hpp"

#include <algorithm>

namespace bankdial {

std::string to_string(ViolationCode c) {
  switch (c) {
    case ViolationCode::MissingOpening: return "MissingOpening";
    case ViolationCode::AlternationViolation: return "AlternationViolation";
    case ViolationCode::SlotOrderViolation: return "SlotOrderViolation";
    case ViolationCode::UnvalidatedValue: return "UnvalidatedValue";
    case ViolationCode::MaxInvalidExceeded: return "MaxInvalidExceeded";
    case ViolationCode::MissingFinalApi: return "MissingFinalApi";
    case ViolationCode::MissingClosing: return "MissingClosing";
  }
  return "?";
}

namespace {

bool is_validation_api(const std::string& api) {
  return api == "intent_check" || api == "multi_check" || api.rfind("check_", 0) == 0;
}

std::string binding_value(const Action& a, const std::string& slot) {
  for (const auto& [s, v] : a.bindings)
    if (s == slot) return v;
  return "";
}

}  // namespace

std::vector<Violation> validate_policy(const Dialogue& d, const PolicyConfig& p) {
  std::vector<Violation> out;

  for (const auto& t : d.turns) {
    if (t.action.act.empty()) throw StructuralError("turn without action in dialogue " + d.id);
    if (t.action.speaker != t.speaker)
      throw StructuralError("turn/action speaker mismatch in dialogue " + d.id);
  }

  if (d.turns.empty() || d.turns.front().speaker != Speaker::system ||
      d.turns.front().action.act != acts::request_intent) {
    out.push_back({ViolationCode::MissingOpening, "dialogue does not open with the system greeting"});
    return out;
  }

  for (size_t i = 1; i < d.turns.size(); ++i) {
    if (d.turns[i].speaker == Speaker::user && d.turns[i - 1].speaker == Speaker::user) {
      out.push_back({ViolationCode::AlternationViolation,
                     "consecutive user turns at index " + std::to_string(i)});
    }
  }

  const IntentSchema& schema = schema_for(d.intent);

  // strict slot order: first-time requests must follow the canonical sequence
  std::vector<std::string> first_requests;
  for (const auto& t : d.turns) {
    if (t.action.act != acts::request_slot) continue;
    std::string slot = binding_value(t.action, "slot");
    if (std::find(first_requests.begin(), first_requests.end(), slot) == first_requests.end())
      first_requests.push_back(slot);
  }
  std::vector<std::string> canonical;
  for (const auto& s : schema.canonical_slots()) canonical.push_back(s.name);
  size_t ci = 0;
  bool ordered = true;
  for (const auto& slot : first_requests) {
    while (ci < canonical.size() && canonical[ci] != slot) ++ci;
    if (ci == canonical.size()) {
      ordered = false;
      break;
    }
    ++ci;
  }
  if (!ordered) {
    out.push_back({ViolationCode::SlotOrderViolation,
                   "slot requests deviate from the canonical order"});
  }

  // every user-supplied value is covered by an api call before the next user turn
  for (size_t i = 0; i < d.turns.size(); ++i) {
    const Action& a = d.turns[i].action;
    if (d.turns[i].speaker != Speaker::user) continue;
    if (a.act != acts::inform && a.act != acts::confirm_inform && a.act != acts::inform_intent)
      continue;
    for (const auto& [slot, value] : a.bindings) {
      if (slot == "confirm") continue;
      bool covered = false;
      for (size_t j = i + 1; j < d.turns.size() && d.turns[j].speaker != Speaker::user; ++j) {
        const Action& b = d.turns[j].action;
        if (b.act == acts::api_call && binding_value(b, slot) == value) covered = true;
      }
      if (!covered) {
        out.push_back({ViolationCode::UnvalidatedValue,
                       "value for slot " + slot + " at turn " + std::to_string(i) +
                           " was never validated"});
      }
    }
  }

  // consecutive invalid answers and mandatory termination
  int consecutive = 0;
  for (size_t i = 0; i < d.turns.size(); ++i) {
    const Action& a = d.turns[i].action;
    if (a.act == acts::api_response && is_validation_api(a.api)) {
      if (a.success.value_or(false)) {
        consecutive = 0;
      } else if (++consecutive >= p.max_consecutive_invalid) {
        // the very next system move must terminate the dialogue
        bool terminated = false;
        for (size_t j = i + 1; j < d.turns.size(); ++j) {
          if (d.turns[j].speaker != Speaker::system) continue;
          terminated = d.turns[j].action.act == acts::end_call &&
                       binding_value(d.turns[j].action, "outcome") == "terminated";
          break;
        }
        if (!terminated || consecutive > p.max_consecutive_invalid) {
          out.push_back({ViolationCode::MaxInvalidExceeded,
                         "dialogue continued after " + std::to_string(consecutive) +
                             " consecutive invalid answers"});
        }
      }
    }
  }

  const Turn& last = d.turns.back();
  if (last.action.act != acts::end_call) {
    out.push_back({ViolationCode::MissingClosing, "dialogue does not end with end_call"});
  } else if (binding_value(last.action, "outcome") != "terminated") {
    bool final_called = false;
    for (const auto& t : d.turns) {
      if (t.action.act == acts::api_call && t.action.api == schema.final_api) final_called = true;
    }
    if (!final_called) {
      out.push_back({ViolationCode::MissingFinalApi,
                     "completed dialogue without a " + schema.final_api + " call"});
    }
  }

  return out;
}

}  // namespace bankdial
