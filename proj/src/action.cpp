#include "bankdial/action.hpp"

#include <stdexcept>

#include "json.hpp"

namespace bankdial {

using nlohmann::json;

std::string to_string(Speaker s) {
  switch (s) {
    case Speaker::user: return "user";
    case Speaker::system: return "system";
    case Speaker::api: return "api";
  }
  throw std::logic_error("bad speaker");
}

Speaker speaker_from_string(const std::string& s) {
  if (s == "user") return Speaker::user;
  if (s == "system") return Speaker::system;
  if (s == "api") return Speaker::api;
  throw std::invalid_argument("unknown speaker: " + s);
}

std::string to_string(ChallengeKind k) {
  switch (k) {
    case ChallengeKind::none: return "none";
    case ChallengeKind::turn_compression: return "turn_compression";
    case ChallengeKind::new_api: return "new_api";
    case ChallengeKind::reordering: return "reordering";
    case ChallengeKind::another_slot: return "another_slot";
    case ChallengeKind::audit_more: return "audit_more";
  }
  throw std::logic_error("bad challenge kind");
}

ChallengeKind challenge_kind_from_string(const std::string& s) {
  for (ChallengeKind k : {ChallengeKind::none, ChallengeKind::turn_compression, ChallengeKind::new_api,
                          ChallengeKind::reordering, ChallengeKind::another_slot, ChallengeKind::audit_more}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown challenge kind: " + s);
}

const std::vector<ChallengeKind>& all_challenge_kinds() {
  static const std::vector<ChallengeKind> kinds = {
      ChallengeKind::turn_compression, ChallengeKind::new_api, ChallengeKind::reordering,
      ChallengeKind::another_slot, ChallengeKind::audit_more};
  return kinds;
}

std::string to_string(TemplateCondition c) {
  switch (c) {
    case TemplateCondition::unrendered: return "unrendered";
    case TemplateCondition::IT: return "IT";
    case TemplateCondition::OOT: return "OOT";
  }
  throw std::logic_error("bad template condition");
}

TemplateCondition template_condition_from_string(const std::string& s) {
  if (s == "unrendered") return TemplateCondition::unrendered;
  if (s == "IT") return TemplateCondition::IT;
  if (s == "OOT") return TemplateCondition::OOT;
  throw std::invalid_argument("unknown template condition: " + s);
}

namespace {

json action_to_json(const Action& a) {
  json j;
  j["speaker"] = to_string(a.speaker);
  j["act"] = a.act;
  if (!a.intent.empty()) j["intent"] = a.intent;
  if (!a.bindings.empty()) {
    json b = json::array();
    for (const auto& [slot, value] : a.bindings) b.push_back({slot, value});
    j["bindings"] = std::move(b);
  }
  if (!a.api.empty()) j["api"] = a.api;
  if (a.success.has_value()) j["result"] = *a.success ? "success" : "failed";
  if (!a.message.empty()) j["message"] = a.message;
  if (!a.failed_slot.empty()) j["failed_slot"] = a.failed_slot;
  if (!a.failed_value.empty()) j["failed_value"] = a.failed_value;
  return j;
}

Action action_from_json(const json& j) {
  Action a;
  a.speaker = speaker_from_string(j.at("speaker").get<std::string>());
  a.act = j.at("act").get<std::string>();
  a.intent = j.value("intent", "");
  if (j.contains("bindings")) {
    for (const auto& b : j.at("bindings")) {
      a.bindings.emplace_back(b.at(0).get<std::string>(), b.at(1).get<std::string>());
    }
  }
  a.api = j.value("api", "");
  if (j.contains("result")) a.success = j.at("result").get<std::string>() == "success";
  a.message = j.value("message", "");
  a.failed_slot = j.value("failed_slot", "");
  a.failed_value = j.value("failed_value", "");
  return a;
}

}  // namespace

std::string serialize_dialogue(const Dialogue& d) {
  json j;
  j["format_version"] = 1;
  j["id"] = d.id;
  j["intent"] = d.intent;
  j["seed"] = d.seed;
  j["tags"] = {{"challenge", to_string(d.tags.challenge)},
               {"multiple", d.tags.multiple},
               {"condition", to_string(d.tags.condition)}};
  json turns = json::array();
  for (const auto& t : d.turns) {
    turns.push_back({{"speaker", to_string(t.speaker)}, {"text", t.text}, {"action", action_to_json(t.action)}});
  }
  j["turns"] = std::move(turns);
  return j.dump();
}

Dialogue parse_dialogue(const std::string& line) {
  json j = json::parse(line);
  int version = j.value("format_version", 0);
  if (version != 1) {
    throw std::invalid_argument("unsupported corpus format_version: " + std::to_string(version));
  }
  Dialogue d;
  d.id = j.at("id").get<std::string>();
  d.intent = j.at("intent").get<std::string>();
  d.seed = j.at("seed").get<uint64_t>();
  const auto& tags = j.at("tags");
  d.tags.challenge = challenge_kind_from_string(tags.at("challenge").get<std::string>());
  d.tags.multiple = tags.at("multiple").get<bool>();
  d.tags.condition = template_condition_from_string(tags.at("condition").get<std::string>());
  for (const auto& tj : j.at("turns")) {
    Turn t;
    t.speaker = speaker_from_string(tj.at("speaker").get<std::string>());
    t.text = tj.at("text").get<std::string>();
    t.action = action_from_json(tj.at("action"));
    d.turns.push_back(std::move(t));
  }
  return d;
}

std::vector<Action> action_sequence(const Dialogue& d) {
  std::vector<Action> out;
  out.reserve(d.turns.size());
  for (const auto& t : d.turns) out.push_back(t.action);
  return out;
}

}  // namespace bankdial
