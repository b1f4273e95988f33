#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bankdial {

enum class Speaker { user, system, api };

std::string to_string(Speaker s);
Speaker speaker_from_string(const std::string& s);

// Act identifiers used across the engine. Kept as plain strings in Action so
// corpora stay self-describing; these constants are the closed vocabulary.
namespace acts {
// system
inline constexpr const char* request_intent = "request_intent";
inline constexpr const char* request_slot = "request_slot";
inline constexpr const char* fail_confirm = "fail_confirm";          // failure explanation + change question
inline constexpr const char* request_final_confirm = "request_final_confirm";
inline constexpr const char* end_call = "end_call";                  // closing or termination utterance
// user
inline constexpr const char* inform_intent = "inform_intent";
inline constexpr const char* inform = "inform";                      // 1..n slot values
inline constexpr const char* confirm = "confirm";                    // yes / no
inline constexpr const char* confirm_inform = "confirm_inform";      // "yes, change it to X"
inline constexpr const char* cannot_recall = "cannot_recall";
// api
inline constexpr const char* api_call = "api_call";
inline constexpr const char* api_response = "api_response";
// router pseudo-action (MMN training data)
inline constexpr const char* call_memory_network = "call_memory_network";
}  // namespace acts

using Binding = std::pair<std::string, std::string>;  // (slot, value)

// One pseudo-language move. Dialogues are sequences of these before any
// natural language enters the picture.
struct Action {
  Speaker speaker = Speaker::user;
  std::string act;
  std::string intent;             // set on inform_intent / call_memory_network
  std::vector<Binding> bindings;  // slot values in schema order
  std::string api;                // api name for api_call / api_response
  std::optional<bool> success;    // api_response result
  std::string message;            // api_response payload text
  std::string failed_slot;        // failed validations: which slot was rejected
  std::string failed_value;       // and the rejected value

  bool operator==(const Action&) const = default;
};

struct Turn {
  Speaker speaker = Speaker::user;
  std::string text;  // nonempty iff speaker is user or system
  Action action;

  bool operator==(const Turn&) const = default;
};

enum class ChallengeKind { none, turn_compression, new_api, reordering, another_slot, audit_more };

std::string to_string(ChallengeKind k);
ChallengeKind challenge_kind_from_string(const std::string& s);

// All five concrete kinds, in reporting order.
const std::vector<ChallengeKind>& all_challenge_kinds();

enum class TemplateCondition { unrendered, IT, OOT };

std::string to_string(TemplateCondition c);
TemplateCondition template_condition_from_string(const std::string& s);

struct DialogueTags {
  ChallengeKind challenge = ChallengeKind::none;
  bool multiple = false;  // multiple occurrences of the same OOP
  TemplateCondition condition = TemplateCondition::unrendered;

  bool operator==(const DialogueTags&) const = default;
};

struct Dialogue {
  std::string id;
  std::string intent;
  uint64_t seed = 0;
  DialogueTags tags;
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

// Line-delimited corpus record (format_version 1). parse(serialize(d)) == d.
std::string serialize_dialogue(const Dialogue& d);
Dialogue parse_dialogue(const std::string& line);

// The bare action sequence, independent of any rendering.
std::vector<Action> action_sequence(const Dialogue& d);

}  // namespace bankdial
