#include "bankdial/surface.hpp"

#include <cctype>
#include <stdexcept>

#include "bankdial/normalize.hpp"
#include "bankdial/schema.hpp"

namespace bankdial {

namespace {

std::string binding_value(const Action& a, const std::string& slot) {
  for (const auto& [s, v] : a.bindings)
    if (s == slot) return v;
  return "";
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string request_slot_surface(const std::string& slot) {
  if (slot == "user_account") return "From which account?";
  if (slot == "partner_name") return "Who is the recipient?";
  if (slot == "amount") return "What is the transfer amount?";
  if (slot == "transaction_id") return "What is the id of the transaction?";
  if (slot == "note") return "What is the note of the transaction you are looking for?";
  if (slot == "card_id") return "Please enter the card id.";
  if (slot == "card_type")
    return "You have the following cards that belong to your account: {options}. "
           "Which card would you like to block?";
  throw std::invalid_argument("no request surface for slot: " + slot);
}

std::string fail_confirm_surface(const std::string& slot) {
  if (slot == "user_account")
    return "I couldn't find the account you are looking for. Your available accounts are "
           "{available}. Would you like to change your answer?";
  if (slot == "partner_name")
    return "There is no saved recipient with the name you provided, would you like to change "
           "the partner name?";
  if (slot == "amount")
    return "This amount is not allowed for your account, would you like to change it?";
  if (slot == "transaction_id")
    return "I couldn't find a transaction with that id, would you like to change it?";
  if (slot == "note")
    return "No transaction matches that note, would you like to change it?";
  if (slot == "card_id")
    return "I couldn't find a card with that id, would you like to change it?";
  if (slot == "card_type")
    return "You don't have such a card. Your cards are {available}. Would you like to change "
           "your answer?";
  throw std::invalid_argument("no fail surface for slot: " + slot);
}

std::string final_confirm_surface(const std::string& intent) {
  if (intent == "transfer") return "Do you confirm this transfer?";
  if (intent == "cancel_transfer") return "Do you confirm cancelling this transaction?";
  if (intent == "block_card") return "Do you confirm blocking your card?";
  throw std::invalid_argument("no final confirm surface for intent: " + intent);
}

std::string closing_surface(const std::string& intent, const std::string& outcome) {
  if (outcome == "terminated")
    return "I am sorry, I could not verify your information. Goodbye.";
  bool ok = outcome == "success";
  if (intent == "transfer")
    return ok ? "The transfer has been completed successfully."
              : "Unfortunately the transfer could not be completed.";
  if (intent == "cancel_transfer")
    return ok ? "The transaction has been cancelled."
              : "Unfortunately the transaction could not be cancelled.";
  if (intent == "block_card")
    return ok ? "Your card has been successfully blocked."
              : "Unfortunately your card could not be blocked.";
  if (intent == "transaction_history")
    return ok ? "I found the following transaction: {value}."
              : "I could not find any matching transaction.";
  if (intent == "balance")
    return ok ? "The balance of your account is {value}."
              : "I could not retrieve your balance at the moment.";
  if (intent == "limit")
    return ok ? "The maximum transferable amount from your account is {value}."
              : "I could not retrieve your limits at the moment.";
  throw std::invalid_argument("no closing surface for intent: " + intent);
}

}  // namespace

std::string api_phrase(const std::string& api) {
  if (api == "check_account") return "ACCOUNT CHECK";
  if (api == "check_partner") return "PARTNER CHECK";
  if (api == "check_amount") return "AMOUNT CHECK";
  if (api == "check_transaction_id") return "TRANSACTION CHECK";
  if (api == "check_note") return "NOTE CHECK";
  if (api == "check_card_id") return "CARD CHECK";
  if (api == "check_card_name") return "CARD NAME CHECK";
  if (api == "execute_transfer") return "TRANSFER EXECUTE";
  if (api == "cancel_transfer") return "CANCEL TRANSFER";
  if (api == "block_card") return "BLOCK CARD";
  if (api == "search_transactions") return "TRANSACTION SEARCH";
  if (api == "get_balance") return "BALANCE GET";
  if (api == "get_limit") return "LIMIT GET";
  throw std::invalid_argument("unknown api: " + api);
}

std::string system_surface(const Action& a) {
  if (a.speaker != Speaker::system) throw std::invalid_argument("system_surface needs a system action");
  std::string s;
  if (a.act == acts::request_intent) {
    s = "How can i help you today?";
  } else if (a.act == acts::request_slot) {
    s = request_slot_surface(binding_value(a, "slot"));
  } else if (a.act == acts::fail_confirm) {
    s = fail_confirm_surface(binding_value(a, "slot"));
  } else if (a.act == acts::request_final_confirm) {
    s = final_confirm_surface(a.intent);
  } else if (a.act == acts::end_call) {
    s = closing_surface(a.intent, binding_value(a, "outcome"));
  } else {
    throw std::invalid_argument("no surface for system act: " + a.act);
  }
  s = replace_all(s, "{options}", binding_value(a, "options"));
  s = replace_all(s, "{available}", binding_value(a, "available"));
  s = replace_all(s, "{value}", binding_value(a, "value"));
  return s;
}

std::string api_string(const Action& a) {
  if (a.speaker != Speaker::api) throw std::invalid_argument("api_string needs an api action");
  if (a.act == acts::api_call) {
    std::string out = "API ";
    if (a.api == "intent_check") {
      // opening check strings print their values uppercased ("API CHECK
      // SALARY FACEBOOK"); per-slot checks keep the user's casing
      out += schema_for(a.intent).opening_check_phrase;
      for (const auto& [_, v] : a.bindings) {
        out += " ";
        for (char c : v) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
    } else if (a.api == "multi_check") {
      bool first = true;
      for (const auto& [slot, v] : a.bindings) {
        const SlotSpec* spec = schema_for(a.intent).find_slot(slot);
        if (spec == nullptr) throw std::invalid_argument("multi_check on unknown slot: " + slot);
        if (!first) out += ", ";
        out += api_phrase(spec->validation_api) + " " + v;
        first = false;
      }
    } else {
      out += api_phrase(a.api);
      for (const auto& [_, v] : a.bindings) out += " " + v;
    }
    return out;
  }
  if (a.act == acts::api_response) {
    std::string out = "response: " + a.api + ", result: ";
    out += (a.success.has_value() && *a.success) ? "success" : "failed";
    if (!a.message.empty()) out += ", message: " + a.message;
    return out;
  }
  throw std::invalid_argument("api_string: unsupported act " + a.act);
}

std::string canonical_action_string(const Action& a) {
  if (a.speaker == Speaker::user) throw std::invalid_argument("user actions have no canonical string");
  if (a.act == acts::api_response) throw std::invalid_argument("api_response is not a candidate");
  if (a.act == acts::call_memory_network) return "call-memory-network " + a.intent;
  // case is preserved here; candidate extraction applies the corpus-wide
  // lowercasing normalization on top
  return a.speaker == Speaker::api ? api_string(a) : system_surface(a);
}

}  // namespace bankdial
