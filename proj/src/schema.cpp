#include "bankdial/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace bankdial {

std::vector<SlotSpec> IntentSchema::canonical_slots() const {
  std::vector<SlotSpec> out = primary_slots;
  out.insert(out.end(), fallback_slots.begin(), fallback_slots.end());
  return out;
}

const SlotSpec* IntentSchema::find_slot(const std::string& slot_name) const {
  for (const auto& s : primary_slots)
    if (s.name == slot_name) return &s;
  for (const auto& s : fallback_slots)
    if (s.name == slot_name) return &s;
  return nullptr;
}

namespace {

SlotSpec slot_user_account() { return {"user_account", "check_account", "accounts"}; }
SlotSpec slot_partner() { return {"partner_name", "check_partner", "partners"}; }
SlotSpec slot_amount() { return {"amount", "check_amount", "amounts"}; }
SlotSpec slot_transaction_id() { return {"transaction_id", "check_transaction_id", "transactions"}; }
SlotSpec slot_note() { return {"note", "check_note", "transactions"}; }
SlotSpec slot_card_id() { return {"card_id", "check_card_id", "cards"}; }
SlotSpec slot_card_type() { return {"card_type", "check_card_name", "cards"}; }

std::vector<IntentSchema> make_schemas() {
  std::vector<IntentSchema> v;

  IntentSchema transfer;
  transfer.name = "transfer";
  transfer.primary_slots = {slot_user_account(), slot_partner(), slot_amount()};
  transfer.opening_slots = {"user_account", "partner_name", "amount"};
  transfer.opening_check_phrase = "TRANSFER CHECK";
  transfer.final_api = "execute_transfer";
  transfer.needs_final_confirm = true;
  v.push_back(transfer);

  IntentSchema cancel;
  cancel.name = "cancel_transfer";
  cancel.primary_slots = {slot_transaction_id()};
  cancel.fallback_slots = {slot_partner()};
  cancel.recall_optional_slot = "transaction_id";
  cancel.opening_slots = {"transaction_id"};
  cancel.opening_check_phrase = "CANCEL CHECK";
  cancel.final_api = "cancel_transfer";
  cancel.needs_final_confirm = true;
  v.push_back(cancel);

  IntentSchema block;
  block.name = "block_card";
  block.primary_slots = {slot_card_id()};
  block.fallback_slots = {slot_user_account(), slot_card_type()};
  block.recall_optional_slot = "card_id";
  block.opening_slots = {"card_id"};
  block.opening_check_phrase = "CARD CHECK";
  block.final_api = "block_card";
  block.needs_final_confirm = true;
  v.push_back(block);

  IntentSchema history;
  history.name = "transaction_history";
  history.primary_slots = {slot_note()};
  history.opening_slots = {"note", "partner_name"};
  history.opening_check_phrase = "CHECK";
  history.final_api = "search_transactions";
  v.push_back(history);

  IntentSchema balance;
  balance.name = "balance";
  balance.primary_slots = {slot_user_account()};
  balance.opening_slots = {"user_account"};
  balance.opening_check_phrase = "BALANCE CHECK";
  balance.final_api = "get_balance";
  v.push_back(balance);

  IntentSchema limit;
  limit.name = "limit";
  limit.primary_slots = {slot_user_account()};
  limit.opening_slots = {"user_account"};
  limit.opening_check_phrase = "LIMIT CHECK";
  limit.final_api = "get_limit";
  v.push_back(limit);

  return v;
}

}  // namespace

const std::vector<IntentSchema>& builtin_schemas() {
  static const std::vector<IntentSchema> schemas = make_schemas();
  return schemas;
}

const IntentSchema& schema_for(const std::string& intent) {
  for (const auto& s : builtin_schemas())
    if (s.name == intent) return s;
  throw std::invalid_argument("unknown intent: " + intent);
}

const std::vector<std::string>& intent_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : builtin_schemas()) n.push_back(s.name);
    return n;
  }();
  return names;
}

ProfilePools ProfilePools::defaults() {
  ProfilePools p;
  p.accounts = {"savings", "joint", "family", "premium"};
  p.partners = {"Michael", "Megan", "John", "Sara", "Facebook", "David",
                "Laura",   "Peter", "Anna", "Tom",  "Alice",    "Robert"};
  p.amounts = {"50 euros",  "100 euros", "250 euros", "500 euros", "750 euros",
               "1k euros",  "2k euros",  "3k euros",  "5k euros",  "10k euros"};
  p.notes = {"salary",        "rent",     "electricity bill", "groceries",
             "gym membership", "internet bill", "insurance",  "car payment"};
  p.card_types = {"prepaid card", "credit card", "debit card", "virtual card"};
  for (int i = 0; i < 30; ++i) p.transaction_ids.push_back("tx-" + std::to_string(101 + i * 7));
  return p;
}

ProfilePools ProfilePools::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile pools file: " + path);
  nlohmann::json j;
  in >> j;
  ProfilePools p;
  p.accounts = j.at("accounts").get<std::vector<std::string>>();
  p.partners = j.at("partners").get<std::vector<std::string>>();
  p.amounts = j.at("amounts").get<std::vector<std::string>>();
  p.notes = j.at("notes").get<std::vector<std::string>>();
  p.card_types = j.at("card_types").get<std::vector<std::string>>();
  p.transaction_ids = j.at("transaction_ids").get<std::vector<std::string>>();
  for (const auto* pool : {&p.accounts, &p.partners, &p.amounts, &p.notes, &p.card_types, &p.transaction_ids}) {
    if (pool->size() < 3) throw std::runtime_error("profile pool too small in " + path);
  }
  return p;
}

std::vector<std::string> UserProfile::card_ids() const {
  std::vector<std::string> out;
  for (const auto& [account, types] : cards) {
    for (const auto& t : types) {
      std::string first = t.substr(0, t.find(' '));
      out.push_back(account + "-" + first);
    }
  }
  return out;
}

std::vector<std::string> UserProfile::valid_values(const std::string& slot,
                                                   const std::string& filled_account) const {
  if (slot == "user_account") return accounts;
  if (slot == "partner_name") return partners;
  if (slot == "amount") return amounts;
  if (slot == "transaction_id") {
    std::vector<std::string> out;
    for (const auto& t : transactions) out.push_back(t.id);
    return out;
  }
  if (slot == "note") {
    std::vector<std::string> out;
    for (const auto& t : transactions) out.push_back(t.note);
    return out;
  }
  if (slot == "card_id") return card_ids();
  if (slot == "card_type") {
    if (!filled_account.empty()) {
      auto it = cards.find(filled_account);
      return it == cards.end() ? std::vector<std::string>{} : it->second;
    }
    std::vector<std::string> out;
    for (const auto& [_, types] : cards) out.insert(out.end(), types.begin(), types.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  throw std::invalid_argument("unknown slot: " + slot);
}

bool UserProfile::is_valid(const std::string& slot, const std::string& value,
                           const std::string& filled_account) const {
  auto vals = valid_values(slot, filled_account);
  return std::find(vals.begin(), vals.end(), value) != vals.end();
}

namespace {

// Deterministically pick k distinct elements; the rest become distractors.
std::pair<std::vector<std::string>, std::vector<std::string>> pick_split(
    std::vector<std::string> pool, size_t k, RngStream& rng) {
  rng.shuffle(pool);
  k = std::min(k, pool.size());
  std::vector<std::string> chosen(pool.begin(), pool.begin() + static_cast<long>(k));
  std::vector<std::string> rest(pool.begin() + static_cast<long>(k), pool.end());
  return {chosen, rest};
}

}  // namespace

UserProfile sample_profile(const ProfilePools& pools, RngStream& rng) {
  UserProfile p;
  auto [accounts, acc_rest] = pick_split(pools.accounts, 2, rng);
  p.accounts = accounts;
  p.distractors["user_account"] = acc_rest;

  auto [partners, partner_rest] = pick_split(pools.partners, 4, rng);
  p.partners = partners;
  p.distractors["partner_name"] = partner_rest;

  auto [amounts, amount_rest] = pick_split(pools.amounts, 6, rng);
  p.amounts = amounts;
  p.distractors["amount"] = amount_rest;

  auto [notes, note_rest] = pick_split(pools.notes, 3, rng);
  p.distractors["note"] = note_rest;

  for (const auto& account : p.accounts) {
    auto [types, type_rest] = pick_split(pools.card_types, 2, rng);
    p.cards[account] = types;
  }
  // distractor card types: anything not on this profile at all, decided only
  // after every account has its cards
  for (const auto& t : pools.card_types) {
    bool held = false;
    for (const auto& [_, held_types] : p.cards)
      held = held || std::find(held_types.begin(), held_types.end(), t) != held_types.end();
    if (!held) p.distractors["card_type"].push_back(t);
  }
  std::sort(p.distractors["card_type"].begin(), p.distractors["card_type"].end());
  p.distractors["card_type"].erase(
      std::unique(p.distractors["card_type"].begin(), p.distractors["card_type"].end()),
      p.distractors["card_type"].end());
  if (p.distractors["card_type"].empty()) p.distractors["card_type"].push_back("gold card");

  auto [txn_ids, txn_rest] = pick_split(pools.transaction_ids, 3, rng);
  p.distractors["transaction_id"] = std::vector<std::string>(txn_rest.begin(), txn_rest.begin() + 5);
  for (size_t i = 0; i < txn_ids.size(); ++i) {
    UserProfile::Transaction t;
    t.id = txn_ids[i];
    t.partner = rng.pick(p.partners);
    t.amount = rng.pick(p.amounts);
    t.note = notes[i % notes.size()];
    p.transactions.push_back(t);
  }

  for (const auto& account : p.accounts) {
    p.balances[account] = rng.pick(pools.amounts);
    p.limits[account] = rng.pick(pools.amounts);
  }

  // card ids not on the profile: swap account/type pairs
  std::vector<std::string> held = p.card_ids();
  for (const auto& account : p.accounts) {
    for (const auto& t : pools.card_types) {
      std::string id = account + "-" + t.substr(0, t.find(' '));
      if (std::find(held.begin(), held.end(), id) == held.end()) {
        p.distractors["card_id"].push_back(id);
      }
    }
  }

  return p;
}

}  // namespace bankdial
