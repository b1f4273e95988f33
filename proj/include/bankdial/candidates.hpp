#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bankdial/action.hpp"

namespace bankdial {

// Deduplicated canonical system-side strings (system utterances and api_call
// strings) with stable ids assigned by first occurrence.
class CandidateSet {
 public:
  int add(const std::string& canonical);  // returns existing id on duplicate
  std::optional<int> id_of(const std::string& canonical) const;
  const std::string& at(int id) const { return items_.at(static_cast<size_t>(id)); }
  size_t size() const { return items_.size(); }
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> index_;
};

// True for turns that are prediction targets / candidate sources:
// system utterances and api calls, never api responses or user turns.
bool is_candidate_turn(const Turn& t);

// Canonical candidate string for a system-side turn.
std::string candidate_string(const Turn& t);

CandidateSet extract_candidates(const std::vector<Dialogue>& corpus);

}  // namespace bankdial
