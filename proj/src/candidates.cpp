#include "bankdial/candidates.hpp"

#include <stdexcept>

#include "bankdial/normalize.hpp"
#include "bankdial/surface.hpp"

namespace bankdial {

int CandidateSet::add(const std::string& canonical) {
  auto it = index_.find(canonical);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(items_.size());
  items_.push_back(canonical);
  index_.emplace(canonical, id);
  return id;
}

std::optional<int> CandidateSet::id_of(const std::string& canonical) const {
  auto it = index_.find(canonical);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool is_candidate_turn(const Turn& t) {
  if (t.speaker == Speaker::user) return false;
  if (t.action.act == acts::api_response) return false;
  return true;
}

std::string candidate_string(const Turn& t) {
  if (!is_candidate_turn(t)) throw std::invalid_argument("turn is not a candidate source");
  return normalize_text(canonical_action_string(t.action));
}

CandidateSet extract_candidates(const std::vector<Dialogue>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("extract_candidates: empty corpus");
  CandidateSet set;
  for (const auto& d : corpus) {
    for (const auto& t : d.turns) {
      if (is_candidate_turn(t)) set.add(candidate_string(t));
    }
  }
  return set;
}

}  // namespace bankdial
