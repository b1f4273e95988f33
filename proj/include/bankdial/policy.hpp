#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bankdial/action.hpp"
#include "bankdial/schema.hpp"

namespace bankdial {

enum class ViolationCode {
  MissingOpening,
  AlternationViolation,
  SlotOrderViolation,
  UnvalidatedValue,
  MaxInvalidExceeded,
  MissingFinalApi,
  MissingClosing,
};

std::string to_string(ViolationCode c);

struct Violation {
  ViolationCode code;
  std::string detail;
};

// Malformed input (a turn without an action) is structural, not a policy
// matter, and throws instead of returning a violation.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Empty result iff the dialogue satisfies the generation policy: strict slot
// order, every user value validated by an api call, at most
// max_consecutive_invalid failures before termination, and a final api call
// unless terminated early.
std::vector<Violation> validate_policy(const Dialogue& d, const PolicyConfig& p);

}  // namespace bankdial
