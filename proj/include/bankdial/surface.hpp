#pragma once

#include <string>

#include "bankdial/action.hpp"

namespace bankdial {

// System-side utterances use one fixed canonical surface per act; only the
// user side varies across templates. Placeholders ({options}, {available},
// {value}) are filled from the action's bindings.
std::string system_surface(const Action& a);

// "API PARTNER CHECK Megan", "response: check_account, result: failed, ..."
// Defined for api_call / api_response actions.
std::string api_string(const Action& a);

// Uppercase phrase for a validation/final api, e.g. check_partner -> "PARTNER CHECK".
std::string api_phrase(const std::string& api);

// The string every system-side turn contributes to candidate ranking
// (normalized). api_response turns have no canonical candidate; callers must
// not pass them.
std::string canonical_action_string(const Action& a);

}  // namespace bankdial
