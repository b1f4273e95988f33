#include <doctest.h>

#include "bankdial/normalize.hpp"
#include "bankdial/surface.hpp"

using namespace bankdial;

namespace {

Action call(const std::string& api, const std::string& intent, std::vector<Binding> bindings) {
  Action a;
  a.speaker = Speaker::api;
  a.act = acts::api_call;
  a.api = api;
  a.intent = intent;
  a.bindings = std::move(bindings);
  return a;
}

}  // namespace

TEST_CASE("slot validation calls print the act phrase and the raw value") {
  CHECK(canonical_action_string(call("check_partner", "transfer", {{"partner_name", "Megan"}})) ==
        "API PARTNER CHECK Megan");
  CHECK(canonical_action_string(call("check_amount", "transfer", {{"amount", "10k euros"}})) ==
        "API AMOUNT CHECK 10k euros");
  CHECK(canonical_action_string(call("check_account", "balance", {{"user_account", "savings"}})) ==
        "API ACCOUNT CHECK savings");
}

TEST_CASE("opening check calls uppercase their values") {
  CHECK(canonical_action_string(call("intent_check", "transaction_history",
                                     {{"note", "salary"}, {"partner_name", "Facebook"}})) ==
        "API CHECK SALARY FACEBOOK");
  CHECK(canonical_action_string(
            call("intent_check", "transfer", {{"user_account", "joint"}, {"amount", "50 euros"}})) ==
        "API TRANSFER CHECK JOINT 50 EUROS");
}

TEST_CASE("combined validation of several slots is one candidate string") {
  CHECK(canonical_action_string(call("multi_check", "transfer",
                                     {{"partner_name", "Michael"}, {"amount", "5k euros"}})) ==
        "API PARTNER CHECK Michael, AMOUNT CHECK 5k euros");
}

TEST_CASE("identical actions map to identical strings") {
  Action a = call("check_partner", "transfer", {{"partner_name", "Megan"}});
  CHECK(canonical_action_string(a) == canonical_action_string(a));
}

TEST_CASE("user actions and api responses have no canonical string") {
  Action u;
  u.speaker = Speaker::user;
  u.act = acts::inform;
  CHECK_THROWS(canonical_action_string(u));

  Action r;
  r.speaker = Speaker::api;
  r.act = acts::api_response;
  r.api = "check_account";
  CHECK_THROWS(canonical_action_string(r));
  CHECK(api_string(r).rfind("response:", 0) == 0);
}

TEST_CASE("system surfaces are fixed per act") {
  Action greet;
  greet.speaker = Speaker::system;
  greet.act = acts::request_intent;
  CHECK(system_surface(greet) == "How can i help you today?");

  Action req;
  req.speaker = Speaker::system;
  req.act = acts::request_slot;
  req.intent = "transfer";
  req.bindings = {{"slot", "user_account"}};
  CHECK(system_surface(req) == "From which account?");
}

TEST_CASE("router pseudo-actions canonicalize to lowercase strings") {
  Action a;
  a.speaker = Speaker::system;
  a.act = acts::call_memory_network;
  a.intent = "transfer";
  std::string s = canonical_action_string(a);
  CHECK(s == "call-memory-network transfer");
  CHECK(normalize_text(s) == s);
}
