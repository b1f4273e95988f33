#include <doctest.h>

#include <set>

#include "bankdial/normalize.hpp"
#include "bankdial/pipeline.hpp"
#include "bankdial/policy.hpp"
#include "bankdial/selfplay.hpp"
#include "bankdial/templates.hpp"

using namespace bankdial;

namespace {

std::vector<TemplateEntry> make_entries(const std::string& form, int n) {
  std::vector<TemplateEntry> out;
  for (int i = 0; i < n; ++i)
    out.push_back({form, "surface " + std::to_string(i) + " {partner_name}",
                   "author" + std::to_string(i)});
  return out;
}

}  // namespace

TEST_CASE("template lines parse into form, surface and author") {
  auto entries = parse_templates(
      "# comment line\n"
      "inform{partner_name} ||| Send it to {partner_name}. ||| a1\n"
      "\n"
      "confirm=yes{} ||| Yes, please. ||| a2\n");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].logical_form == "inform{partner_name}");
  CHECK(entries[0].surface == "Send it to {partner_name}.");
  CHECK(entries[0].author_id == "a1");
  CHECK(entries[1].logical_form == "confirm=yes{}");
  CHECK(LogicalForm{entries[1].logical_form}.placeholders().empty());
  CHECK(LogicalForm{"inform_intent=transfer{user_account,amount}"}.placeholders() ==
        std::vector<std::string>{"user_account", "amount"});
}

TEST_CASE("parser rejects malformed or mismatched lines") {
  // surface mentions a placeholder the form does not declare
  CHECK_THROWS_AS(parse_templates("inform{amount} ||| Roughly {sum}. ||| a1\n"),
                  TemplateParseError);
  // declared placeholder missing from the surface
  CHECK_THROWS_AS(parse_templates("inform{amount} ||| About that much. ||| a1\n"),
                  TemplateParseError);
  // no separator
  CHECK_THROWS_AS(parse_templates("inform{amount} About {amount}.\n"), TemplateParseError);
  // duplicate surface within one form
  CHECK_THROWS_AS(parse_templates("confirm=yes{} ||| Yes. ||| a1\n"
                                  "confirm=yes{} ||| Yes. ||| a2\n"),
                  TemplateParseError);
}

TEST_CASE("splitting yields disjoint train-heavy thirds per form") {
  TemplateStore store;
  store["f6"] = make_entries("f6", 6);
  store["f4"] = make_entries("f4", 4);
  store["f5"] = make_entries("f5", 5);
  TemplateSplit split = split_templates(store, 17);

  CHECK(split.train.at("f6").size() == 2);
  CHECK(split.dev.at("f6").size() == 2);
  CHECK(split.test.at("f6").size() == 2);
  CHECK(split.train.at("f4").size() == 2);
  CHECK(split.dev.at("f4").size() == 1);
  CHECK(split.test.at("f4").size() == 1);
  CHECK(split.train.at("f5").size() == 2);
  CHECK(split.dev.at("f5").size() == 2);
  CHECK(split.test.at("f5").size() == 1);

  for (const auto& form : {"f6", "f4", "f5"}) {
    std::set<std::string> seen;
    size_t total = 0;
    for (const TemplateStore* part : {&split.train, &split.dev, &split.test})
      for (const auto& e : part->at(form)) {
        seen.insert(e.surface);
        ++total;
      }
    CHECK(seen.size() == total);  // disjoint
    CHECK(total == store.at(form).size());
  }

  CHECK(split.train_dev_pool("f4").size() == 3);

  // deterministic under seed, different under another seed somewhere
  TemplateSplit again = split_templates(store, 17);
  CHECK(again.train.at("f6") == split.train.at("f6"));
  CHECK(again.test.at("f5") == split.test.at("f5"));
}

TEST_CASE("splitting needs at least three templates per form") {
  TemplateStore store;
  store["f2"] = make_entries("f2", 2);
  CHECK_THROWS_AS(split_templates(store, 1), TemplateParseError);
}

TEST_CASE("realize_action substitutes bindings and errors on missing ones") {
  Action a;
  a.speaker = Speaker::user;
  a.act = acts::inform;
  a.intent = "transfer";
  a.bindings = {{"partner_name", "Megan"}};
  std::vector<TemplateEntry> pool = {
      {"inform{partner_name}", "Send it to {partner_name}.", "a1"}};
  RngStream rng(1);
  CHECK(realize_action(a, pool, rng) == "Send it to Megan.");

  a.bindings.clear();
  CHECK_THROWS_AS(realize_action(a, pool, rng), RealizationError);
  CHECK_THROWS_AS(realize_action(a, {}, rng), RealizationError);
}

TEST_CASE("logical forms cover generated user actions") {
  Action open;
  open.speaker = Speaker::user;
  open.act = acts::inform_intent;
  open.intent = "transfer";
  open.bindings = {{"user_account", "joint"}, {"amount", "50 euros"}};
  CHECK(logical_form_of(open) == "inform_intent=transfer{user_account,amount}");

  Action ci;
  ci.speaker = Speaker::user;
  ci.act = acts::confirm_inform;
  ci.intent = "transfer";
  ci.bindings = {{"amount", "60 euros"}};
  CHECK(logical_form_of(ci) == "confirm_inform{amount}");

  Action no;
  no.speaker = Speaker::user;
  no.act = acts::confirm;
  no.bindings = {{"answer", "no"}};
  CHECK(logical_form_of(no) == "confirm=no{}");
}

TEST_CASE("rendered dialogues keep the action sequence and tag the condition") {
  auto entries = parse_templates_file("data/templates/user_templates.txt");
  TemplateSplit split = split_templates(build_store(entries), 5);
  PolicyConfig policy;
  RngStream prng(RngStream::derive(9, "profile", 0));
  UserProfile p = sample_profile(ProfilePools::defaults(), prng);
  Dialogue d = run_episode(schema_for("transfer"), p, policy, 9);
  d.id = "test-transfer-0";

  Dialogue it = render_dialogue(d, split, Partition::train_dev);
  Dialogue oot = render_dialogue(d, split, Partition::test);
  CHECK(it.tags.condition == TemplateCondition::IT);
  CHECK(oot.tags.condition == TemplateCondition::OOT);
  CHECK(action_sequence(it) == action_sequence(d));
  CHECK(action_sequence(oot) == action_sequence(d));
  for (const auto& t : it.turns) {
    if (t.speaker == Speaker::api) CHECK(t.text.empty());
    else CHECK(!t.text.empty());
  }
  // rendering is deterministic given the dialogue seed
  Dialogue it2 = render_dialogue(d, split, Partition::train_dev);
  CHECK(serialize_dialogue(it2) == serialize_dialogue(it));

  // OOT user turns never use train or dev surfaces of their form
  for (size_t i = 0; i < oot.turns.size(); ++i) {
    if (oot.turns[i].speaker != Speaker::user) continue;
    std::string form = logical_form_of(oot.turns[i].action);
    for (const auto& e : split.train_dev_pool(form)) {
      std::string surface = e.surface;
      for (const auto& [k, v] : oot.turns[i].action.bindings) {
        size_t pos = surface.find("{" + k + "}");
        if (pos != std::string::npos) surface.replace(pos, k.size() + 2, v);
      }
      CHECK(oot.turns[i].text != surface);
    }
  }
}
