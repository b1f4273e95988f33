#pragma once

#include <stdexcept>
#include <map>
#include <string>
#include <vector>

#include "bankdial/action.hpp"
#include "bankdial/rng.hpp"

namespace bankdial {

// act [=qualifier] {placeholder,...} — e.g. "inform_intent=transfer{amount}",
// "inform{partner_name}", "confirm=yes{}".
struct LogicalForm {
  std::string key;
  std::vector<std::string> placeholders() const;
};

struct TemplateEntry {
  std::string logical_form;
  std::string surface;    // each placeholder appears exactly once as {name}
  std::string author_id;

  bool operator==(const TemplateEntry&) const = default;
};

using TemplateStore = std::map<std::string, std::vector<TemplateEntry>>;

struct TemplateParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RealizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One entry per line: <logical_form> ||| <surface> [||| <author>]. '#' starts
// a comment. Rejects placeholder mismatches and duplicate surfaces per form.
std::vector<TemplateEntry> parse_templates(const std::string& text);
std::vector<TemplateEntry> parse_templates_file(const std::string& path);

TemplateStore build_store(const std::vector<TemplateEntry>& entries);

enum class Partition { train, dev, test, train_dev };
std::string to_string(Partition p);

// Disjoint thirds per logical form; every partition can realize every form.
struct TemplateSplit {
  TemplateStore train, dev, test;

  const std::vector<TemplateEntry>& pool(Partition p, const std::string& form) const;
  // train+dev union used for in-template test rendering
  std::vector<TemplateEntry> train_dev_pool(const std::string& form) const;
};

// Even thirds per form (remainders go to train, then dev); deterministic
// under seed. Every form needs >= 3 templates.
TemplateSplit split_templates(const TemplateStore& store, uint64_t seed);

// The logical form key for a user action.
std::string logical_form_of(const Action& a);

// Uniformly samples a template from the pool and substitutes bindings.
std::string realize_action(const Action& a, const std::vector<TemplateEntry>& pool, RngStream& rng);

// User turns from the chosen partition, system turns from the fixed surface
// table, api turns stay textless. Tags the dialogue IT or OOT.
Dialogue render_dialogue(const Dialogue& d, const TemplateSplit& split, Partition partition);

}  // namespace bankdial
