#include "bankdial/templates.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "bankdial/surface.hpp"

namespace bankdial {

std::vector<std::string> LogicalForm::placeholders() const {
  auto open = key.find('{');
  auto close = key.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw TemplateParseError("malformed logical form key: " + key);
  std::vector<std::string> out;
  std::string inner = key.substr(open + 1, close - open - 1);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

namespace {

std::vector<std::string> surface_placeholders(const std::string& surface) {
  std::vector<std::string> out;
  size_t pos = 0;
  while ((pos = surface.find('{', pos)) != std::string::npos) {
    size_t end = surface.find('}', pos);
    if (end == std::string::npos) throw TemplateParseError("unclosed placeholder in: " + surface);
    out.push_back(surface.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<TemplateEntry> parse_templates(const std::string& text) {
  std::vector<TemplateEntry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
      size_t sep = stripped.find("|||", pos);
      if (sep == std::string::npos) {
        parts.push_back(trim(stripped.substr(pos)));
        break;
      }
      parts.push_back(trim(stripped.substr(pos, sep - pos)));
      pos = sep + 3;
    }
    if (parts.size() < 2 || parts.size() > 3)
      throw TemplateParseError("line " + std::to_string(lineno) + ": expected <form> ||| <surface>");
    TemplateEntry e{parts[0], parts[1], parts.size() == 3 ? parts[2] : ""};
    if (e.surface.empty())
      throw TemplateParseError("line " + std::to_string(lineno) + ": empty surface");

    LogicalForm form{e.logical_form};
    std::multiset<std::string> expected;
    for (const auto& p : form.placeholders()) expected.insert(p);
    std::multiset<std::string> actual;
    for (const auto& p : surface_placeholders(e.surface)) actual.insert(p);
    if (expected != actual) {
      std::string missing, extra;
      for (const auto& p : expected)
        if (actual.count(p) == 0) missing += (missing.empty() ? "" : ",") + p;
      for (const auto& p : actual)
        if (expected.count(p) == 0) extra += (extra.empty() ? "" : ",") + p;
      throw TemplateParseError("line " + std::to_string(lineno) + ": placeholder mismatch for " +
                               e.logical_form + (missing.empty() ? "" : " missing {" + missing + "}") +
                               (extra.empty() ? "" : " unknown {" + extra + "}"));
    }
    if (!seen.insert({e.logical_form, e.surface}).second)
      throw TemplateParseError("line " + std::to_string(lineno) + ": duplicate template for " +
                               e.logical_form);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<TemplateEntry> parse_templates_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TemplateParseError("cannot open template file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_templates(buf.str());
}

TemplateStore build_store(const std::vector<TemplateEntry>& entries) {
  TemplateStore store;
  for (const auto& e : entries) store[e.logical_form].push_back(e);
  return store;
}

std::string to_string(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::dev: return "dev";
    case Partition::test: return "test";
    case Partition::train_dev: return "train_dev";
  }
  return "?";
}

const std::vector<TemplateEntry>& TemplateSplit::pool(Partition p, const std::string& form) const {
  const TemplateStore* store = nullptr;
  switch (p) {
    case Partition::train: store = &train; break;
    case Partition::dev: store = &dev; break;
    case Partition::test: store = &test; break;
    case Partition::train_dev:
      throw RealizationError("train_dev pool is materialized via train_dev_pool()");
  }
  auto it = store->find(form);
  if (it == store->end() || it->second.empty())
    throw RealizationError("partition " + to_string(p) + " has no templates for " + form);
  return it->second;
}

std::vector<TemplateEntry> TemplateSplit::train_dev_pool(const std::string& form) const {
  std::vector<TemplateEntry> out;
  auto a = train.find(form);
  auto b = dev.find(form);
  if (a != train.end()) out.insert(out.end(), a->second.begin(), a->second.end());
  if (b != dev.end()) out.insert(out.end(), b->second.begin(), b->second.end());
  if (out.empty()) throw RealizationError("no train/dev templates for " + form);
  return out;
}

TemplateSplit split_templates(const TemplateStore& store, uint64_t seed) {
  TemplateSplit split;
  uint64_t form_index = 0;
  for (const auto& [form, entries] : store) {
    if (entries.size() < 3)
      throw TemplateParseError("logical form " + form + " has only " +
                               std::to_string(entries.size()) + " templates; need >= 3 to split");
    std::vector<TemplateEntry> pool = entries;
    RngStream rng(RngStream::derive(seed, "template-split:" + form, form_index++));
    rng.shuffle(pool);
    size_t n = pool.size(), q = n / 3, r = n % 3;
    size_t n_train = q + (r > 0 ? 1 : 0);
    size_t n_dev = q + (r > 1 ? 1 : 0);
    for (size_t i = 0; i < n; ++i) {
      if (i < n_train)
        split.train[form].push_back(pool[i]);
      else if (i < n_train + n_dev)
        split.dev[form].push_back(pool[i]);
      else
        split.test[form].push_back(pool[i]);
    }
  }
  return split;
}

std::string logical_form_of(const Action& a) {
  if (a.speaker != Speaker::user) throw RealizationError("logical forms are user-side only");
  auto braces = [](const std::vector<Binding>& bs, const char* skip = "") {
    std::string out = "{";
    bool first = true;
    for (const auto& [slot, _] : bs) {
      if (slot == skip) continue;
      if (!first) out += ",";
      out += slot;
      first = false;
    }
    return out + "}";
  };
  if (a.act == acts::inform_intent) return "inform_intent=" + a.intent + braces(a.bindings);
  if (a.act == acts::inform) return "inform" + braces(a.bindings);
  if (a.act == acts::confirm_inform) return "confirm_inform" + braces(a.bindings, "confirm");
  if (a.act == acts::confirm) {
    std::string v = a.bindings.empty() ? "yes" : a.bindings[0].second;
    return "confirm=" + v + "{}";
  }
  if (a.act == acts::cannot_recall) {
    std::string slot = a.bindings.empty() ? "" : a.bindings[0].first;
    return "cannot_recall=" + slot + "{}";
  }
  throw RealizationError("no logical form for user act " + a.act);
}

std::string realize_action(const Action& a, const std::vector<TemplateEntry>& pool, RngStream& rng) {
  if (pool.empty()) throw RealizationError("empty template pool for " + logical_form_of(a));
  const TemplateEntry& entry = pool[static_cast<size_t>(
      rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
  std::string out = entry.surface;
  for (const auto& [slot, value] : a.bindings) {
    if (slot == "confirm") continue;
    if (value.empty()) continue;  // cannot_recall carries the slot name only
    std::string ph = "{" + slot + "}";
    size_t pos = out.find(ph);
    if (pos == std::string::npos)
      throw RealizationError("template for " + entry.logical_form + " lacks placeholder " + ph);
    out.replace(pos, ph.size(), value);
  }
  if (out.find('{') != std::string::npos || out.find('}') != std::string::npos)
    throw RealizationError("unbound placeholder after realizing " + entry.logical_form + ": " + out);
  return out;
}

Dialogue render_dialogue(const Dialogue& d, const TemplateSplit& split, Partition partition) {
  RngStream rng(RngStream::derive(d.seed, "render:" + to_string(partition), 0));
  Dialogue out = d;
  out.tags.condition = partition == Partition::test ? TemplateCondition::OOT : TemplateCondition::IT;
  for (auto& turn : out.turns) {
    if (turn.speaker == Speaker::api) {
      turn.text.clear();
    } else if (turn.speaker == Speaker::system) {
      turn.text = system_surface(turn.action);
    } else {
      std::string form = logical_form_of(turn.action);
      if (partition == Partition::train_dev) {
        auto pool = split.train_dev_pool(form);
        turn.text = realize_action(turn.action, pool, rng);
      } else {
        turn.text = realize_action(turn.action, split.pool(partition, form), rng);
      }
    }
  }
  return out;
}

}  // namespace bankdial
