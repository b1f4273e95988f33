#include "bankdial/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "bankdial/candidates.hpp"
#include "bankdial/challenge.hpp"
#include "bankdial/policy.hpp"
#include "bankdial/selfplay.hpp"
#include "bankdial/surface.hpp"

namespace bankdial {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig RunConfig::from_json(const json& j) {
  static const std::set<std::string> known = {
      "master_seed",       "train_per_intent", "dev_per_intent", "test_per_intent",
      "challenge_per_intent", "templates_path",  "pools_path",     "out_dir",
      "policy",            "model"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config key: " + k);

  RunConfig c;
  c.master_seed = j.value("master_seed", c.master_seed);
  c.train_per_intent = j.value("train_per_intent", c.train_per_intent);
  c.dev_per_intent = j.value("dev_per_intent", c.dev_per_intent);
  c.test_per_intent = j.value("test_per_intent", c.test_per_intent);
  c.challenge_per_intent = j.value("challenge_per_intent", c.challenge_per_intent);
  c.templates_path = j.value("templates_path", c.templates_path);
  c.pools_path = j.value("pools_path", c.pools_path);
  c.out_dir = j.value("out_dir", c.out_dir);
  if (j.contains("policy")) {
    const json& p = j.at("policy");
    static const std::set<std::string> pkeys = {"max_consecutive_invalid", "invalid_prob",
                                               "final_success_prob", "recall_fail_prob",
                                               "change_yes_prob"};
    for (const auto& [k, _] : p.items())
      if (!pkeys.count(k)) throw ConfigError("unknown policy key: " + k);
    c.policy.max_consecutive_invalid =
        p.value("max_consecutive_invalid", c.policy.max_consecutive_invalid);
    c.policy.invalid_prob = p.value("invalid_prob", c.policy.invalid_prob);
    c.policy.final_success_prob = p.value("final_success_prob", c.policy.final_success_prob);
    c.policy.recall_fail_prob = p.value("recall_fail_prob", c.policy.recall_fail_prob);
    c.policy.change_yes_prob = p.value("change_yes_prob", c.policy.change_yes_prob);
  }
  if (j.contains("model")) c.model = j.at("model");
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  return json{{"master_seed", master_seed},
              {"train_per_intent", train_per_intent},
              {"dev_per_intent", dev_per_intent},
              {"test_per_intent", test_per_intent},
              {"challenge_per_intent", challenge_per_intent},
              {"templates_path", templates_path},
              {"pools_path", pools_path},
              {"out_dir", out_dir},
              {"policy",
               {{"max_consecutive_invalid", policy.max_consecutive_invalid},
                {"invalid_prob", policy.invalid_prob},
                {"final_success_prob", policy.final_success_prob},
                {"recall_fail_prob", policy.recall_fail_prob},
                {"change_yes_prob", policy.change_yes_prob}}},
              {"model", model}};
}

std::string RunConfig::config_hash() const { return content_hash_hex(to_json().dump()); }

void RunConfig::validate() const {
  if (!policy.valid()) throw ConfigError("policy parameters out of range");
  if (train_per_intent < 1 || dev_per_intent < 1 || test_per_intent < 1 ||
      challenge_per_intent < 1)
    throw ConfigError("per-intent counts must be positive");
  if (templates_path.empty()) throw ConfigError("templates_path is required");
  if (out_dir.empty()) throw ConfigError("out_dir is required");
}

namespace {

constexpr int kMaxAttempts = 20;

Dialogue generate_one(const IntentSchema& schema, const ProfilePools& pools,
                      const PolicyConfig& policy, uint64_t base_seed,
                      const ChallengeScript* script, ChallengeKind kind, bool multiple) {
  std::string last_error;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    uint64_t seed = attempt == 0 ? base_seed : RngStream::derive(base_seed, "retry", attempt);
    RngStream prof_rng(RngStream::derive(seed, "profile", 0));
    UserProfile profile = sample_profile(pools, prof_rng);
    try {
      if (script) return run_episode(schema, profile, policy, seed, *script);
      if (kind != ChallengeKind::none)
        return gen_challenge(kind, multiple, schema, profile, policy, seed);
      return run_episode(schema, profile, policy, seed);
    } catch (const GenerationError& e) {
      last_error = e.what();
    }
  }
  throw GenerationError("no viable dialogue after " + std::to_string(kMaxAttempts) +
                        " attempts for intent " + schema.name + ": " + last_error);
}

}  // namespace

Corpus generate_split(const RunConfig& cfg, const ProfilePools& pools, const std::string& split,
                      int per_intent) {
  Corpus corpus;
  for (const auto& intent : intent_names()) {
    const IntentSchema& schema = schema_for(intent);
    for (int i = 0; i < per_intent; ++i) {
      uint64_t seed = RngStream::derive(cfg.master_seed, "dialogue:" + split + ":" + intent,
                                        static_cast<uint64_t>(i));
      Dialogue d = generate_one(schema, pools, cfg.policy, seed, nullptr, ChallengeKind::none,
                                false);
      d.id = split + "-" + intent + "-" + std::to_string(i);
      corpus.push_back(std::move(d));
    }
  }
  return corpus;
}

Corpus generate_challenge_set(const RunConfig& cfg, const ProfilePools& pools, ChallengeKind kind,
                              bool multiple) {
  Corpus corpus;
  std::string prefix = (multiple ? "multi-" : "") + to_string(kind);
  for (const auto& intent : eligible_intents(kind, multiple)) {
    const IntentSchema& schema = schema_for(intent);
    for (int i = 0; i < cfg.challenge_per_intent; ++i) {
      uint64_t seed = RngStream::derive(cfg.master_seed, "challenge:" + prefix + ":" + intent,
                                        static_cast<uint64_t>(i));
      Dialogue d = generate_one(schema, pools, cfg.policy, seed, nullptr, kind, multiple);
      d.id = prefix + "-" + intent + "-" + std::to_string(i);
      corpus.push_back(std::move(d));
    }
  }
  return corpus;
}

Corpus render_corpus(const Corpus& corpus, const TemplateSplit& split, Partition partition) {
  Corpus out;
  out.reserve(corpus.size());
  for (const auto& d : corpus) out.push_back(render_dialogue(d, split, partition));
  return out;
}

std::vector<std::string> all_testset_tags() {
  std::vector<std::string> tags = {"train", "dev", "test_it", "test_oot"};
  for (ChallengeKind kind : all_challenge_kinds()) {
    tags.push_back(to_string(kind) + "_it");
    tags.push_back(to_string(kind) + "_oot");
  }
  for (ChallengeKind kind : {ChallengeKind::turn_compression, ChallengeKind::audit_more}) {
    tags.push_back("multi_" + to_string(kind) + "_it");
    tags.push_back("multi_" + to_string(kind) + "_oot");
  }
  return tags;
}

std::string corpus_path(const RunConfig& cfg, const std::string& tag) {
  fs::path base(cfg.out_dir);
  if (tag == "train" || tag == "dev" || tag == "test_it" || tag == "test_oot")
    return (base / (tag + ".jsonl")).string();
  return (base / "challenge" / (tag + ".jsonl")).string();
}

namespace {

void audit_clean(const Corpus& corpus, const PolicyConfig& policy, const std::string& tag) {
  for (const auto& d : corpus) {
    auto violations = validate_policy(d, policy);
    if (!violations.empty())
      throw GenerationError(tag + ": dialogue " + d.id + " violates policy: " +
                            to_string(violations[0].code) + " " + violations[0].detail);
    for (ChallengeKind kind : all_challenge_kinds())
      if (count_pattern(d, kind) > 0)
        throw GenerationError(tag + ": dialogue " + d.id + " leaks pattern " + to_string(kind));
  }
}

void audit_challenge(const Corpus& corpus, ChallengeKind kind, const std::string& tag) {
  for (const auto& d : corpus)
    if (!verify_pattern(d, kind))
      throw GenerationError(tag + ": dialogue " + d.id + " does not exhibit exactly " +
                            to_string(kind));
}

}  // namespace

GenerateResult generate_all(const RunConfig& cfg) {
  cfg.validate();

  // Template validation happens before any file is written.
  auto entries = parse_templates_file(cfg.templates_path);
  TemplateSplit tsplit = split_templates(build_store(entries), cfg.master_seed);
  ProfilePools pools =
      cfg.pools_path.empty() ? ProfilePools::defaults() : ProfilePools::from_json_file(cfg.pools_path);

  GenerateResult result;
  Corpus everything;  // rendered; feeds candidate extraction

  auto emit = [&](const std::string& tag, const Corpus& rendered) {
    write_corpus(corpus_path(cfg, tag), rendered);
    result.counts.emplace_back(tag, rendered.size());
    everything.insert(everything.end(), rendered.begin(), rendered.end());
  };

  Corpus train = generate_split(cfg, pools, "train", cfg.train_per_intent);
  Corpus dev = generate_split(cfg, pools, "dev", cfg.dev_per_intent);
  Corpus test = generate_split(cfg, pools, "test", cfg.test_per_intent);
  audit_clean(train, cfg.policy, "train");
  audit_clean(dev, cfg.policy, "dev");
  audit_clean(test, cfg.policy, "test");

  emit("train", render_corpus(train, tsplit, Partition::train));
  emit("dev", render_corpus(dev, tsplit, Partition::dev));
  emit("test_it", render_corpus(test, tsplit, Partition::train_dev));
  emit("test_oot", render_corpus(test, tsplit, Partition::test));

  json challenge_manifest = json::array();
  auto emit_challenge = [&](ChallengeKind kind, bool multiple) {
    Corpus set = generate_challenge_set(cfg, pools, kind, multiple);
    std::string prefix = (multiple ? std::string("multi_") : std::string("")) + to_string(kind);
    audit_challenge(set, kind, prefix);
    emit(prefix + "_it", render_corpus(set, tsplit, Partition::train_dev));
    emit(prefix + "_oot", render_corpus(set, tsplit, Partition::test));
    for (const auto& intent : eligible_intents(kind, multiple)) {
      challenge_manifest.push_back(json{{"kind", to_string(kind)},
                                        {"multiple", multiple},
                                        {"intent", intent},
                                        {"count", cfg.challenge_per_intent},
                                        {"seed_domain", "challenge:" + std::string(multiple ? "multi-" : "") +
                                                            to_string(kind) + ":" + intent}});
    }
  };
  for (ChallengeKind kind : all_challenge_kinds()) emit_challenge(kind, false);
  emit_challenge(ChallengeKind::turn_compression, true);
  emit_challenge(ChallengeKind::audit_more, true);

  // Canonical candidate list over everything generated, plus the router
  // pseudo-actions so single- and multi-network checkpoints share ids.
  CandidateSet cands = extract_candidates(everything);
  for (const auto& intent : intent_names()) {
    Action route;
    route.speaker = Speaker::system;
    route.act = acts::call_memory_network;
    route.intent = intent;
    cands.add(canonical_action_string(route));
  }
  result.candidates_path = (fs::path(cfg.out_dir) / "candidates.txt").string();
  {
    std::ofstream out(result.candidates_path, std::ios::binary);
    if (!out) throw CorpusIoError("cannot write " + result.candidates_path);
    for (const auto& c : cands.items()) out << c << '\n';
  }

  // Candidate ids grouped by dialogue intent: the answer space each
  // per-intent expert network ranks over. Router pseudo-actions stay out.
  std::map<std::string, std::set<int>> ids_by_intent;
  for (const auto& d : everything)
    for (const auto& t : d.turns)
      if (is_candidate_turn(t)) {
        auto id = cands.id_of(candidate_string(t));
        if (!id) throw GenerationError("candidate missing from set: " + candidate_string(t));
        ids_by_intent[d.intent].insert(*id);
      }
  json by_intent = json::object();
  for (const auto& [intent, ids] : ids_by_intent)
    by_intent[intent] = std::vector<int>(ids.begin(), ids.end());
  result.candidates_by_intent_path = (fs::path(cfg.out_dir) / "candidates_by_intent.json").string();
  {
    std::ofstream out(result.candidates_by_intent_path);
    if (!out) throw CorpusIoError("cannot write " + result.candidates_by_intent_path);
    out << by_intent.dump(2) << '\n';
  }

  result.challenge_manifest_path = (fs::path(cfg.out_dir) / "challenge_manifest.json").string();
  {
    std::ofstream out(result.challenge_manifest_path);
    out << challenge_manifest.dump(2) << '\n';
  }

  json manifest{{"format_version", 1},
                {"master_seed", cfg.master_seed},
                {"template_checksum", file_hash_hex(cfg.templates_path)},
                {"config_hash", cfg.config_hash()},
                {"candidates", cands.size()},
                {"corpora", json::array()}};
  for (const auto& [tag, n] : result.counts)
    manifest["corpora"].push_back(json{{"tag", tag}, {"path", corpus_path(cfg, tag)}, {"dialogues", n}});
  result.manifest_path = (fs::path(cfg.out_dir) / "manifest.json").string();
  {
    std::ofstream out(result.manifest_path);
    out << manifest.dump(2) << '\n';
  }
  return result;
}

}  // namespace bankdial
