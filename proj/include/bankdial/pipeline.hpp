#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bankdial/action.hpp"
#include "bankdial/corpus.hpp"
#include "bankdial/schema.hpp"
#include "bankdial/templates.hpp"

namespace bankdial {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a full run needs. Round-trips through JSON; unknown keys are
// rejected so typos in config files fail loudly.
struct RunConfig {
  uint64_t master_seed = 1;
  int train_per_intent = 200;
  int dev_per_intent = 50;
  int test_per_intent = 200;
  int challenge_per_intent = 200;
  std::string templates_path = "data/templates/user_templates.txt";
  std::string pools_path;  // empty -> built-in pools
  std::string out_dir = "out";
  PolicyConfig policy;
  nlohmann::json model = nlohmann::json::object();  // forwarded to the trainer

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
  std::string config_hash() const;
  void validate() const;  // throws ConfigError
};

// Non-challenge dialogues for one split, action-level, ids assigned.
Corpus generate_split(const RunConfig& cfg, const ProfilePools& pools, const std::string& split,
                      int per_intent);

// One challenge test set, action-level. Multiple-occurrence sets exist only
// for turn_compression and audit_more.
Corpus generate_challenge_set(const RunConfig& cfg, const ProfilePools& pools, ChallengeKind kind,
                              bool multiple);

Corpus render_corpus(const Corpus& corpus, const TemplateSplit& split, Partition partition);

// Tags for the files a run produces: "train", "dev", "test_it", "test_oot",
// "<kind>_it"/"<kind>_oot", "multi_<kind>_it"/"multi_<kind>_oot".
std::vector<std::string> all_testset_tags();
std::string corpus_path(const RunConfig& cfg, const std::string& tag);

struct GenerateResult {
  std::string manifest_path;
  std::string challenge_manifest_path;
  std::string candidates_path;
  std::string candidates_by_intent_path;
  std::vector<std::pair<std::string, size_t>> counts;  // tag -> dialogues
};

// The whole generation stage: template split, base corpora, challenge sets
// (IT and OOT renderings of the same action dialogues), canonical candidate
// list, manifests. Audits policy conformance, leakage-freedom and challenge
// exclusivity before anything is declared done.
GenerateResult generate_all(const RunConfig& cfg);

}  // namespace bankdial
