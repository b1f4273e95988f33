#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "bankdial/candidates.hpp"
#include "bankdial/corpus.hpp"
#include "bankdial/rng.hpp"

namespace bankdial {

struct MemNetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Token ids are dense from 0; PAD embeds to the zero vector and its rows are
// pinned to zero throughout training.
struct Vocabulary {
  static constexpr int pad = 0;
  static constexpr int unk = 1;

  std::vector<std::string> tokens;  // index -> token
  std::map<std::string, int> index;

  int id(const std::string& token) const;  // unk for unknown tokens
  int add(const std::string& token);
  size_t size() const { return tokens.size(); }
};

struct MemNetConfig {
  int embedding_dim = 128;
  int hops = 3;
  int memory_size = 40;
  double learning_rate = 0.001;
  int batch_size = 32;
  int max_epochs = 30;
  bool use_hop_map = false;  // linear map on the hop state; plain addition otherwise
  bool plain_sgd = false;    // adaptive-moment updates otherwise
  // Mixture experts each see roughly a sixth of the corpus per epoch; this
  // factor scales their epoch count so they get a comparable number of updates.
  int expert_epoch_factor = 3;

  static MemNetConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;  // throws MemNetError
};

// M holds hops+1 embedding matrices under adjacent tying: hop k reads with
// M[k-1] and writes with M[k]; the query embeds with M[0]. W embeds
// candidates. All are |V| x dim.
struct MemNetParams {
  std::vector<Eigen::MatrixXd> M;
  Eigen::MatrixXd W;
  Eigen::MatrixXd H;  // dim x dim; empty unless use_hop_map
};

struct TrainingExample {
  std::vector<std::vector<int>> memory;  // oldest..newest, speaker/time tokens included
  std::vector<int> query;
  int gold = -1;

  // evaluation bookkeeping
  std::string dialogue_id;
  int turn_index = -1;
  std::string intent;
  ChallengeKind challenge = ChallengeKind::none;
  TemplateCondition condition = TemplateCondition::unrendered;
};

// Tokens of the training corpus plus candidate strings and the speaker/time
// feature tokens the examples carry.
Vocabulary build_vocabulary(const Corpus& train, const CandidateSet& cands,
                            const MemNetConfig& config);

// One example per system-side turn after the first user utterance: query is
// the latest user utterance, memory is everything before the target except
// the query, truncated to the most recent memory_size items. api_response
// turns enter memory only.
std::vector<TrainingExample> build_examples(const Dialogue& d, const CandidateSet& cands,
                                            const Vocabulary& vocab, const MemNetConfig& config);
std::vector<TrainingExample> build_dataset(const Corpus& corpus, const CandidateSet& cands,
                                           const Vocabulary& vocab, const MemNetConfig& config);

// The routing example of a dialogue: same memory/query as the first regular
// example, gold = the call-memory-network(intent) candidate.
TrainingExample build_router_example(const Dialogue& d, const CandidateSet& cands,
                                     const Vocabulary& vocab, const MemNetConfig& config);

// Canonical router candidate string for an intent.
std::string router_candidate(const std::string& intent);

// Candidate token lists frozen against a vocabulary; S is the candidate ->
// token-count incidence matrix used to embed all candidates in one product.
struct CandidateTokens {
  std::vector<std::vector<int>> token_ids;
  Eigen::SparseMatrix<double> S;  // |cands| x |V|

  static CandidateTokens build(const CandidateSet& cands, const Vocabulary& vocab);
  size_t size() const { return token_ids.size(); }
};

MemNetParams init_params(const MemNetConfig& config, size_t vocab_size, uint64_t seed);

// Scores over all candidates. Throws MemNetError with the hop index on
// non-finite intermediates.
Eigen::VectorXd forward(const TrainingExample& ex, const MemNetParams& params,
                        const MemNetConfig& config, const CandidateTokens& cands);

// Argmax of forward scores; ties go to the lowest candidate id.
int predict(const TrainingExample& ex, const MemNetParams& params, const MemNetConfig& config,
            const CandidateTokens& cands);
int argmax_lowest(const Eigen::VectorXd& scores);

struct Gradients {
  std::vector<Eigen::MatrixXd> M;
  Eigen::MatrixXd W;
  Eigen::MatrixXd H;
};

// Mean cross-entropy of the gold candidates over the batch; accumulates
// analytic gradients when grads is non-null. The oracle for these gradients
// is central finite differences, exercised in the test suite.
double loss_and_gradients(const std::vector<TrainingExample>& batch, const MemNetParams& params,
                          const MemNetConfig& config, const CandidateTokens& cands,
                          Gradients* grads);

struct TrainLogEntry {
  int epoch = 0;
  double loss = 0.0;
  double dev_accuracy = 0.0;
};

// Mini-batch training, deterministic under seed; returns the parameters of
// the best dev-accuracy epoch (final epoch when dev is empty).
MemNetParams train_smn(const std::vector<TrainingExample>& train,
                       const std::vector<TrainingExample>& dev, const CandidateTokens& cands,
                       const MemNetConfig& config, uint64_t seed,
                       std::vector<TrainLogEntry>* log = nullptr);

double accuracy(const std::vector<TrainingExample>& examples, const MemNetParams& params,
                const MemNetConfig& config, const CandidateTokens& cands);

// Restriction of a candidate space to a subset of ids (same vocabulary; row
// i of the result is candidate ids[i] of the full space).
CandidateTokens subset_candidate_tokens(const CandidateTokens& full, const std::vector<int>& ids);

// Six per-intent experts plus a router trained on routing examples only.
// Each expert ranks only its own intent's candidate subset ("its search
// space is implicitly reduced"); an absent entry means the full set.
struct MmnModel {
  MemNetParams router;
  std::map<std::string, MemNetParams> experts;
  std::map<std::string, std::vector<int>> expert_candidates;  // global candidate ids
};

MmnModel train_mmn(const Corpus& train, const Corpus& dev, const CandidateSet& cands,
                   const Vocabulary& vocab, const MemNetConfig& config, uint64_t seed,
                   const std::map<std::string, std::vector<int>>& expert_candidates = {},
                   std::vector<TrainLogEntry>* log = nullptr);

// Prebuilt per-expert candidate spaces so dialogue prediction does not
// rebuild the subset matrices per call.
struct MmnScorer {
  struct Space {
    std::vector<int> ids;  // local index -> global candidate id
    CandidateTokens ct;
  };
  std::map<std::string, Space> by_intent;

  static MmnScorer build(const MmnModel& model, const CandidateSet& cands,
                         const Vocabulary& vocab);
};

// Routes once on the dialogue's first example (argmax restricted to the six
// router candidates), then the chosen expert answers every example within
// its candidate subset. Returns one predicted global candidate id per input
// example. `scorer` may be null (built on the fly).
std::vector<int> mmn_predict_dialogue(const std::vector<TrainingExample>& dialogue_examples,
                                      const MmnModel& model, const MemNetConfig& config,
                                      const CandidateSet& cand_set, const CandidateTokens& cands,
                                      std::string* routed_intent = nullptr,
                                      const MmnScorer* scorer = nullptr);

// Self-contained model container: config, vocabulary, candidate list and all
// matrices. model_type is "smn" or "mmn".
struct Checkpoint {
  int format_version = 1;
  std::string model_type;
  MemNetConfig config;
  Vocabulary vocab;
  std::vector<std::string> candidates;
  MemNetParams smn;  // model_type == "smn"
  MmnModel mmn;      // model_type == "mmn"
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bankdial
