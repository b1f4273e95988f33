#include "bankdial/memnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "bankdial/normalize.hpp"
#include "bankdial/schema.hpp"
#include "bankdial/surface.hpp"

namespace bankdial {

using nlohmann::json;

int Vocabulary::id(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? unk : it->second;
}

int Vocabulary::add(const std::string& token) {
  auto it = index.find(token);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(tokens.size());
  tokens.push_back(token);
  index.emplace(token, id);
  return id;
}

MemNetConfig MemNetConfig::from_json(const json& j) {
  static const std::set<std::string> known = {
      "embedding_dim", "hops",      "memory_size", "learning_rate",      "batch_size",
      "max_epochs",    "use_hop_map", "plain_sgd", "expert_epoch_factor"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw MemNetError("unknown model config key: " + k);
  MemNetConfig c;
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.hops = j.value("hops", c.hops);
  c.memory_size = j.value("memory_size", c.memory_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.use_hop_map = j.value("use_hop_map", c.use_hop_map);
  c.plain_sgd = j.value("plain_sgd", c.plain_sgd);
  c.expert_epoch_factor = j.value("expert_epoch_factor", c.expert_epoch_factor);
  c.validate();
  return c;
}

json MemNetConfig::to_json() const {
  return json{{"embedding_dim", embedding_dim}, {"hops", hops},
              {"memory_size", memory_size},     {"learning_rate", learning_rate},
              {"batch_size", batch_size},       {"max_epochs", max_epochs},
              {"use_hop_map", use_hop_map},     {"plain_sgd", plain_sgd},
              {"expert_epoch_factor", expert_epoch_factor}};
}

void MemNetConfig::validate() const {
  if (embedding_dim < 1 || hops < 1 || memory_size < 1 || batch_size < 1 || max_epochs < 1 ||
      expert_epoch_factor < 1 || learning_rate <= 0.0)
    throw MemNetError("model config values must be positive");
}

namespace {

std::vector<std::string> turn_tokens(const Turn& t) {
  if (t.speaker == Speaker::api) return tokenize(api_string(t.action));
  return tokenize(t.text);
}

std::string speaker_token(Speaker s) {
  switch (s) {
    case Speaker::user: return "#user";
    case Speaker::system: return "#system";
    case Speaker::api: return "#api";
  }
  return "#user";
}

std::vector<int> to_ids(const std::vector<std::string>& toks, const Vocabulary& vocab) {
  std::vector<int> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(vocab.id(t));
  return out;
}

// Memory: the most recent memory_size of `prior`, each tagged with its
// speaker and a recency bucket (#t0 = newest).
std::vector<std::vector<int>> make_memory(const std::vector<const Turn*>& prior,
                                          const Vocabulary& vocab, const MemNetConfig& config) {
  size_t keep = std::min(prior.size(), static_cast<size_t>(config.memory_size));
  size_t start = prior.size() - keep;
  std::vector<std::vector<int>> memory;
  memory.reserve(keep);
  for (size_t i = start; i < prior.size(); ++i) {
    std::vector<int> item = to_ids(turn_tokens(*prior[i]), vocab);
    item.push_back(vocab.id(speaker_token(prior[i]->speaker)));
    size_t age = prior.size() - 1 - i;
    item.push_back(vocab.id("#t" + std::to_string(age)));
    memory.push_back(std::move(item));
  }
  return memory;
}

}  // namespace

Vocabulary build_vocabulary(const Corpus& train, const CandidateSet& cands,
                            const MemNetConfig& config) {
  Vocabulary vocab;
  vocab.add("<pad>");
  vocab.add("<unk>");
  for (const char* s : {"#user", "#system", "#api"}) vocab.add(s);
  for (int t = 0; t < config.memory_size; ++t) vocab.add("#t" + std::to_string(t));
  for (const auto& d : train)
    for (const auto& turn : d.turns)
      for (const auto& tok : turn_tokens(turn)) vocab.add(tok);
  for (const auto& c : cands.items())
    for (const auto& tok : tokenize(c)) vocab.add(tok);
  return vocab;
}

std::vector<TrainingExample> build_examples(const Dialogue& d, const CandidateSet& cands,
                                            const Vocabulary& vocab, const MemNetConfig& config) {
  std::vector<TrainingExample> out;
  int last_user = -1;
  for (size_t j = 0; j < d.turns.size(); ++j) {
    const Turn& t = d.turns[j];
    if (t.speaker == Speaker::user) {
      last_user = static_cast<int>(j);
      continue;
    }
    if (!is_candidate_turn(t) || last_user < 0) continue;

    auto gold = cands.id_of(candidate_string(t));
    if (!gold)
      throw MemNetError("gold response of " + d.id + " turn " + std::to_string(j) +
                        " is not in the candidate set: " + candidate_string(t));

    std::vector<const Turn*> prior;
    for (size_t i = 0; i < j; ++i)
      if (static_cast<int>(i) != last_user) prior.push_back(&d.turns[i]);

    TrainingExample ex;
    ex.memory = make_memory(prior, vocab, config);
    ex.query = to_ids(turn_tokens(d.turns[static_cast<size_t>(last_user)]), vocab);
    ex.gold = *gold;
    ex.dialogue_id = d.id;
    ex.turn_index = static_cast<int>(j);
    ex.intent = d.intent;
    ex.challenge = d.tags.challenge;
    ex.condition = d.tags.condition;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<TrainingExample> build_dataset(const Corpus& corpus, const CandidateSet& cands,
                                           const Vocabulary& vocab, const MemNetConfig& config) {
  std::vector<TrainingExample> out;
  for (const auto& d : corpus) {
    auto exs = build_examples(d, cands, vocab, config);
    out.insert(out.end(), std::make_move_iterator(exs.begin()), std::make_move_iterator(exs.end()));
  }
  return out;
}

std::string router_candidate(const std::string& intent) {
  Action a;
  a.speaker = Speaker::system;
  a.act = acts::call_memory_network;
  a.intent = intent;
  return canonical_action_string(a);
}

TrainingExample build_router_example(const Dialogue& d, const CandidateSet& cands,
                                     const Vocabulary& vocab, const MemNetConfig& config) {
  int first_user = -1;
  for (size_t j = 0; j < d.turns.size(); ++j)
    if (d.turns[j].speaker == Speaker::user) {
      first_user = static_cast<int>(j);
      break;
    }
  if (first_user < 0) throw MemNetError("dialogue " + d.id + " has no user turn to route on");

  auto gold = cands.id_of(router_candidate(d.intent));
  if (!gold) throw MemNetError("router candidate missing for intent " + d.intent);

  std::vector<const Turn*> prior;
  for (int i = 0; i < first_user; ++i) prior.push_back(&d.turns[static_cast<size_t>(i)]);

  TrainingExample ex;
  ex.memory = make_memory(prior, vocab, config);
  ex.query = to_ids(turn_tokens(d.turns[static_cast<size_t>(first_user)]), vocab);
  ex.gold = *gold;
  ex.dialogue_id = d.id;
  ex.turn_index = first_user + 1;
  ex.intent = d.intent;
  ex.challenge = d.tags.challenge;
  ex.condition = d.tags.condition;
  return ex;
}

CandidateTokens CandidateTokens::build(const CandidateSet& cands, const Vocabulary& vocab) {
  CandidateTokens ct;
  ct.token_ids.reserve(cands.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (size_t i = 0; i < cands.size(); ++i) {
    auto ids = to_ids(tokenize(cands.at(static_cast<int>(i))), vocab);
    for (int t : ids) trips.emplace_back(static_cast<int>(i), t, 1.0);
    ct.token_ids.push_back(std::move(ids));
  }
  ct.S.resize(static_cast<Eigen::Index>(cands.size()), static_cast<Eigen::Index>(vocab.size()));
  ct.S.setFromTriplets(trips.begin(), trips.end());
  return ct;
}

MemNetParams init_params(const MemNetConfig& config, size_t vocab_size, uint64_t seed) {
  config.validate();
  RngStream rng(RngStream::derive(seed, "memnet-init", 0));
  auto fill = [&](Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = (rng.next_double() * 2.0 - 1.0) * 0.1;
  };
  MemNetParams p;
  p.M.resize(static_cast<size_t>(config.hops) + 1);
  Eigen::Index V = static_cast<Eigen::Index>(vocab_size), d = config.embedding_dim;
  for (auto& m : p.M) {
    fill(m, V, d);
    m.row(Vocabulary::pad).setZero();
  }
  fill(p.W, V, d);
  p.W.row(Vocabulary::pad).setZero();
  if (config.use_hop_map) fill(p.H, d, d);
  return p;
}

namespace {

Eigen::VectorXd bow(const std::vector<int>& ids, const Eigen::MatrixXd& M) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(M.cols());
  for (int t : ids) v += M.row(t);
  return v;
}

struct HopCache {
  Eigen::MatrixXd m;  // memory input embeddings, items x dim
  Eigen::MatrixXd c;  // memory output embeddings
  Eigen::VectorXd a;  // attention
};

struct ForwardCache {
  std::vector<Eigen::VectorXd> u;  // hop states u_0..u_K
  std::vector<HopCache> hops;
};

// Final hop state; candidate scoring happens outside so the training loop
// can share one embedded candidate matrix per batch.
Eigen::VectorXd hop_states(const TrainingExample& ex, const MemNetParams& params,
                           const MemNetConfig& config, ForwardCache* cache) {
  Eigen::VectorXd u = bow(ex.query, params.M[0]);
  if (cache) cache->u.push_back(u);
  size_t items = ex.memory.size();
  for (int k = 1; k <= config.hops; ++k) {
    if (items == 0) {
      if (config.use_hop_map) u = params.H * u;
      if (cache) {
        cache->hops.emplace_back();
        cache->u.push_back(u);
      }
      continue;
    }
    Eigen::MatrixXd m(items, config.embedding_dim), c(items, config.embedding_dim);
    for (size_t i = 0; i < items; ++i) {
      m.row(static_cast<Eigen::Index>(i)) = bow(ex.memory[i], params.M[static_cast<size_t>(k - 1)]);
      c.row(static_cast<Eigen::Index>(i)) = bow(ex.memory[i], params.M[static_cast<size_t>(k)]);
    }
    Eigen::VectorXd z = m * u;
    Eigen::VectorXd a = (z.array() - z.maxCoeff()).exp();
    a /= a.sum();
    Eigen::VectorXd o = c.transpose() * a;
    u = (config.use_hop_map ? Eigen::VectorXd(params.H * u) : u) + o;
    if (!u.allFinite()) throw MemNetError("non-finite hop state at hop " + std::to_string(k));
    if (cache) {
      cache->hops.push_back({std::move(m), std::move(c), std::move(a)});
      cache->u.push_back(u);
    }
  }
  return u;
}

}  // namespace

Eigen::VectorXd forward(const TrainingExample& ex, const MemNetParams& params,
                        const MemNetConfig& config, const CandidateTokens& cands) {
  Eigen::VectorXd u = hop_states(ex, params, config, nullptr);
  Eigen::VectorXd scores = cands.S * (params.W * u);
  if (!scores.allFinite()) throw MemNetError("non-finite candidate scores");
  return scores;
}

int argmax_lowest(const Eigen::VectorXd& scores) {
  int best = 0;
  for (int i = 1; i < scores.size(); ++i)
    if (scores(i) > scores(best)) best = i;
  return best;
}

int predict(const TrainingExample& ex, const MemNetParams& params, const MemNetConfig& config,
            const CandidateTokens& cands) {
  return argmax_lowest(forward(ex, params, config, cands));
}

namespace {

// Fixed worker count so results do not depend on the host's core count:
// per-thread partials are reduced in thread order, keeping floating-point
// summation deterministic.
constexpr size_t kWorkers = 8;

struct GradAccum {
  std::vector<Eigen::MatrixXd> M;
  Eigen::MatrixXd H;
  Eigen::MatrixXd Dcw;  // candidate-embedding gradient; W comes from S^T * Dcw
  double loss = 0.0;
  std::exception_ptr error;
};

// Loss (and, when accumulating, gradients) of one example. `inv_b` is the
// 1/batch scaling applied to both.
double example_pass(const TrainingExample& ex, const MemNetParams& params,
                    const MemNetConfig& config, const Eigen::MatrixXd& CW, double inv_b,
                    GradAccum* acc) {
  if (ex.gold < 0 || ex.gold >= CW.rows()) throw MemNetError("gold id out of range");
  ForwardCache cache;
  Eigen::VectorXd uK = hop_states(ex, params, config, acc ? &cache : nullptr);

  Eigen::VectorXd s = CW * uK;
  double smax = s.maxCoeff();
  Eigen::VectorXd p = (s.array() - smax).exp();
  double Z = p.sum();
  p /= Z;
  double ex_loss = -(s(ex.gold) - smax - std::log(Z));
  if (!std::isfinite(ex_loss)) throw MemNetError("non-finite loss");
  if (!acc) return ex_loss * inv_b;

  Eigen::VectorXd ds = p * inv_b;
  ds(ex.gold) -= inv_b;

  acc->Dcw += ds * uK.transpose();
  Eigen::VectorXd du = CW.transpose() * ds;

  for (int k = config.hops; k >= 1; --k) {
    const HopCache& h = cache.hops[static_cast<size_t>(k - 1)];
    const Eigen::VectorXd& u_prev = cache.u[static_cast<size_t>(k - 1)];
    if (h.a.size() == 0) {
      if (config.use_hop_map) {
        acc->H += du * u_prev.transpose();
        du = params.H.transpose() * du;
      }
      continue;
    }
    Eigen::VectorXd da = h.c * du;
    Eigen::VectorXd dz = h.a.cwiseProduct(da.array().matrix() -
                                          Eigen::VectorXd::Constant(h.a.size(), h.a.dot(da)));
    Eigen::VectorXd du_prev = h.m.transpose() * dz;
    if (config.use_hop_map) {
      acc->H += du * u_prev.transpose();
      du_prev += params.H.transpose() * du;
    } else {
      du_prev += du;
    }
    for (size_t i = 0; i < ex.memory.size(); ++i) {
      const double dzi = dz(static_cast<Eigen::Index>(i));
      const double ai = h.a(static_cast<Eigen::Index>(i));
      for (int t : ex.memory[i]) {
        acc->M[static_cast<size_t>(k - 1)].row(t) += dzi * u_prev.transpose();
        acc->M[static_cast<size_t>(k)].row(t) += ai * du.transpose();
      }
    }
    du = du_prev;
  }
  for (int t : ex.query) acc->M[0].row(t) += du.transpose();
  return ex_loss * inv_b;
}

}  // namespace

double loss_and_gradients(const std::vector<TrainingExample>& batch, const MemNetParams& params,
                          const MemNetConfig& config, const CandidateTokens& cands,
                          Gradients* grads) {
  if (batch.empty()) throw MemNetError("empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  Eigen::MatrixXd CW = cands.S * params.W;  // C x dim

  const size_t n = batch.size();
  const size_t workers = std::min(kWorkers, n);
  const size_t chunk = (n + workers - 1) / workers;

  std::vector<GradAccum> accs(workers);
  auto run_range = [&](size_t w) {
    GradAccum& acc = accs[w];
    try {
      if (grads) {
        acc.M.assign(params.M.size(),
                     Eigen::MatrixXd::Zero(params.M[0].rows(), params.M[0].cols()));
        acc.H = config.use_hop_map ? Eigen::MatrixXd::Zero(params.H.rows(), params.H.cols())
                                   : Eigen::MatrixXd();
        acc.Dcw = Eigen::MatrixXd::Zero(CW.rows(), config.embedding_dim);
      }
      size_t lo = w * chunk, hi = std::min(n, lo + chunk);
      for (size_t i = lo; i < hi; ++i)
        acc.loss += example_pass(batch[i], params, config, CW, inv_b, grads ? &acc : nullptr);
    } catch (...) {
      acc.error = std::current_exception();
    }
  };

  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    for (auto& t : pool) t.join();
  }
  for (auto& acc : accs)
    if (acc.error) std::rethrow_exception(acc.error);

  double loss = 0.0;
  for (const auto& acc : accs) loss += acc.loss;

  if (grads) {
    grads->M.assign(params.M.size(), Eigen::MatrixXd::Zero(params.M[0].rows(), params.M[0].cols()));
    grads->H = config.use_hop_map ? Eigen::MatrixXd::Zero(params.H.rows(), params.H.cols())
                                  : Eigen::MatrixXd();
    Eigen::MatrixXd Dcw = Eigen::MatrixXd::Zero(CW.rows(), config.embedding_dim);
    for (const auto& acc : accs) {
      for (size_t k = 0; k < grads->M.size(); ++k) grads->M[k] += acc.M[k];
      if (config.use_hop_map) grads->H += acc.H;
      Dcw += acc.Dcw;
    }
    grads->W = cands.S.transpose() * Dcw;
    for (auto& g : grads->M) g.row(Vocabulary::pad).setZero();
    grads->W.row(Vocabulary::pad).setZero();
  }
  return loss;
}

namespace {

struct AdamState {
  Eigen::MatrixXd m, v;
  void init(const Eigen::MatrixXd& p) {
    m = Eigen::MatrixXd::Zero(p.rows(), p.cols());
    v = Eigen::MatrixXd::Zero(p.rows(), p.cols());
  }
};

struct Optimizer {
  bool plain_sgd;
  double lr;
  int t = 0;
  std::vector<AdamState> states;

  void init(const MemNetParams& p, const MemNetConfig& cfg) {
    plain_sgd = cfg.plain_sgd;
    lr = cfg.learning_rate;
    if (plain_sgd) return;
    for (const auto& m : p.M) {
      states.emplace_back();
      states.back().init(m);
    }
    states.emplace_back();
    states.back().init(p.W);
    if (cfg.use_hop_map) {
      states.emplace_back();
      states.back().init(p.H);
    }
  }

  void step(MemNetParams& p, const Gradients& g, const MemNetConfig& cfg) {
    if (plain_sgd) {
      for (size_t i = 0; i < p.M.size(); ++i) p.M[i] -= lr * g.M[i];
      p.W -= lr * g.W;
      if (cfg.use_hop_map) p.H -= lr * g.H;
      return;
    }
    ++t;
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, t), bc2 = 1.0 - std::pow(b2, t);
    size_t si = 0;
    auto update = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
      AdamState& s = states[si++];
      s.m = b1 * s.m + (1.0 - b1) * grad;
      s.v = b2 * s.v + (1.0 - b2) * grad.cwiseProduct(grad);
      param.array() -= lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + eps);
    };
    for (size_t i = 0; i < p.M.size(); ++i) update(p.M[i], g.M[i]);
    update(p.W, g.W);
    if (cfg.use_hop_map) update(p.H, g.H);
  }
};

}  // namespace

double accuracy(const std::vector<TrainingExample>& examples, const MemNetParams& params,
                const MemNetConfig& config, const CandidateTokens& cands) {
  if (examples.empty()) return 0.0;
  Eigen::MatrixXd CW = cands.S * params.W;
  const size_t n = examples.size();
  const size_t workers = std::min(kWorkers, n);
  const size_t chunk = (n + workers - 1) / workers;
  std::vector<size_t> correct(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  auto run_range = [&](size_t w) {
    try {
      size_t lo = w * chunk, hi = std::min(n, lo + chunk);
      for (size_t i = lo; i < hi; ++i) {
        Eigen::VectorXd u = hop_states(examples[i], params, config, nullptr);
        if (argmax_lowest(CW * u) == examples[i].gold) ++correct[w];
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  size_t total = 0;
  for (size_t c : correct) total += c;
  return static_cast<double>(total) / static_cast<double>(n);
}

MemNetParams train_smn(const std::vector<TrainingExample>& train,
                       const std::vector<TrainingExample>& dev, const CandidateTokens& cands,
                       const MemNetConfig& config, uint64_t seed,
                       std::vector<TrainLogEntry>* log) {
  if (train.empty()) throw MemNetError("empty training set");
  config.validate();

  // Vocabulary size comes from the widest token id actually present; the
  // candidate incidence matrix already spans the full vocabulary.
  MemNetParams params = init_params(config, static_cast<size_t>(cands.S.cols()), seed);
  Optimizer opt;
  opt.init(params, config);

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  MemNetParams best = params;
  double best_dev = -1.0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    RngStream rng(RngStream::derive(seed, "memnet-epoch", static_cast<uint64_t>(epoch)));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<TrainingExample> batch;
      batch.reserve(end - start);
      for (size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      Gradients grads;
      double loss;
      try {
        loss = loss_and_gradients(batch, params, config, cands, &grads);
      } catch (const MemNetError& e) {
        throw MemNetError("epoch " + std::to_string(epoch) + " batch " + std::to_string(batches) +
                          ": " + e.what());
      }
      opt.step(params, grads, config);
      epoch_loss += loss;
      ++batches;
    }
    epoch_loss /= static_cast<double>(batches);

    double dev_acc = dev.empty() ? 0.0 : accuracy(dev, params, config, cands);
    if (log) log->push_back({epoch, epoch_loss, dev_acc});
    if (dev.empty() || dev_acc > best_dev) {
      best = params;
      best_dev = dev_acc;
    }
  }
  return best;
}

CandidateTokens subset_candidate_tokens(const CandidateTokens& full, const std::vector<int>& ids) {
  CandidateTokens ct;
  ct.token_ids.reserve(ids.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (size_t i = 0; i < ids.size(); ++i) {
    int g = ids[i];
    if (g < 0 || static_cast<size_t>(g) >= full.size())
      throw MemNetError("candidate subset id out of range: " + std::to_string(g));
    for (int t : full.token_ids[static_cast<size_t>(g)])
      trips.emplace_back(static_cast<int>(i), t, 1.0);
    ct.token_ids.push_back(full.token_ids[static_cast<size_t>(g)]);
  }
  ct.S.resize(static_cast<Eigen::Index>(ids.size()), full.S.cols());
  ct.S.setFromTriplets(trips.begin(), trips.end());
  return ct;
}

namespace {

// Golds rewritten from global candidate ids to positions within `ids`.
std::vector<TrainingExample> localize_golds(std::vector<TrainingExample> exs,
                                            const std::vector<int>& ids,
                                            const std::string& intent) {
  std::map<int, int> local;
  for (size_t i = 0; i < ids.size(); ++i) local[ids[i]] = static_cast<int>(i);
  for (auto& ex : exs) {
    auto it = local.find(ex.gold);
    if (it == local.end())
      throw MemNetError("gold candidate " + std::to_string(ex.gold) +
                        " outside the candidate subset of intent " + intent);
    ex.gold = it->second;
  }
  return exs;
}

}  // namespace

MmnModel train_mmn(const Corpus& train, const Corpus& dev, const CandidateSet& cands,
                   const Vocabulary& vocab, const MemNetConfig& config, uint64_t seed,
                   const std::map<std::string, std::vector<int>>& expert_candidates,
                   std::vector<TrainLogEntry>* log) {
  std::map<std::string, Corpus> by_intent, dev_by_intent;
  for (const auto& d : train) by_intent[d.intent].push_back(d);
  for (const auto& d : dev) dev_by_intent[d.intent].push_back(d);
  for (const auto& intent : intent_names())
    if (by_intent.find(intent) == by_intent.end())
      throw MemNetError("no training dialogues for intent " + intent);

  CandidateTokens ct = CandidateTokens::build(cands, vocab);
  MmnModel model;
  model.expert_candidates = expert_candidates;
  MemNetConfig expert_config = config;
  expert_config.max_epochs = config.max_epochs * config.expert_epoch_factor;
  for (const auto& intent : intent_names()) {
    auto tr = build_dataset(by_intent[intent], cands, vocab, expert_config);
    auto dv = build_dataset(dev_by_intent[intent], cands, vocab, expert_config);
    auto mask = expert_candidates.find(intent);
    if (mask != expert_candidates.end() && !mask->second.empty()) {
      CandidateTokens sub = subset_candidate_tokens(ct, mask->second);
      model.experts[intent] =
          train_smn(localize_golds(std::move(tr), mask->second, intent),
                    localize_golds(std::move(dv), mask->second, intent), sub, expert_config,
                    RngStream::derive(seed, "expert:" + intent, 0), log);
    } else {
      model.experts[intent] = train_smn(tr, dv, ct, expert_config,
                                        RngStream::derive(seed, "expert:" + intent, 0), log);
    }
  }

  // The router only ever decides among the six routing candidates, so it
  // trains against that six-way space rather than the full candidate list.
  std::vector<int> router_ids;
  for (const auto& intent : intent_names()) {
    auto id = cands.id_of(router_candidate(intent));
    if (!id) throw MemNetError("router candidate missing for intent " + intent);
    router_ids.push_back(*id);
  }
  std::sort(router_ids.begin(), router_ids.end());
  std::map<int, int> router_local;
  for (size_t i = 0; i < router_ids.size(); ++i) router_local[router_ids[i]] = static_cast<int>(i);
  CandidateTokens router_ct = subset_candidate_tokens(ct, router_ids);

  std::vector<TrainingExample> router_train, router_dev;
  for (const auto& d : train) router_train.push_back(build_router_example(d, cands, vocab, config));
  for (const auto& d : dev) router_dev.push_back(build_router_example(d, cands, vocab, config));
  for (auto* set : {&router_train, &router_dev})
    for (auto& ex : *set) ex.gold = router_local.at(ex.gold);
  model.router = train_smn(router_train, router_dev, router_ct, config,
                           RngStream::derive(seed, "router", 0), log);
  return model;
}

MmnScorer MmnScorer::build(const MmnModel& model, const CandidateSet& cands,
                           const Vocabulary& vocab) {
  CandidateTokens full = CandidateTokens::build(cands, vocab);
  MmnScorer scorer;
  for (const auto& [intent, params] : model.experts) {
    Space space;
    auto mask = model.expert_candidates.find(intent);
    if (mask != model.expert_candidates.end() && !mask->second.empty()) {
      space.ids = mask->second;
      space.ct = subset_candidate_tokens(full, space.ids);
    } else {
      space.ids.resize(full.size());
      for (size_t i = 0; i < full.size(); ++i) space.ids[i] = static_cast<int>(i);
      space.ct = full;
    }
    scorer.by_intent[intent] = std::move(space);
  }
  return scorer;
}

std::vector<int> mmn_predict_dialogue(const std::vector<TrainingExample>& dialogue_examples,
                                      const MmnModel& model, const MemNetConfig& config,
                                      const CandidateSet& cand_set, const CandidateTokens& cands,
                                      std::string* routed_intent, const MmnScorer* scorer) {
  if (dialogue_examples.empty()) return {};

  // The router scores only the six routing candidates.
  TrainingExample route_ex = dialogue_examples.front();
  Eigen::VectorXd scores = forward(route_ex, model.router, config, cands);
  std::string chosen;
  double best = 0.0;
  for (const auto& intent : intent_names()) {
    auto id = cand_set.id_of(router_candidate(intent));
    if (!id) throw MemNetError("router candidate missing for intent " + intent);
    if (chosen.empty() || scores(*id) > best) {
      chosen = intent;
      best = scores(*id);
    }
  }
  if (routed_intent) *routed_intent = chosen;

  const MemNetParams& expert = model.experts.at(chosen);

  // The chosen expert scores only its own candidate subset; its local argmax
  // maps back to a global candidate id.
  const CandidateTokens* expert_ct = &cands;
  const std::vector<int>* expert_ids = nullptr;
  MmnScorer::Space scratch;
  if (scorer) {
    const MmnScorer::Space& space = scorer->by_intent.at(chosen);
    expert_ct = &space.ct;
    expert_ids = &space.ids;
  } else {
    auto mask = model.expert_candidates.find(chosen);
    if (mask != model.expert_candidates.end() && !mask->second.empty()) {
      scratch.ids = mask->second;
      scratch.ct = subset_candidate_tokens(cands, scratch.ids);
      expert_ct = &scratch.ct;
      expert_ids = &scratch.ids;
    }
  }

  Eigen::MatrixXd CW = expert_ct->S * expert.W;
  std::vector<int> out;
  out.reserve(dialogue_examples.size());
  for (const auto& ex : dialogue_examples) {
    Eigen::VectorXd u = hop_states(ex, expert, config, nullptr);
    int local = argmax_lowest(CW * u);
    out.push_back(expert_ids ? (*expert_ids)[static_cast<size_t>(local)] : local);
  }
  return out;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXd m(j.size(), j[0].size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)];
  return m;
}

json params_to_json(const MemNetParams& p) {
  json j;
  j["M"] = json::array();
  for (const auto& m : p.M) j["M"].push_back(matrix_to_json(m));
  j["W"] = matrix_to_json(p.W);
  j["H"] = p.H.size() ? matrix_to_json(p.H) : json::array();
  return j;
}

MemNetParams params_from_json(const json& j) {
  MemNetParams p;
  for (const auto& m : j.at("M")) p.M.push_back(matrix_from_json(m));
  p.W = matrix_from_json(j.at("W"));
  p.H = matrix_from_json(j.at("H"));
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["format_version"] = ckpt.format_version;
  j["model_type"] = ckpt.model_type;
  j["config"] = ckpt.config.to_json();
  j["vocab"] = ckpt.vocab.tokens;
  j["candidates"] = ckpt.candidates;
  if (ckpt.model_type == "smn") {
    j["params"] = params_to_json(ckpt.smn);
  } else if (ckpt.model_type == "mmn") {
    j["router"] = params_to_json(ckpt.mmn.router);
    j["experts"] = json::object();
    for (const auto& [intent, p] : ckpt.mmn.experts) j["experts"][intent] = params_to_json(p);
    j["expert_candidates"] = json::object();
    for (const auto& [intent, ids] : ckpt.mmn.expert_candidates)
      j["expert_candidates"][intent] = ids;
  } else {
    throw MemNetError("unknown model type: " + ckpt.model_type);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MemNetError("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MemNetError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw MemNetError(path + ": " + e.what());
  }
  Checkpoint ckpt;
  ckpt.format_version = j.at("format_version");
  if (ckpt.format_version != 1)
    throw MemNetError("unsupported checkpoint format_version " +
                      std::to_string(ckpt.format_version));
  ckpt.model_type = j.at("model_type");
  ckpt.config = MemNetConfig::from_json(j.at("config"));
  for (const auto& t : j.at("vocab")) ckpt.vocab.add(t.get<std::string>());
  for (const auto& c : j.at("candidates")) ckpt.candidates.push_back(c.get<std::string>());
  if (ckpt.model_type == "smn") {
    ckpt.smn = params_from_json(j.at("params"));
  } else if (ckpt.model_type == "mmn") {
    ckpt.mmn.router = params_from_json(j.at("router"));
    for (const auto& [intent, p] : j.at("experts").items())
      ckpt.mmn.experts[intent] = params_from_json(p);
    if (j.contains("expert_candidates"))
      for (const auto& [intent, ids] : j.at("expert_candidates").items())
        ckpt.mmn.expert_candidates[intent] = ids.get<std::vector<int>>();
  } else {
    throw MemNetError("unknown model type: " + ckpt.model_type);
  }
  return ckpt;
}

}  // namespace bankdial
