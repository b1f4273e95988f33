#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "bankdial/memnet.hpp"
#include "bankdial/pipeline.hpp"
#include "bankdial/policy.hpp"
#include "bankdial/selfplay.hpp"
#include "bankdial/templates.hpp"

using namespace bankdial;

namespace {

// A tiny fixed problem: vocab {<pad>,<unk>,a,b,c}, two candidates "a" and "b c".
struct TinyFixture {
  Vocabulary vocab;
  CandidateSet cands;
  CandidateTokens ct;
  MemNetConfig config;

  TinyFixture() {
    for (const char* t : {"<pad>", "<unk>", "a", "b", "c"}) vocab.add(t);
    cands.add("a");
    cands.add("b c");
    ct = CandidateTokens::build(cands, vocab);
    config.embedding_dim = 2;
    config.hops = 1;
    config.memory_size = 4;
  }
};

// Naive loop-based re-derivation of the network, written independently of the
// production code: BoW embeddings, softmax attention, residual hop state,
// candidate dot products.
std::vector<double> naive_forward(const TrainingExample& ex, const MemNetParams& params,
                                  const MemNetConfig& config, const CandidateTokens& cands) {
  int d = config.embedding_dim;
  auto embed = [&](const std::vector<int>& ids, const Eigen::MatrixXd& M) {
    std::vector<double> v(static_cast<size_t>(d), 0.0);
    for (int t : ids)
      for (int j = 0; j < d; ++j) v[static_cast<size_t>(j)] += M(t, j);
    return v;
  };
  std::vector<double> u = embed(ex.query, params.M[0]);
  for (int k = 1; k <= config.hops; ++k) {
    if (ex.memory.empty()) continue;
    std::vector<double> z;
    for (const auto& item : ex.memory) {
      auto m = embed(item, params.M[static_cast<size_t>(k - 1)]);
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += m[static_cast<size_t>(j)] * u[static_cast<size_t>(j)];
      z.push_back(dot);
    }
    double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (double& x : z) {
      x = std::exp(x - zmax);
      denom += x;
    }
    std::vector<double> o(static_cast<size_t>(d), 0.0);
    for (size_t i = 0; i < ex.memory.size(); ++i) {
      auto c = embed(ex.memory[i], params.M[static_cast<size_t>(k)]);
      for (int j = 0; j < d; ++j) o[static_cast<size_t>(j)] += (z[i] / denom) * c[static_cast<size_t>(j)];
    }
    for (int j = 0; j < d; ++j) u[static_cast<size_t>(j)] += o[static_cast<size_t>(j)];
  }
  std::vector<double> scores;
  for (const auto& ids : cands.token_ids) {
    double s = 0.0;
    for (int t : ids)
      for (int j = 0; j < d; ++j) s += params.W(t, j) * u[static_cast<size_t>(j)];
    scores.push_back(s);
  }
  return scores;
}

TrainingExample tiny_example(const TinyFixture& f) {
  TrainingExample ex;
  ex.query = {f.vocab.id("a"), f.vocab.id("b")};
  ex.memory = {{f.vocab.id("b")}, {f.vocab.id("c"), f.vocab.id("a")}};
  ex.gold = 1;
  return ex;
}

double rel_err(double a, double b) {
  double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

}  // namespace

TEST_CASE("forward matches a hand-rolled reimplementation") {
  TinyFixture f;
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    MemNetParams params = init_params(f.config, f.vocab.size(), seed);
    TrainingExample ex = tiny_example(f);
    Eigen::VectorXd got = forward(ex, params, f.config, f.ct);
    std::vector<double> want = naive_forward(ex, params, f.config, f.ct);
    REQUIRE(got.size() == 2);
    CHECK(std::abs(got(0) - want[0]) < 1e-10);
    CHECK(std::abs(got(1) - want[1]) < 1e-10);
  }
  // more hops, same agreement
  f.config.hops = 3;
  MemNetParams params = init_params(f.config, f.vocab.size(), 7);
  TrainingExample ex = tiny_example(f);
  Eigen::VectorXd got = forward(ex, params, f.config, f.ct);
  std::vector<double> want = naive_forward(ex, params, f.config, f.ct);
  CHECK(std::abs(got(0) - want[0]) < 1e-10);
  CHECK(std::abs(got(1) - want[1]) < 1e-10);
}

TEST_CASE("analytic gradients agree with central finite differences") {
  TinyFixture f;
  const double h = 1e-4;
  int checked = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    MemNetConfig config = f.config;
    config.hops = 1 + static_cast<int>(seed % 3);
    config.use_hop_map = (seed % 2 == 1);
    MemNetParams params = init_params(config, f.vocab.size(), seed + 100);

    TrainingExample a = tiny_example(f);
    TrainingExample b;
    b.query = {f.vocab.id("c")};
    b.memory = {{f.vocab.id("a"), f.vocab.id("a")}};
    b.gold = 0;
    std::vector<TrainingExample> batch = {a, b};

    Gradients grads;
    loss_and_gradients(batch, params, config, f.ct, &grads);

    auto check_entry = [&](Eigen::MatrixXd& m, const Eigen::MatrixXd& g, Eigen::Index r,
                           Eigen::Index c) {
      double orig = m(r, c);
      m(r, c) = orig + h;
      double up = loss_and_gradients(batch, params, config, f.ct, nullptr);
      m(r, c) = orig - h;
      double dn = loss_and_gradients(batch, params, config, f.ct, nullptr);
      m(r, c) = orig;
      double fd = (up - dn) / (2.0 * h);
      CAPTURE(seed);
      CAPTURE(r);
      CAPTURE(c);
      CHECK(rel_err(fd, g(r, c)) < 1e-4);
      ++checked;
    };

    for (size_t k = 0; k < params.M.size(); ++k)
      for (Eigen::Index r = 1; r < params.M[k].rows(); ++r)
        check_entry(params.M[k], grads.M[k], r, r % 2);
    for (Eigen::Index r = 1; r < params.W.rows(); ++r) check_entry(params.W, grads.W, r, (r + 1) % 2);
    if (config.use_hop_map)
      for (Eigen::Index r = 0; r < params.H.rows(); ++r) check_entry(params.H, grads.H, r, 0);
  }
  CHECK(checked > 100);
}

TEST_CASE("pad tokens are inert everywhere") {
  TinyFixture f;
  MemNetParams params = init_params(f.config, f.vocab.size(), 5);
  TrainingExample ex = tiny_example(f);
  TrainingExample padded = ex;
  padded.query.push_back(Vocabulary::pad);
  padded.memory[0].push_back(Vocabulary::pad);
  Eigen::VectorXd a = forward(ex, params, f.config, f.ct);
  Eigen::VectorXd b = forward(padded, params, f.config, f.ct);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("score ties resolve to the lowest candidate id") {
  Eigen::VectorXd s(4);
  s << 1.0, 3.0, 3.0, 2.0;
  CHECK(argmax_lowest(s) == 1);
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(3);
  CHECK(argmax_lowest(flat) == 0);
}

TEST_CASE("examples stop at memory_size and tag recency from the newest turn") {
  PolicyConfig policy;
  RngStream prng(RngStream::derive(4, "profile", 0));
  UserProfile p = sample_profile(ProfilePools::defaults(), prng);
  Dialogue d = run_episode(schema_for("transfer"), p, policy, 4);
  d.id = "x";
  CandidateSet cands = extract_candidates({d});
  MemNetConfig config;
  config.memory_size = 3;
  Vocabulary vocab = build_vocabulary({d}, cands, config);

  auto exs = build_examples(d, cands, vocab, config);
  REQUIRE(!exs.empty());
  for (const auto& ex : exs) {
    CHECK(ex.memory.size() <= 3);
    CHECK(ex.gold >= 0);
    if (!ex.memory.empty()) {
      // newest item carries #t0, the one before it #t1
      CHECK(ex.memory.back().back() == vocab.id("#t0"));
      if (ex.memory.size() >= 2)
        CHECK(ex.memory[ex.memory.size() - 2].back() == vocab.id("#t1"));
    }
  }
  // the last example of the dialogue targets its final system-side turn
  CHECK(exs.back().turn_index == static_cast<int>(d.turns.size()) - 1);

  // gold responses missing from the candidate set are an error
  CandidateSet empty;
  empty.add("nothing useful");
  CHECK_THROWS_AS(build_examples(d, empty, vocab, config), MemNetError);
}

TEST_CASE("router examples point at the routing pseudo-candidate") {
  PolicyConfig policy;
  RngStream prng(RngStream::derive(6, "profile", 0));
  UserProfile p = sample_profile(ProfilePools::defaults(), prng);
  Dialogue raw = run_episode(schema_for("balance"), p, policy, 6);
  raw.id = "r";
  auto entries = parse_templates_file("data/templates/user_templates.txt");
  TemplateSplit split = split_templates(build_store(entries), 3);
  Dialogue d = render_dialogue(raw, split, Partition::train_dev);
  CandidateSet cands = extract_candidates({d});
  for (const auto& intent : intent_names()) cands.add(router_candidate(intent));
  MemNetConfig config;
  Vocabulary vocab = build_vocabulary({d}, cands, config);

  TrainingExample ex = build_router_example(d, cands, vocab, config);
  CHECK(ex.gold == *cands.id_of("call-memory-network balance"));
  // routed on the first user utterance: only the greeting precedes it
  CHECK(ex.memory.size() == 1);
  CHECK(!ex.query.empty());
}

TEST_CASE("training is deterministic and learns a separable toy problem") {
  TinyFixture f;
  MemNetConfig config = f.config;
  config.max_epochs = 60;
  config.learning_rate = 0.01;
  config.batch_size = 2;
  config.embedding_dim = 8;

  // queries "a" vs "c" select different candidates
  TrainingExample ea, ec;
  ea.query = {f.vocab.id("a")};
  ea.gold = 0;
  ec.query = {f.vocab.id("c")};
  ec.gold = 1;
  std::vector<TrainingExample> train = {ea, ec, ea, ec};

  MemNetParams m1 = train_smn(train, train, f.ct, config, 11);
  MemNetParams m2 = train_smn(train, train, f.ct, config, 11);
  auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 || (a - b).cwiseAbs().maxCoeff() == 0.0);
  };
  for (size_t k = 0; k < m1.M.size(); ++k) CHECK(same(m1.M[k], m2.M[k]));
  CHECK(same(m1.W, m2.W));
  CHECK(accuracy(train, m1, config, f.ct) == 1.0);
  CHECK(m1.M[0].row(Vocabulary::pad).isZero());
  CHECK(m1.W.row(Vocabulary::pad).isZero());

  MemNetParams m3 = train_smn(train, train, f.ct, config, 12);
  bool differs = !same(m1.W, m3.W);
  for (size_t k = 0; k < m1.M.size() && !differs; ++k) differs = !same(m1.M[k], m3.M[k]);
  CHECK(differs);
}

TEST_CASE("checkpoints round-trip through disk") {
  TinyFixture f;
  Checkpoint ckpt;
  ckpt.model_type = "smn";
  ckpt.config = f.config;
  ckpt.vocab = f.vocab;
  ckpt.candidates = f.cands.items();
  ckpt.smn = init_params(f.config, f.vocab.size(), 9);

  std::string path = "/tmp/bankdial_test_ckpt.json";
  save_checkpoint(path, ckpt);
  Checkpoint back = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(back.model_type == "smn");
  CHECK(back.config.embedding_dim == f.config.embedding_dim);
  CHECK(back.config.hops == f.config.hops);
  CHECK(back.vocab.tokens == f.vocab.tokens);
  CHECK(back.candidates == f.cands.items());
  REQUIRE(back.smn.M.size() == ckpt.smn.M.size());
  for (size_t k = 0; k < ckpt.smn.M.size(); ++k)
    CHECK((back.smn.M[k] - ckpt.smn.M[k]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.smn.W - ckpt.smn.W).cwiseAbs().maxCoeff() == 0.0);
}
