#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "vsir/error.hpp"
#include "vsir/loglinear.hpp"

using namespace vsir;

namespace {

ModelParams tiny_params(std::size_t V, std::size_t C, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  auto p = loglinear::init_params(V, C, k, rng);
  synth::randomize(p, 1.0, rng);
  return p;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// A corpus where document d belongs to candidate d % C.
EncodedCorpus associated_corpus(std::size_t docs, std::size_t C, std::size_t V, std::size_t len, Rng& rng) {
  EncodedCorpus c;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<TokenId> doc;
    for (std::size_t i = 0; i < len; ++i) doc.push_back(static_cast<TokenId>(2 + rng() % (V - 2)));
    c.docs.push_back(std::move(doc));
    c.doc_ids.push_back("d" + std::to_string(d));
    pairs.emplace_back("c" + std::to_string(d % C), c.doc_ids.back());
  }
  attach_associations(c, pairs);
  return c;
}

}  // namespace

TEST(WordPosterior, UniformForZeroWeights) {
  auto p = tiny_params(5, 4, 3, 1);
  p["cand_mat"].fill(0.0f);
  p["cand_bias"].fill(0.0f);
  for (double v : loglinear::word_posterior(2, p)) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(WordPosterior, BiasAloneGivesBiasSoftmax) {
  auto p = tiny_params(5, 3, 3, 1);
  p["cand_mat"].fill(0.0f);
  p["cand_bias"] = Matrix(1, 3, std::vector<float>{2, 0, 0});
  const auto post = loglinear::word_posterior(1, p);
  const double z = std::exp(2.0) + 2.0;
  EXPECT_NEAR(post[0], std::exp(2.0) / z, 1e-15);
  EXPECT_NEAR(post[1], 1.0 / z, 1e-15);
}

TEST(WordPosterior, NormalizedAndShiftInvariant) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto p = tiny_params(8, 6, 4, seed);
    const auto post = loglinear::word_posterior(seed % 8, p);
    EXPECT_NEAR(sum(post), 1.0, 1e-6);
    for (double v : post) EXPECT_GT(v, 0.0);
    auto shifted = p;
    for (auto& b : shifted["cand_bias"].data()) b += 3.0f;
    const auto again = loglinear::word_posterior(seed % 8, shifted);
    EXPECT_EQ(std::max_element(post.begin(), post.end()) - post.begin(),
              std::max_element(again.begin(), again.end()) - again.begin());
  }
}

TEST(QueryPosterior, SingleWordEqualsWordPosterior) {
  const auto p = tiny_params(6, 4, 3, 2);
  const std::vector<TokenId> q{3};
  const auto a = loglinear::query_posterior(q, p);
  const auto b = loglinear::word_posterior(3, p);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(a[c], b[c], 1e-15);
}

TEST(QueryPosterior, RepeatedWordSharpens) {
  const auto p = tiny_params(6, 4, 3, 2);
  const auto single = loglinear::word_posterior(3, p);
  const std::vector<TokenId> q{3, 3};
  const auto twice = loglinear::query_posterior(q, p);
  double z = 0.0;
  for (double v : single) z += v * v;
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(twice[c], single[c] * single[c] / z, 1e-14);
  const auto top = std::max_element(single.begin(), single.end()) - single.begin();
  EXPECT_EQ(std::max_element(twice.begin(), twice.end()) - twice.begin(), top);
  EXPECT_GT(twice[top], single[top]);
}

TEST(QueryPosterior, MatchesProductThenNormalizeOracle) {
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = tiny_params(10, 3, 4, seed);
    const auto b = synth::random_batch(10, 1, 1 + seed % 4, 1, rng);
    std::vector<double> prod(3, 1.0);
    for (auto w : b.ngram(0)) {
      std::vector<double> logits(3);
      for (std::size_t c = 0; c < 3; ++c) {
        logits[c] = p["cand_bias"](0, c);
        for (std::size_t k = 0; k < 4; ++k) logits[c] += static_cast<double>(p["cand_mat"](c, k)) * p["word_emb"](w, k);
      }
      double z = 0.0;
      for (double l : logits) z += std::exp(l);
      for (std::size_t c = 0; c < 3; ++c) prod[c] *= std::exp(logits[c]) / z;
    }
    const double z = sum(prod);
    const auto got = loglinear::query_posterior(b.ngram(0), p);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(got[c], prod[c] / z, 1e-12);
    EXPECT_NEAR(sum(got), 1.0, 1e-6);

    std::vector<TokenId> reversed(b.ngram(0).rbegin(), b.ngram(0).rend());
    const auto r = loglinear::query_posterior(reversed, p);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(r[c], got[c], 1e-14);
  }
  EXPECT_THROW(loglinear::query_posterior({}, tiny_params(3, 2, 2, 0)), OutOfVocabularyQueryError);
}

TEST(TargetDistribution, UniformOverCandidates) {
  const std::vector<std::size_t> cands{2, 0, 2};
  EXPECT_EQ(loglinear::target_distribution(cands, 4), (std::vector<double>{0.5, 0, 0.5, 0}));
  EXPECT_THROW(loglinear::target_distribution({}, 4), std::invalid_argument);
}

TEST(TrainingTargets, LengthWeights) {
  EncodedCorpus c;
  c.docs = {{2, 3, 4, 5}, {2, 3}, {}};
  c.doc_ids = {"a", "b", "c"};
  const std::vector<std::pair<std::string, std::string>> pairs{{"x", "a"}, {"y", "b"}, {"x", "b"}};
  attach_associations(c, pairs);
  const auto t = loglinear::TrainingTargets::from_corpus(c);
  EXPECT_EQ(t.length_weight, (std::vector<double>{1.0, 2.0, 0.0}));
  EXPECT_EQ(t.num_candidates, 2u);
  EXPECT_TRUE(t.doc_candidates[2].empty());
}

TEST(LoglinearBatchLoss, UniformPredictionCostsLogC) {
  Rng rng(1);
  auto p = loglinear::init_params(6, 5, 3, rng);
  p["cand_mat"].fill(0.0f);
  auto c = associated_corpus(5, 5, 6, 4, rng);
  const auto targets = loglinear::TrainingTargets::from_corpus(c);
  const auto b = sample_batch(c, 2, 8, rng);
  const auto res = loglinear::batch_loss(b, p, targets, 0.0);
  EXPECT_NEAR(res.loss, std::log(5.0), 1e-12);
}

TEST(LoglinearBatchLoss, ConfidentCorrectPredictionLeavesRegularizer) {
  // One word per candidate; the embedding points the posterior at the
  // document's single candidate.
  EncodedCorpus c;
  c.docs = {{2, 2}, {3, 3}};
  c.doc_ids = {"a", "b"};
  const std::vector<std::pair<std::string, std::string>> pairs{{"x", "a"}, {"y", "b"}};
  attach_associations(c, pairs);
  const auto targets = loglinear::TrainingTargets::from_corpus(c);
  ModelParamsD p;
  p.kind = ModelKind::loglinear;
  p.add("word_emb", MatrixD(4, 2, std::vector<double>{0, 0, 0, 0, 1, 0, 0, 1}));
  p.add("cand_mat", MatrixD(2, 2, std::vector<double>{60, 0, 0, 60}));
  p.add("cand_bias", MatrixD(1, 2));
  Batch b;
  b.n = 2;
  b.tokens = {2, 2, 3, 3};
  b.targets = {0, 1};
  const auto res = loglinear::batch_loss(b, p, targets, 0.01);
  const double reg = 0.01 / 4.0 * (2.0 + 2.0 * 3600.0);
  EXPECT_NEAR(res.loss, reg, 1e-9);
}

TEST(LoglinearBatchLoss, GradientMatchesFiniteDifferences) {
  Rng rng(12);
  const auto p = tiny_params(12, 5, 4, 12).cast<double>();
  auto c = associated_corpus(8, 5, 12, 6, rng);
  c.docs[3].resize(3);  // uneven lengths exercise the length weight
  const auto targets = loglinear::TrainingTargets::from_corpus(c);
  const auto b = sample_batch(c, 3, 4, rng);
  const auto check = oracle::check_gradients(
      p, [&](const ModelParamsD& q) { return loglinear::batch_loss(b, q, targets, 0.1); });
  for (const auto& [name, err] : check.rel_error) EXPECT_LT(err, 1e-4) << name;
}

TEST(LoglinearBatchLoss, UnassociatedSourceDocumentIsAnError) {
  EncodedCorpus c;
  c.docs = {{2, 3}, {3, 2}};
  c.doc_ids = {"a", "b"};
  const std::vector<std::pair<std::string, std::string>> pairs{{"x", "a"}};
  attach_associations(c, pairs);
  const auto targets = loglinear::TrainingTargets::from_corpus(c);
  Batch b;
  b.n = 2;
  b.tokens = {2, 3, 3, 2};
  b.targets = {0, 1};
  EXPECT_THROW(loglinear::batch_loss(b, tiny_params(4, 1, 2, 0), targets, 0.0), std::invalid_argument);
}

TEST(LoglinearTrain, OneAssociationToyLossDecreases) {
  Rng rng(4);
  const auto c = associated_corpus(12, 4, 20, 15, rng);
  auto cfg = TrainConfig::loglinear_defaults();
  cfg.n = 2;
  cfg.m = 16;
  cfg.k_w = 8;
  cfg.epochs = 10;
  const auto res = loglinear::train(c, 20, cfg);
  ASSERT_EQ(res.epoch_losses.size(), 10u);
  EXPECT_LT(res.epoch_losses.back(), res.epoch_losses.front());
}

TEST(RankCandidates, ByPosterior) {
  auto p = tiny_params(4, 3, 2, 1);
  p["cand_mat"].fill(0.0f);
  p["cand_bias"] = Matrix(1, 3, std::vector<float>{0, 1, 1});
  const std::vector<TokenId> q{1};
  const auto r = loglinear::rank_candidates(q, p, 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].index, 1u);
  EXPECT_EQ(r[1].index, 2u);
  EXPECT_NEAR(r[0].score, std::exp(1.0) / (1 + 2 * std::exp(1.0)), 1e-12);
}

TEST(NormalizedEntropy, Examples) {
  EXPECT_NEAR(loglinear::normalized_entropy(std::vector<double>(7, 1.0 / 7.0)), 1.0, 1e-12);
  EXPECT_EQ(loglinear::normalized_entropy(std::vector<double>{0, 1, 0}), 0.0);
  EXPECT_NEAR(loglinear::normalized_entropy(std::vector<double>{0.75, 0.25}), 0.81128, 1e-5);
  EXPECT_THROW(loglinear::normalized_entropy(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(loglinear::normalized_entropy(std::vector<double>{0.5, 0.6}), std::invalid_argument);
}

TEST(NormalizedEntropy, BoundedAndDecreasingUnderConcentration) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(2 + rng() % 8);
    for (auto& v : p) v = u(rng);
    const double z = sum(p);
    for (auto& v : p) v /= z;
    const double h = loglinear::normalized_entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0 + 1e-12);
    EXPECT_NEAR(h, oracle::normalized_entropy(p), 1e-9);
    // Move half of every other candidate's mass onto the largest one.
    auto q = p;
    const auto top = std::max_element(q.begin(), q.end()) - q.begin();
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == top) continue;
      q[top] += q[i] / 2;
      q[i] /= 2;
    }
    EXPECT_LT(loglinear::normalized_entropy(q), h);
  }
}

TEST(ReciprocalRankEnsemble, Examples) {
  auto entry = [](const std::string& doc, std::size_t rank) { return RunEntry{"q", doc, rank, 0.0}; };
  vsir::Run a{{"q", {entry("x", 1), entry("b", 2), entry("c", 3), entry("a", 4)}}};
  vsir::Run b{{"q", {entry("x", 1), entry("a", 2), entry("b", 3), entry("c", 4)}}};
  const auto fused = loglinear::reciprocal_rank_ensemble(a, b).at("q");
  ASSERT_EQ(fused.size(), 4u);
  EXPECT_EQ(fused[0].doc_id, "x");
  EXPECT_DOUBLE_EQ(fused[0].score, 1.0);
  // a: ranks (4, 2) and b: ranks (2, 3) -> 1/8 vs 1/6
  EXPECT_EQ(fused[1].doc_id, "b");
  EXPECT_EQ(fused[2].doc_id, "a");
  EXPECT_EQ(fused[2].rank, 3u);

  vsir::Run tie_a{{"q", {entry("p", 1), entry("m", 2), entry("z", 4)}}};
  vsir::Run tie_b{{"q", {entry("z", 1), entry("m", 2), entry("p", 4)}}};
  // p and z: ranks (1,4) and (4,1); m: (2,2). All score 0.25; ids decide.
  const auto tied = loglinear::reciprocal_rank_ensemble(tie_a, tie_b).at("q");
  ASSERT_EQ(tied.size(), 3u);
  EXPECT_EQ(tied[0].doc_id, "m");
  EXPECT_EQ(tied[1].doc_id, "p");
  EXPECT_EQ(tied[2].doc_id, "z");

  vsir::Run other{{"r", {}}};
  EXPECT_THROW(loglinear::reciprocal_rank_ensemble(a, other), FormatError);
}

TEST(ReciprocalRankEnsemble, MatchesExhaustiveOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    auto pick = [&](std::size_t n) {
      std::vector<std::string> pool{"a", "b", "c", "d", "e", "f"};
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(n);
      return pool;
    };
    const auto la = pick(1 + rng() % 6);
    const auto lb = pick(1 + rng() % 6);
    vsir::Run a, b;
    for (std::size_t i = 0; i < la.size(); ++i) a["q"].push_back({"q", la[i], i + 1, 0.0});
    for (std::size_t i = 0; i < lb.size(); ++i) b["q"].push_back({"q", lb[i], i + 1, 0.0});
    const auto expected = oracle::rr_fusion(la, lb);
    const auto got = loglinear::reciprocal_rank_ensemble(a, b).at("q");
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].doc_id, expected[i].first);
      EXPECT_NEAR(got[i].score, expected[i].second, 1e-9);
      EXPECT_EQ(got[i].rank, i + 1);
    }
  }
}
