#include "vsir/loglinear.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "train_loop.hpp"
#include "vsir/error.hpp"
#include "vsir/vector_ops.hpp"

namespace vsir::loglinear {
namespace {

template <typename T>
void check_layout(const BasicModelParams<T>& params) {
  if (params.kind != ModelKind::loglinear) {
    throw std::invalid_argument("parameters are not a log-linear model");
  }
  const auto& e = params[tensor::kWordEmb];
  const auto& c = params[tensor::kCandMat];
  const auto& b = params[tensor::kCandBias];
  if (c.cols() != e.cols() || b.rows() != 1 || b.cols() != c.rows()) {
    throw std::invalid_argument("inconsistent log-linear tensor shapes");
  }
}

template <typename Src>
void add_scaled(std::span<double> dst, double scale, const Src& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * static_cast<double>(src[i]);
}

template <typename T>
double sum_squares(const BasicMatrix<T>& m) {
  double acc = 0.0;
  for (T v : m.data()) acc += static_cast<double>(v) * static_cast<double>(v);
  return acc;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

// log P(c | w) for every candidate c.
template <typename T>
std::vector<double> word_log_posterior(TokenId word, const BasicModelParams<T>& params) {
  const auto& e = params[tensor::kWordEmb];
  const auto& c = params[tensor::kCandMat];
  const auto b = params[tensor::kCandBias].row(0);
  if (word >= e.rows()) throw std::out_of_range("token id " + std::to_string(word) + " out of range");
  const auto emb = e.row(word);
  std::vector<double> logits(c.rows());
  for (std::size_t j = 0; j < c.rows(); ++j) logits[j] = dot(c.row(j), emb) + static_cast<double>(b[j]);
  const double lse = log_sum_exp(logits);
  for (auto& v : logits) v -= lse;
  return logits;
}

// Unnormalized log posterior sum_i log P(c | w_i), then normalized in log space.
template <typename T>
std::vector<double> query_log_posterior(std::span<const TokenId> words, const BasicModelParams<T>& params) {
  const std::size_t nc = params[tensor::kCandMat].rows();
  std::vector<double> s(nc, 0.0);
  for (TokenId w : words) add_scaled(s, 1.0, word_log_posterior(w, params));
  const double lse = log_sum_exp(s);
  for (auto& v : s) v -= lse;
  return s;
}

std::vector<double> exp_all(std::vector<double> v) {
  for (auto& x : v) x = std::exp(x);
  return v;
}

}  // namespace

ModelParams init_params(std::size_t vocab_size, std::size_t num_candidates, std::size_t k, Rng& rng) {
  ModelParams p;
  p.kind = ModelKind::loglinear;
  p.add(std::string(tensor::kWordEmb), glorot_init(vocab_size, k, rng));
  p.add(std::string(tensor::kCandMat), glorot_init(num_candidates, k, rng));
  p.add(std::string(tensor::kCandBias), Matrix(1, num_candidates));
  return p;
}

template <typename T>
std::vector<double> word_posterior(TokenId word, const BasicModelParams<T>& params) {
  check_layout(params);
  return exp_all(word_log_posterior(word, params));
}

template <typename T>
std::vector<double> query_posterior(std::span<const TokenId> words, const BasicModelParams<T>& params) {
  if (words.empty()) throw OutOfVocabularyQueryError("query has no in-vocabulary terms");
  check_layout(params);
  return exp_all(query_log_posterior(words, params));
}

std::vector<double> target_distribution(std::span<const std::size_t> candidates,
                                        std::size_t num_candidates) {
  if (candidates.empty()) throw std::invalid_argument("document has no associated candidates");
  std::vector<double> p(num_candidates, 0.0);
  const std::set<std::size_t> unique(candidates.begin(), candidates.end());
  for (auto c : unique) {
    if (c >= num_candidates) throw std::out_of_range("candidate index out of range");
    p[c] = 1.0 / static_cast<double>(unique.size());
  }
  return p;
}

TrainingTargets TrainingTargets::from_corpus(const EncodedCorpus& corpus) {
  TrainingTargets t;
  t.doc_candidates = corpus.doc_objects();
  t.num_candidates = corpus.num_objects();
  const double longest = static_cast<double>(corpus.max_doc_length());
  t.length_weight.resize(corpus.num_docs());
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto len = corpus.docs[d].size();
    t.length_weight[d] = len == 0 ? 0.0 : longest / static_cast<double>(len);
  }
  return t;
}

template <typename T>
LossAndGrad<T> batch_loss(const Batch& batch, const BasicModelParams<T>& params,
                          const TrainingTargets& targets, double lambda) {
  check_layout(params);
  const auto& word_emb = params[tensor::kWordEmb];
  const auto& cand = params[tensor::kCandMat];
  const std::size_t m = batch.size();
  const std::size_t nc = cand.rows();
  const std::size_t k = word_emb.cols();
  if (m < 1) throw std::invalid_argument("empty batch");
  if (targets.num_candidates != nc) throw std::invalid_argument("targets do not match candidate count");

  const double md = static_cast<double>(m);
  MatrixD d_word(word_emb.rows(), k);
  MatrixD d_cand(nc, k);
  std::vector<double> d_bias(nc, 0.0);
  std::vector<double> g(nc);
  std::vector<double> d_logit(nc);
  std::vector<double> d_emb(k);

  double loss_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t doc = batch.targets[i];
    if (doc >= targets.doc_candidates.size()) throw std::out_of_range("batch target out of range");
    if (targets.doc_candidates[doc].empty()) {
      throw std::invalid_argument("n-gram " + std::to_string(i) + " comes from a document without candidates");
    }
    const auto p = target_distribution(targets.doc_candidates[doc], nc);
    const double weight = targets.length_weight[doc];
    const auto ngram = batch.ngram(i);

    std::vector<std::vector<double>> word_log(ngram.size());
    std::vector<double> s(nc, 0.0);
    for (std::size_t j = 0; j < ngram.size(); ++j) {
      word_log[j] = word_log_posterior(ngram[j], params);
      add_scaled(s, 1.0, word_log[j]);
    }
    const double lse = log_sum_exp(s);
    double h = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double log_q = s[c] - lse;
      if (p[c] > 0.0) h -= p[c] * log_q;
      g[c] = weight / md * (std::exp(log_q) - p[c]);  // dL/ds
    }
    loss_sum += weight * h;

    double g_total = 0.0;
    for (double v : g) g_total += v;
    for (std::size_t j = 0; j < ngram.size(); ++j) {
      // s = sum_j log softmax(o_j): dL/do_j = g - (sum g) softmax(o_j).
      for (std::size_t c = 0; c < nc; ++c) d_logit[c] = g[c] - g_total * std::exp(word_log[j][c]);
      const auto emb = word_emb.row(ngram[j]);
      std::fill(d_emb.begin(), d_emb.end(), 0.0);
      for (std::size_t c = 0; c < nc; ++c) {
        d_bias[c] += d_logit[c];
        add_scaled(d_cand.row(c), d_logit[c], emb);
        add_scaled(d_emb, d_logit[c], cand.row(c));
      }
      add_scaled(d_word.row(ngram[j]), 1.0, d_emb);
    }
  }

  const double reg = lambda / (2.0 * md) * (sum_squares(word_emb) + sum_squares(cand));
  LossAndGrad<T> out;
  out.loss = loss_sum / md + reg;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite log-linear batch loss");

  const double decay = lambda / md;
  out.grad = params.zeros_like();
  auto finish = [decay](const MatrixD& data_grad, const BasicMatrix<T>& theta, BasicMatrix<T>& dst, bool decayed) {
    auto gd = data_grad.data();
    auto th = theta.data();
    auto d = dst.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = static_cast<T>(gd[i] + (decayed ? decay * static_cast<double>(th[i]) : 0.0));
    }
  };
  finish(d_word, word_emb, out.grad[tensor::kWordEmb], true);
  finish(d_cand, cand, out.grad[tensor::kCandMat], true);
  finish(MatrixD(1, nc, d_bias), params[tensor::kCandBias], out.grad[tensor::kCandBias], false);
  return out;
}

TrainResult train(const EncodedCorpus& corpus, std::size_t vocab_size, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  corpus.validate(vocab_size);
  if (!corpus.has_associations()) throw ConfigError("log-linear training needs candidate associations");

  const auto targets = TrainingTargets::from_corpus(corpus);
  std::vector<std::size_t> pool;
  std::size_t windows = 0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto len = corpus.docs[d].size();
    if (targets.doc_candidates[d].empty() || len == 0) continue;
    pool.push_back(d);
    if (len >= config.n) {
      windows += config.stride == WindowStride::overlapping ? len - config.n + 1
                                                            : (len - config.n) / config.n + 1;
    }
  }
  if (pool.empty()) throw ConfigError("no non-empty document has an associated candidate");

  Rng rng(config.seed);
  auto params = init_params(vocab_size, corpus.num_objects(), config.k_w, rng);
  const DocumentSampler sampler(corpus, config.stride, pool);
  const std::size_t batches = std::max<std::size_t>(1, (windows + config.m - 1) / config.m);
  return detail::run_training(
      std::move(params), config, batches, rng,
      [&](Rng& r) { return sampler.sample(config.n, config.m, r); },
      [&](const Batch& batch, const ModelParams& p, Rng&) {
        return batch_loss(batch, p, targets, config.lambda);
      },
      on_epoch);
}

std::vector<RankedObject> rank_candidates(std::span<const TokenId> query, const ModelParams& params,
                                          std::size_t cutoff) {
  // Ranking by the log posterior equals ranking by the posterior and keeps
  // distinct scores apart after exp() would underflow.
  if (query.empty()) throw OutOfVocabularyQueryError("query has no in-vocabulary terms");
  check_layout(params);
  const auto log_post = query_log_posterior(query, params);
  auto ranked = top_k(log_post, cutoff);
  for (auto& r : ranked) r.score = std::exp(r.score);
  return ranked;
}

double normalized_entropy(std::span<const double> distribution) {
  if (distribution.size() < 2) throw std::invalid_argument("normalized entropy needs at least 2 candidates");
  double total = 0.0;
  double h = 0.0;
  for (double p : distribution) {
    if (!(p >= 0.0)) throw std::invalid_argument("probabilities must be non-negative");
    total += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("distribution does not sum to 1");
  return h / std::log(static_cast<double>(distribution.size()));
}

Run reciprocal_rank_ensemble(const Run& a, const Run& b) {
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw FormatError("runs to fuse must cover the same query ids");
  }
  Run fused;
  for (const auto& [qid, list_a] : a) {
    const auto& list_b = b.at(qid);
    std::unordered_map<std::string, std::size_t> rank_a;
    std::unordered_map<std::string, std::size_t> rank_b;
    std::set<std::string> universe;
    for (const auto& e : list_a) {
      rank_a.emplace(e.doc_id, e.rank);
      universe.insert(e.doc_id);
    }
    for (const auto& e : list_b) {
      rank_b.emplace(e.doc_id, e.rank);
      universe.insert(e.doc_id);
    }
    const std::size_t missing = universe.size() + 1;
    std::vector<RunEntry> entries;
    entries.reserve(universe.size());
    for (const auto& doc : universe) {
      const auto ra = rank_a.contains(doc) ? rank_a[doc] : missing;
      const auto rb = rank_b.contains(doc) ? rank_b[doc] : missing;
      entries.push_back({qid, doc, 0, 1.0 / (static_cast<double>(ra) * static_cast<double>(rb))});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& x, const RunEntry& y) {
      if (x.score != y.score) return x.score > y.score;
      return x.doc_id < y.doc_id;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
    fused.emplace(qid, std::move(entries));
  }
  return fused;
}

template std::vector<double> word_posterior(TokenId, const BasicModelParams<float>&);
template std::vector<double> word_posterior(TokenId, const BasicModelParams<double>&);
template std::vector<double> query_posterior(std::span<const TokenId>, const BasicModelParams<float>&);
template std::vector<double> query_posterior(std::span<const TokenId>, const BasicModelParams<double>&);
template LossAndGrad<float> batch_loss(const Batch&, const BasicModelParams<float>&, const TrainingTargets&, double);
template LossAndGrad<double> batch_loss(const Batch&, const BasicModelParams<double>&, const TrainingTargets&, double);

}  // namespace vsir::loglinear
