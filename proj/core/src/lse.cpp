#include "vsir/lse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "train_loop.hpp"
#include "vsir/error.hpp"
#include "vsir/vector_ops.hpp"

namespace vsir::lse {
namespace {

template <typename T>
void check_layout(const BasicModelParams<T>& params) {
  if (params.kind != ModelKind::lse) throw std::invalid_argument("parameters are not an LSE model");
  const auto& e = params[tensor::kWordEmb];
  const auto& x = params[tensor::kEntityEmb];
  const auto& w = params[tensor::kTransform];
  const auto& b = params[tensor::kBias];
  if (w.rows() != x.cols() || w.cols() != e.cols() || b.rows() != 1 || b.cols() != x.cols()) {
    throw std::invalid_argument("inconsistent LSE tensor shapes");
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

template <typename T>
std::vector<double> mean_embedding(std::span<const TokenId> tokens, const BasicMatrix<T>& word_emb) {
  if (tokens.empty()) throw std::invalid_argument("cannot project an empty token sequence");
  std::vector<double> avg(word_emb.cols(), 0.0);
  for (TokenId id : tokens) {
    if (id >= word_emb.rows()) throw std::out_of_range("token id " + std::to_string(id) + " out of range");
    add_scaled(avg, 1.0, word_emb.row(id));
  }
  for (auto& v : avg) v /= static_cast<double>(tokens.size());
  return avg;
}

}  // namespace

ModelParams init_params(std::size_t vocab_size, std::size_t num_entities, std::size_t kw,
                        std::size_t kd, Rng& rng) {
  ModelParams p;
  p.kind = ModelKind::lse;
  p.add(std::string(tensor::kWordEmb), glorot_init(vocab_size, kw, rng));
  p.add(std::string(tensor::kEntityEmb), glorot_init(num_entities, kd, rng));
  p.add(std::string(tensor::kTransform), glorot_init(kd, kw, rng));
  p.add(std::string(tensor::kBias), Matrix(1, kd));
  return p;
}

template <typename T>
std::vector<double> project(std::span<const TokenId> tokens, const BasicModelParams<T>& params) {
  check_layout(params);
  const auto avg = mean_embedding(tokens, params[tensor::kWordEmb]);
  const auto& w = params[tensor::kTransform];
  const auto b = params[tensor::kBias].row(0);
  std::vector<double> out(w.rows());
  for (std::size_t k = 0; k < w.rows(); ++k) {
    out[k] = std::tanh(dot(w.row(k), avg) + static_cast<double>(b[k]));
  }
  return out;
}

template <typename T>
double instance_log_prob(std::size_t pos_entity, std::span<const std::size_t> neg_entities,
                         std::span<const double> proj, const BasicMatrix<T>& entity_emb) {
  if (neg_entities.empty()) throw std::invalid_argument("need at least one negative example");
  double acc = log_sigmoid(dot(entity_emb.row(pos_entity), proj));
  for (auto neg : neg_entities) acc += log_sigmoid(-dot(entity_emb.row(neg), proj));
  return acc;
}

template <typename T>
LossAndGrad<T> batch_loss(const Batch& batch, const BasicModelParams<T>& params,
                          const Negatives& negatives, double lambda) {
  check_layout(params);
  const auto& word_emb = params[tensor::kWordEmb];
  const auto& entity_emb = params[tensor::kEntityEmb];
  const auto& w = params[tensor::kTransform];
  const auto b = params[tensor::kBias].row(0);

  const std::size_t m = batch.size();
  const std::size_t kw = word_emb.cols();
  const std::size_t kd = entity_emb.cols();
  if (m < 1) throw std::invalid_argument("empty batch");
  if (negatives.z < 1 || negatives.size() != m) throw std::invalid_argument("negatives do not match the batch");
  for (auto t : batch.targets) {
    if (t >= entity_emb.rows()) throw std::out_of_range("batch target out of range");
  }
  for (auto id : negatives.ids) {
    if (id >= entity_emb.rows()) throw std::out_of_range("negative sample out of range");
  }

  const double md = static_cast<double>(m);
  const double inv_n = 1.0 / static_cast<double>(batch.n);

  MatrixD d_word(word_emb.rows(), kw);
  MatrixD d_entity(entity_emb.rows(), kd);
  MatrixD d_w(kd, kw);
  std::vector<double> d_b(kd, 0.0);

  std::vector<double> h(kd);
  std::vector<double> dh(kd);
  std::vector<double> da(kw);
  double log_prob_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto avg = mean_embedding(batch.ngram(i), word_emb);
    for (std::size_t k = 0; k < kd; ++k) h[k] = std::tanh(dot(w.row(k), avg) + static_cast<double>(b[k]));

    std::fill(dh.begin(), dh.end(), 0.0);
    const std::size_t pos = batch.targets[i];
    const double pos_dot = dot(entity_emb.row(pos), h);
    double ll = log_sigmoid(pos_dot);
    const double g_pos = -(1.0 - sigmoid(pos_dot)) / md;
    add_scaled(dh, g_pos, entity_emb.row(pos));
    add_scaled(d_entity.row(pos), g_pos, h);
    for (auto neg : negatives.row(i)) {
      const double neg_dot = dot(entity_emb.row(neg), h);
      ll += log_sigmoid(-neg_dot);
      const double g_neg = sigmoid(neg_dot) / md;
      add_scaled(dh, g_neg, entity_emb.row(neg));
      add_scaled(d_entity.row(neg), g_neg, h);
    }
    log_prob_sum += ll;

    // Through tanh, the affine map and the mean.
    std::fill(da.begin(), da.end(), 0.0);
    for (std::size_t k = 0; k < kd; ++k) {
      const double dpre = dh[k] * (1.0 - h[k] * h[k]);
      d_b[k] += dpre;
      add_scaled(d_w.row(k), dpre, avg);
      add_scaled(da, dpre, w.row(k));
    }
    for (TokenId id : batch.ngram(i)) add_scaled(d_word.row(id), inv_n, da);
  }

  const double reg = lambda / (2.0 * md) * (sum_squares(word_emb) + sum_squares(entity_emb) + sum_squares(w));
  LossAndGrad<T> out;
  out.loss = -log_prob_sum / md + reg;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite LSE batch loss");

  const double decay = lambda / md;
  out.grad = params.zeros_like();
  auto finish = [decay](const MatrixD& data_grad, const BasicMatrix<T>& theta, BasicMatrix<T>& dst, bool decayed) {
    auto g = data_grad.data();
    auto th = theta.data();
    auto d = dst.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = static_cast<T>(g[i] + (decayed ? decay * static_cast<double>(th[i]) : 0.0));
    }
  };
  finish(d_word, word_emb, out.grad[tensor::kWordEmb], true);
  finish(d_entity, entity_emb, out.grad[tensor::kEntityEmb], true);
  finish(d_w, w, out.grad[tensor::kTransform], true);
  finish(MatrixD(1, kd, d_b), params[tensor::kBias], out.grad[tensor::kBias], false);
  return out;
}

LossAndGrad<float> batch_loss(const Batch& batch, const ModelParams& params, std::size_t z,
                              double lambda, Rng& rng) {
  const auto negs = sample_negatives(batch.size(), z, params[tensor::kEntityEmb].rows(), rng);
  return batch_loss(batch, params, negs, lambda);
}

TrainResult train(const EncodedCorpus& corpus, std::size_t vocab_size, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  corpus.validate(vocab_size);
  if (!corpus.has_associations()) throw ConfigError("LSE training needs entity associations");
  Rng rng(config.seed);
  auto params = init_params(vocab_size, corpus.num_objects(), config.k_w, config.k_d, rng);
  const EntitySampler sampler(corpus, config.stride);
  const std::size_t per_epoch = ngrams_per_entity(corpus, config.n) * corpus.num_objects();
  const std::size_t batches = std::max<std::size_t>(1, (per_epoch + config.m - 1) / config.m);
  return detail::run_training(
      std::move(params), config, batches, rng,
      [&](Rng& r) { return sampler.sample(config.n, config.m, r); },
      [&](const Batch& batch, const ModelParams& p, Rng& r) {
        return batch_loss(batch, p, config.z, config.lambda, r);
      },
      on_epoch);
}

std::vector<RankedObject> rank_entities(std::span<const TokenId> query, const ModelParams& params,
                                        std::size_t cutoff) {
  if (query.empty()) throw OutOfVocabularyQueryError("query has no in-vocabulary terms");
  const auto h = project(query, params);
  const auto scores = cosine_scores(std::span<const double>(h), params[tensor::kEntityEmb]);
  return top_k(scores, cutoff);
}

template std::vector<double> project(std::span<const TokenId>, const BasicModelParams<float>&);
template std::vector<double> project(std::span<const TokenId>, const BasicModelParams<double>&);
template double instance_log_prob(std::size_t, std::span<const std::size_t>, std::span<const double>,
                                  const BasicMatrix<float>&);
template double instance_log_prob(std::size_t, std::span<const std::size_t>, std::span<const double>,
                                  const BasicMatrix<double>&);
template LossAndGrad<float> batch_loss(const Batch&, const BasicModelParams<float>&, const Negatives&, double);
template LossAndGrad<double> batch_loss(const Batch&, const BasicModelParams<double>&, const Negatives&, double);

}  // namespace vsir::lse
