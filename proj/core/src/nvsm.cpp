#include "vsir/nvsm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "train_loop.hpp"
#include "vsir/error.hpp"
#include "vsir/vector_ops.hpp"

namespace vsir::nvsm {
namespace {

template <typename T>
void check_layout(const BasicModelParams<T>& params) {
  if (params.kind != ModelKind::nvsm) throw std::invalid_argument("parameters are not an NVSM model");
  const auto& e = params[tensor::kWordEmb];
  const auto& r = params[tensor::kDocEmb];
  const auto& w = params[tensor::kTransform];
  const auto& b = params[tensor::kBeta];
  if (w.rows() != r.cols() || w.cols() != e.cols() || b.rows() != 1 || b.cols() != r.cols()) {
    throw std::invalid_argument("inconsistent NVSM tensor shapes");
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

}  // namespace

ModelParams init_params(std::size_t vocab_size, std::size_t num_docs, std::size_t kw,
                        std::size_t kd, Rng& rng) {
  ModelParams p;
  p.kind = ModelKind::nvsm;
  p.add(std::string(tensor::kWordEmb), glorot_init(vocab_size, kw, rng));
  p.add(std::string(tensor::kDocEmb), glorot_init(num_docs, kd, rng));
  p.add(std::string(tensor::kTransform), glorot_init(kd, kw, rng));
  p.add(std::string(tensor::kBeta), Matrix(1, kd));
  return p;
}

template <typename T>
std::vector<double> compose_average(std::span<const TokenId> ngram, const BasicMatrix<T>& word_emb) {
  if (ngram.empty()) throw std::invalid_argument("cannot average an empty n-gram");
  std::vector<double> avg(word_emb.cols(), 0.0);
  for (TokenId id : ngram) {
    if (id >= word_emb.rows()) throw std::out_of_range("token id " + std::to_string(id) + " out of range");
    add_scaled(avg, 1.0, word_emb.row(id));
  }
  const double inv = 1.0 / static_cast<double>(ngram.size());
  for (auto& v : avg) v *= inv;
  return avg;
}

std::vector<double> l2_normalize(std::span<const double> v) {
  const double norm = l2_norm(v);
  if (norm == 0.0) throw ZeroNormError("cannot normalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x /= norm;
  return out;
}

template <typename T>
std::vector<double> transform(std::span<const double> x, const BasicMatrix<T>& w) {
  if (x.size() != w.cols()) throw std::invalid_argument("transform: vector does not match matrix columns");
  std::vector<double> out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) out[r] = dot(w.row(r), x);
  return out;
}

template <typename T>
std::vector<double> raw_project(std::span<const TokenId> ngram, const BasicModelParams<T>& params) {
  const auto avg = compose_average(ngram, params[tensor::kWordEmb]);
  return transform(std::span<const double>(l2_normalize(avg)), params[tensor::kTransform]);
}

template <typename T>
ProjectedBatch standardize_activate(const MatrixD& raw, std::span<const T> beta) {
  const std::size_t m = raw.rows();
  const std::size_t kd = raw.cols();
  if (m < 2) throw std::invalid_argument("standardization needs a batch of at least 2");
  if (beta.size() != kd) throw std::invalid_argument("beta does not match projection width");

  ProjectedBatch out;
  out.raw = raw;
  out.normalized = MatrixD(m, kd);
  out.standardized = MatrixD(m, kd);
  out.batch_mean.assign(kd, 0.0);
  out.batch_var.assign(kd, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < kd; ++j) out.batch_mean[j] += raw(i, j);
  }
  for (auto& mu : out.batch_mean) mu /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < kd; ++j) {
      const double d = raw(i, j) - out.batch_mean[j];
      out.batch_var[j] += d * d;
    }
  }
  for (auto& v : out.batch_var) v /= static_cast<double>(m);
  for (std::size_t j = 0; j < kd; ++j) {
    const double inv = 1.0 / std::sqrt(out.batch_var[j] + kStdEpsilon);
    for (std::size_t i = 0; i < m; ++i) {
      const double x = (raw(i, j) - out.batch_mean[j]) * inv;
      out.normalized(i, j) = x;
      out.standardized(i, j) = hard_tanh(x + static_cast<double>(beta[j]));
    }
  }
  return out;
}

template <typename T>
double nce_similarity(std::span<const T> doc_rep, std::span<const double> proj) {
  return sigmoid(dot(doc_rep, proj));
}

template <typename T>
double instance_log_prob(std::size_t pos_doc, std::span<const std::size_t> neg_docs,
                         std::span<const double> proj, const BasicMatrix<T>& doc_emb) {
  const std::size_t z = neg_docs.size();
  if (z < 1) throw std::invalid_argument("need at least one negative example");
  const double zd = static_cast<double>(z);
  double acc = zd * log_sigmoid(dot(doc_emb.row(pos_doc), proj));
  for (auto neg : neg_docs) acc += log_sigmoid(-dot(doc_emb.row(neg), proj));
  return (zd + 1.0) / (2.0 * zd) * acc;
}

template <typename T>
LossAndGrad<T> batch_loss(const Batch& batch, const BasicModelParams<T>& params,
                          const Negatives& negatives, double lambda) {
  check_layout(params);
  const auto& word_emb = params[tensor::kWordEmb];
  const auto& doc_emb = params[tensor::kDocEmb];
  const auto& w = params[tensor::kTransform];
  const auto beta = params[tensor::kBeta].row(0);

  const std::size_t m = batch.size();
  const std::size_t n = batch.n;
  const std::size_t kw = word_emb.cols();
  const std::size_t kd = doc_emb.cols();
  const std::size_t z = negatives.z;
  if (m < 2) throw std::invalid_argument("batch must hold at least 2 instances");
  if (z < 1 || negatives.size() != m) throw std::invalid_argument("negatives do not match the batch");
  for (auto t : batch.targets) {
    if (t >= doc_emb.rows()) throw std::out_of_range("batch target out of range");
  }
  for (auto id : negatives.ids) {
    if (id >= doc_emb.rows()) throw std::out_of_range("negative sample out of range");
  }

  // Forward.
  MatrixD unit(m, kw);
  std::vector<double> norms(m);
  MatrixD raw(m, kd);
  for (std::size_t i = 0; i < m; ++i) {
    const auto avg = compose_average(batch.ngram(i), word_emb);
    norms[i] = l2_norm(std::span<const double>(avg));
    if (norms[i] == 0.0) {
      throw ZeroNormError("n-gram " + std::to_string(i) + " averages to the zero vector");
    }
    auto u = unit.row(i);
    for (std::size_t c = 0; c < kw; ++c) u[c] = avg[c] / norms[i];
    auto r = raw.row(i);
    for (std::size_t k = 0; k < kd; ++k) r[k] = dot(w.row(k), std::span<const double>(u));
  }
  const ProjectedBatch proj = standardize_activate(raw, beta);

  const double zd = static_cast<double>(z);
  const double md = static_cast<double>(m);
  const double weight = (zd + 1.0) / (2.0 * zd);

  MatrixD d_word(word_emb.rows(), kw);
  MatrixD d_doc(doc_emb.rows(), kd);
  MatrixD d_w(kd, kw);
  std::vector<double> d_beta(kd, 0.0);
  MatrixD d_act(m, kd);

  double log_prob_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto t = proj.standardized.row(i);
    auto dt = d_act.row(i);

    const std::size_t pos = batch.targets[i];
    const double pos_dot = dot(doc_emb.row(pos), t);
    double ll = zd * log_sigmoid(pos_dot);
    const double g_pos = -weight * zd / md * (1.0 - sigmoid(pos_dot));
    add_scaled(dt, g_pos, doc_emb.row(pos));
    add_scaled(d_doc.row(pos), g_pos, t);

    for (auto neg : negatives.row(i)) {
      const double neg_dot = dot(doc_emb.row(neg), t);
      ll += log_sigmoid(-neg_dot);
      const double g_neg = weight / md * sigmoid(neg_dot);
      add_scaled(dt, g_neg, doc_emb.row(neg));
      add_scaled(d_doc.row(neg), g_neg, t);
    }
    log_prob_sum += weight * ll;
  }

  const double reg = lambda / (2.0 * md) * (sum_squares(word_emb) + sum_squares(doc_emb) + sum_squares(w));
  LossAndGrad<T> out;
  out.loss = -log_prob_sum / md + reg;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite NVSM batch loss");

  // Hard-tanh: gradient passes only through the linear region.
  out.activation_pattern.resize(m * kd);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < kd; ++j) {
      const double pre = proj.normalized(i, j) + static_cast<double>(beta[j]);
      std::int8_t region = pre <= -1.0 ? -1 : (pre >= 1.0 ? 1 : 0);
      out.activation_pattern[i * kd + j] = region;
      if (region != 0) d_act(i, j) = 0.0;
      d_beta[j] += d_act(i, j);
    }
  }

  // Standardization with batch statistics:
  // d_raw = inv_std * (g - mean(g) - x_hat * mean(g * x_hat)).
  MatrixD d_raw(m, kd);
  for (std::size_t j = 0; j < kd; ++j) {
    const double inv = 1.0 / std::sqrt(proj.batch_var[j] + kStdEpsilon);
    double mean_g = 0.0;
    double mean_gx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      mean_g += d_act(i, j);
      mean_gx += d_act(i, j) * proj.normalized(i, j);
    }
    mean_g /= md;
    mean_gx /= md;
    for (std::size_t i = 0; i < m; ++i) {
      d_raw(i, j) = inv * (d_act(i, j) - mean_g - proj.normalized(i, j) * mean_gx);
    }
  }

  // Linear map, L2 normalization and averaging.
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> du(kw);
  for (std::size_t i = 0; i < m; ++i) {
    const auto u = unit.row(i);
    const auto dr = d_raw.row(i);
    std::fill(du.begin(), du.end(), 0.0);
    for (std::size_t k = 0; k < kd; ++k) {
      add_scaled(d_w.row(k), dr[k], u);
      add_scaled(std::span<double>(du), dr[k], w.row(k));
    }
    const double proj_u = dot(std::span<const double>(du), u);
    for (std::size_t c = 0; c < kw; ++c) du[c] = (du[c] - u[c] * proj_u) / norms[i];
    for (TokenId id : batch.ngram(i)) add_scaled(d_word.row(id), inv_n, std::span<const double>(du));
  }

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
  finish(d_doc, doc_emb, out.grad[tensor::kDocEmb], true);
  finish(d_w, w, out.grad[tensor::kTransform], true);
  finish(MatrixD(1, kd, d_beta), params[tensor::kBeta], out.grad[tensor::kBeta], false);
  return out;
}

LossAndGrad<float> batch_loss(const Batch& batch, const ModelParams& params, std::size_t z,
                              double lambda, Rng& rng) {
  const auto negs = sample_negatives(batch.size(), z, params[tensor::kDocEmb].rows(), rng);
  return batch_loss(batch, params, negs, lambda);
}

TrainResult train(const EncodedCorpus& corpus, std::size_t vocab_size, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  corpus.validate(vocab_size);
  Rng rng(config.seed);
  auto params = init_params(vocab_size, corpus.num_docs(), config.k_w, config.k_d, rng);
  const DocumentSampler sampler(corpus, config.stride);
  const std::size_t batches = std::max<std::size_t>(1, batches_per_epoch(corpus, config.n, config.m));
  return detail::run_training(
      std::move(params), config, batches, rng,
      [&](Rng& r) { return sampler.sample(config.n, config.m, r); },
      [&](const Batch& b, const ModelParams& p, Rng& r) {
        return batch_loss(b, p, config.z, config.lambda, r);
      },
      on_epoch);
}

std::vector<double> infer_query(std::span<const TokenId> query, const ModelParams& params) {
  if (query.empty()) throw OutOfVocabularyQueryError("query has no in-vocabulary terms");
  check_layout(params);
  const auto avg = compose_average(query, params[tensor::kWordEmb]);
  return transform(std::span<const double>(avg), params[tensor::kTransform]);
}

double score(std::span<const double> query_vec, std::span<const float> doc_rep) {
  return cosine(query_vec, doc_rep);
}

template std::vector<double> compose_average(std::span<const TokenId>, const BasicMatrix<float>&);
template std::vector<double> compose_average(std::span<const TokenId>, const BasicMatrix<double>&);
template std::vector<double> transform(std::span<const double>, const BasicMatrix<float>&);
template std::vector<double> transform(std::span<const double>, const BasicMatrix<double>&);
template std::vector<double> raw_project(std::span<const TokenId>, const BasicModelParams<float>&);
template std::vector<double> raw_project(std::span<const TokenId>, const BasicModelParams<double>&);
template ProjectedBatch standardize_activate(const MatrixD&, std::span<const float>);
template ProjectedBatch standardize_activate(const MatrixD&, std::span<const double>);
template double nce_similarity(std::span<const float>, std::span<const double>);
template double nce_similarity(std::span<const double>, std::span<const double>);
template double instance_log_prob(std::size_t, std::span<const std::size_t>, std::span<const double>,
                                  const BasicMatrix<float>&);
template double instance_log_prob(std::size_t, std::span<const std::size_t>, std::span<const double>,
                                  const BasicMatrix<double>&);
template LossAndGrad<float> batch_loss(const Batch&, const BasicModelParams<float>&, const Negatives&, double);
template LossAndGrad<double> batch_loss(const Batch&, const BasicModelParams<double>&, const Negatives&, double);

}  // namespace vsir::nvsm
