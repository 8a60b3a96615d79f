#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsir/corpus.hpp"
#include "vsir/matrix.hpp"
#include "vsir/nce.hpp"
#include "vsir/params.hpp"

/// Neural Vector Space Model: n-gram/document pairs are pushed together in a
/// learned document feature space.
///
/// Training projection of an n-gram (word ids w_1..w_n):
///   raw   = W * normalize(mean_j word_emb[w_j])
///   T     = hard_tanh((raw - batch_mean) / sqrt(batch_var + eps) + beta)
/// A query is mapped with W * mean_j word_emb[w_j] only; beta, the
/// standardization and hard-tanh exist for training alone.
namespace vsir::nvsm {

inline constexpr double kStdEpsilon = 1e-6;

/// Glorot-initialized word_emb (|V| x kw), doc_emb (|D| x kd) and
/// transform (kd x kw); beta (1 x kd) starts at zero.
ModelParams init_params(std::size_t vocab_size, std::size_t num_docs, std::size_t kw,
                        std::size_t kd, Rng& rng);

/// Arithmetic mean of the selected rows of `word_emb`.
template <typename T>
std::vector<double> compose_average(std::span<const TokenId> ngram, const BasicMatrix<T>& word_emb);

/// v / ||v||; throws ZeroNormError for the zero vector.
std::vector<double> l2_normalize(std::span<const double> v);

/// W * x for a kd x kw matrix W.
template <typename T>
std::vector<double> transform(std::span<const double> x, const BasicMatrix<T>& w);

/// transform(l2_normalize(compose_average(ngram))).
template <typename T>
std::vector<double> raw_project(std::span<const TokenId> ngram, const BasicModelParams<T>& params);

inline double hard_tanh(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

struct ProjectedBatch {
  MatrixD raw;           // m x kd
  MatrixD normalized;    // (raw - mean) / sqrt(var + eps), before beta
  MatrixD standardized;  // hard_tanh(normalized + beta)
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // population variance (divisor m)
};

template <typename T>
ProjectedBatch standardize_activate(const MatrixD& raw, std::span<const T> beta);

/// sigma(doc_rep . proj)
template <typename T>
double nce_similarity(std::span<const T> doc_rep, std::span<const double> proj);

/// ((z+1)/(2z)) * (z log P(S|pos) + sum_k log(1 - P(S|neg_k)))
template <typename T>
double instance_log_prob(std::size_t pos_doc, std::span<const std::size_t> neg_docs,
                         std::span<const double> proj, const BasicMatrix<T>& doc_emb);

/// Negated batch mean of instance_log_prob plus
/// (lambda / 2m)(|word_emb|^2 + |doc_emb|^2 + |transform|^2), with gradients
/// for all four tensors. Batch statistics are differentiated through.
template <typename T>
LossAndGrad<T> batch_loss(const Batch& batch, const BasicModelParams<T>& params,
                          const Negatives& negatives, double lambda);

/// Samples z uniform negatives per instance, then evaluates batch_loss.
LossAndGrad<float> batch_loss(const Batch& batch, const ModelParams& params, std::size_t z,
                              double lambda, Rng& rng);

/// epochs x batches_per_epoch steps of sample -> loss -> Adam. Deterministic
/// for a given corpus and config.
TrainResult train(const EncodedCorpus& corpus, std::size_t vocab_size, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// h(q) = W * mean_j word_emb[q_j]. Throws OutOfVocabularyQueryError for an
/// empty id list.
std::vector<double> infer_query(std::span<const TokenId> query, const ModelParams& params);

/// Cosine similarity; throws ZeroNormError on a zero vector.
double score(std::span<const double> query_vec, std::span<const float> doc_rep);

}  // namespace vsir::nvsm
