#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsir/corpus.hpp"
#include "vsir/nce.hpp"
#include "vsir/params.hpp"
#include "vsir/ranking.hpp"
#include "vsir/trec.hpp"

/// Log-linear expert model:
///   P(c | w)        = softmax(cand_mat * word_emb[w] + cand_bias)
///   P(c | w_1..w_k) ∝ prod_i P(c | w_i)   (evaluated in log space)
/// trained with length-weighted cross-entropy against the uniform
/// distribution over each source document's associated candidates.
namespace vsir::loglinear {

ModelParams init_params(std::size_t vocab_size, std::size_t num_candidates, std::size_t k, Rng& rng);

template <typename T>
std::vector<double> word_posterior(TokenId word, const BasicModelParams<T>& params);

/// Normalized product of per-word posteriors. Throws OutOfVocabularyQueryError
/// for an empty id list.
template <typename T>
std::vector<double> query_posterior(std::span<const TokenId> words, const BasicModelParams<T>& params);

/// Uniform over `candidates`, zero elsewhere.
std::vector<double> target_distribution(std::span<const std::size_t> candidates,
                                        std::size_t num_candidates);

/// Per-document candidate sets and |d_max| / |d| weights, fixed before training.
struct TrainingTargets {
  std::vector<std::vector<std::size_t>> doc_candidates;
  std::vector<double> length_weight;  // 0 for empty documents
  std::size_t num_candidates = 0;

  static TrainingTargets from_corpus(const EncodedCorpus& corpus);
};

/// (1/m) sum_i w_i H(p_i, p~_i) + (lambda/2m)(|word_emb|^2 + |cand_mat|^2).
/// Batch targets are source document indices; a document without candidates
/// is an error.
template <typename T>
LossAndGrad<T> batch_loss(const Batch& batch, const BasicModelParams<T>& params,
                          const TrainingTargets& targets, double lambda);

/// Samples n-grams only from documents with at least one candidate.
TrainResult train(const EncodedCorpus& corpus, std::size_t vocab_size, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Candidates by descending query posterior, ties by ascending index.
std::vector<RankedObject> rank_candidates(std::span<const TokenId> query, const ModelParams& params,
                                          std::size_t cutoff);

/// -(1/log|C|) sum p log p, with 0 log 0 = 0. Needs |C| >= 2 and a
/// distribution summing to 1 within 1e-6.
double normalized_entropy(std::span<const double> distribution);

/// Fuses two runs by the product of reciprocal ranks. Candidates missing from
/// one run take rank (universe size + 1); ties go to the smaller doc id.
Run reciprocal_rank_ensemble(const Run& a, const Run& b);

}  // namespace vsir::loglinear
