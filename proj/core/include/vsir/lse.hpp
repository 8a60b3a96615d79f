#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsir/corpus.hpp"
#include "vsir/nce.hpp"
#include "vsir/params.hpp"
#include "vsir/ranking.hpp"

/// Latent Semantic Entities: h(s) = tanh(W * mean_j word_emb[s_j] + b), with
/// entities ranked by cosine similarity between their row of entity_emb and
/// h(query).
namespace vsir::lse {

ModelParams init_params(std::size_t vocab_size, std::size_t num_entities, std::size_t kw,
                        std::size_t kd, Rng& rng);

template <typename T>
std::vector<double> project(std::span<const TokenId> tokens, const BasicModelParams<T>& params);

/// log P(S|pos) + sum_k log(1 - P(S|neg_k)), without NVSM's (z+1)/(2z) factor.
template <typename T>
double instance_log_prob(std::size_t pos_entity, std::span<const std::size_t> neg_entities,
                         std::span<const double> proj, const BasicMatrix<T>& entity_emb);

/// -(1/m) sum log p + (lambda/2m)(|word_emb|^2 + |entity_emb|^2 + |transform|^2).
/// The bias is not regularized.
template <typename T>
LossAndGrad<T> batch_loss(const Batch& batch, const BasicModelParams<T>& params,
                          const Negatives& negatives, double lambda);

LossAndGrad<float> batch_loss(const Batch& batch, const ModelParams& params, std::size_t z,
                              double lambda, Rng& rng);

/// Trains over entity-stratified n-gram batches; the corpus must carry
/// associations.
TrainResult train(const EncodedCorpus& corpus, std::size_t vocab_size, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Entities by descending cosine, ties by ascending index, truncated at cutoff.
std::vector<RankedObject> rank_entities(std::span<const TokenId> query, const ModelParams& params,
                                        std::size_t cutoff);

}  // namespace vsir::lse
