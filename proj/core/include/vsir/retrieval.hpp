#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vsir/corpus.hpp"
#include "vsir/params.hpp"
#include "vsir/trec.hpp"

namespace vsir {

/// Query/object similarity for every object of a trained model:
/// NVSM and LSE use cosine against doc_emb / entity_emb, the log-linear
/// model uses the query posterior. `query` must be non-empty.
std::vector<double> score_objects(std::span<const TokenId> query, const ModelParams& params);

/// Sorts by descending score with ties by ascending object id and keeps the
/// first `cutoff` as ranks 1..cutoff.
std::vector<RunEntry> rank_scores(std::span<const double> scores, std::span<const std::string> object_ids,
                                  const std::string& query_id, std::size_t cutoff);

/// Exhaustive ranking of all objects. An empty (all out-of-vocabulary) query
/// yields an empty list and a warning.
std::vector<RunEntry> rank_documents(const ModelParams& params, std::span<const std::string> object_ids,
                                     std::span<const TokenId> query, const std::string& query_id,
                                     std::size_t cutoff = 1000);

struct EnsembleStats {
  std::vector<double> mean;    // per model, over its own top-cutoff pool
  std::vector<double> stddev;  // sample standard deviation (divisor n - 1)
};

/// Sum of per-model standardized scores over the union of the per-model
/// top-cutoff pools. Every model scores every pooled document; a model with
/// zero spread contributes 0.
std::vector<RunEntry> ensemble_rank(std::span<const ModelParams> models, std::span<const std::string> object_ids,
                                    std::span<const TokenId> query, const std::string& query_id,
                                    std::size_t cutoff = 1000, EnsembleStats* stats = nullptr);

/// The fusion step of ensemble_rank on precomputed per-model score vectors.
std::vector<RunEntry> fuse_standardized(std::span<const std::vector<double>> model_scores,
                                        std::span<const std::string> object_ids, const std::string& query_id,
                                        std::size_t cutoff, EnsembleStats* stats = nullptr);

}  // namespace vsir
