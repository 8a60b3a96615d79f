#include "vsir/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "vsir/error.hpp"
#include "vsir/log.hpp"
#include "vsir/loglinear.hpp"
#include "vsir/lse.hpp"
#include "vsir/nvsm.hpp"
#include "vsir/ranking.hpp"

namespace vsir {
namespace {

// Indices into `scores` ordered by descending score, then ascending id.
std::vector<std::size_t> order_by_score(std::span<const double> scores, std::span<const std::string> ids,
                                        std::size_t cutoff) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const auto keep = std::min(cutoff, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return ids[a] < ids[b];
                    });
  order.resize(keep);
  return order;
}

}  // namespace

std::vector<double> score_objects(std::span<const TokenId> query, const ModelParams& params) {
  if (query.empty()) throw OutOfVocabularyQueryError("query has no in-vocabulary terms");
  switch (params.kind) {
    case ModelKind::nvsm: {
      const auto h = nvsm::infer_query(query, params);
      return cosine_scores(std::span<const double>(h), params[tensor::kDocEmb]);
    }
    case ModelKind::lse: {
      const auto h = lse::project(query, params);
      return cosine_scores(std::span<const double>(h), params[tensor::kEntityEmb]);
    }
    case ModelKind::loglinear:
      return loglinear::query_posterior(query, params);
  }
  throw std::invalid_argument("unknown model kind");
}

std::vector<RunEntry> rank_scores(std::span<const double> scores, std::span<const std::string> object_ids,
                                  const std::string& query_id, std::size_t cutoff) {
  if (scores.size() != object_ids.size()) throw std::invalid_argument("one score per object id required");
  for (double s : scores) {
    if (std::isnan(s)) throw NumericError("NaN score for query " + query_id);
  }
  const auto order = order_by_score(scores, object_ids, cutoff);
  std::vector<RunEntry> run;
  run.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    run.push_back({query_id, object_ids[order[r]], r + 1, scores[order[r]]});
  }
  return run;
}

std::vector<RunEntry> rank_documents(const ModelParams& params, std::span<const std::string> object_ids,
                                     std::span<const TokenId> query, const std::string& query_id,
                                     std::size_t cutoff) {
  if (query.empty()) {
    warn("query " + query_id + " has no in-vocabulary terms; no results");
    return {};
  }
  const auto scores = score_objects(query, params);
  return rank_scores(scores, object_ids, query_id, cutoff);
}

std::vector<RunEntry> fuse_standardized(std::span<const std::vector<double>> model_scores,
                                        std::span<const std::string> object_ids, const std::string& query_id,
                                        std::size_t cutoff, EnsembleStats* stats) {
  if (model_scores.empty()) throw std::invalid_argument("ensemble needs at least one model");
  const std::size_t n_objects = object_ids.size();
  EnsembleStats local;
  std::set<std::size_t> pool;
  for (const auto& scores : model_scores) {
    if (scores.size() != n_objects) throw std::invalid_argument("one score per object id required");
    const auto top = order_by_score(scores, object_ids, cutoff);
    pool.insert(top.begin(), top.end());
    double mean = 0.0;
    for (auto i : top) mean += scores[i];
    mean /= static_cast<double>(std::max<std::size_t>(top.size(), 1));
    double ss = 0.0;
    for (auto i : top) ss += (scores[i] - mean) * (scores[i] - mean);
    const double sd = top.size() < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(top.size() - 1));
    local.mean.push_back(mean);
    local.stddev.push_back(sd);
  }

  std::vector<std::string> pooled_ids;
  std::vector<double> pooled_scores;
  for (auto i : pool) {
    double s = 0.0;
    for (std::size_t k = 0; k < model_scores.size(); ++k) {
      if (local.stddev[k] > 0.0) s += (model_scores[k][i] - local.mean[k]) / local.stddev[k];
    }
    pooled_ids.push_back(object_ids[i]);
    pooled_scores.push_back(s);
  }
  if (stats != nullptr) *stats = std::move(local);
  return rank_scores(pooled_scores, pooled_ids, query_id, cutoff);
}

std::vector<RunEntry> ensemble_rank(std::span<const ModelParams> models, std::span<const std::string> object_ids,
                                    std::span<const TokenId> query, const std::string& query_id,
                                    std::size_t cutoff, EnsembleStats* stats) {
  if (models.empty()) throw std::invalid_argument("ensemble needs at least one model");
  if (query.empty()) {
    warn("query " + query_id + " has no in-vocabulary terms; no results");
    return {};
  }
  std::vector<std::vector<double>> scores;
  scores.reserve(models.size());
  for (const auto& m : models) scores.push_back(score_objects(query, m));
  return fuse_standardized(scores, object_ids, query_id, cutoff, stats);
}

}  // namespace vsir
