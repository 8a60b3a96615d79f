#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vsir/trec.hpp"

namespace vsir {

/// Judgments for one query: doc id -> grade. Grade > 0 is relevant; unjudged
/// documents are non-relevant.
using Judgments = std::map<std::string, int>;

// Single-query metrics. `ranking` is in rank order; repeated doc ids after
// their first occurrence are ignored. All require at least one relevant
// judgment and throw std::invalid_argument otherwise.

double average_precision(const std::vector<RunEntry>& ranking, const Judgments& judged, std::size_t cutoff = 1000);
/// Gain 2^grade - 1, discount log2(rank + 1), normalized by the ideal DCG@k.
double ndcg_at(const std::vector<RunEntry>& ranking, const Judgments& judged, std::size_t k = 100);
double precision_at(const std::vector<RunEntry>& ranking, const Judgments& judged, std::size_t k);
double reciprocal_rank(const std::vector<RunEntry>& ranking, const Judgments& judged);

enum class MetricKind { map, ndcg, precision, mrr };

struct Metric {
  MetricKind kind;
  std::size_t depth;  // cutoff for map, k for ndcg / precision, unused for mrr

  std::string name() const;
  double evaluate(const std::vector<RunEntry>& ranking, const Judgments& judged) const;
};

/// Parses `map`, `map@K`, `ndcg@K`, `p@K` and `mrr`. Throws ConfigError.
Metric parse_metric(std::string_view text);
std::vector<Metric> parse_metric_list(std::string_view comma_separated);

struct Evaluation {
  std::vector<std::string> metric_names;
  std::map<std::string, std::vector<double>> per_query;  // query id -> value per metric
  std::vector<double> means;
};

/// Evaluates every qrels query with at least one relevant document. Queries
/// absent from the run score 0; qrels queries without relevant documents are
/// skipped with a warning.
Evaluation evaluate_run(const Run& run, const Qrels& qrels, const std::vector<Metric>& metrics);

}  // namespace vsir
