#pragma once

// Test-only reference implementations. Everything here is written
// independently of the library code it checks: plain loops, full sorts and
// textbook formulas, with no shared helpers.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vsir/nce.hpp"
#include "vsir/params.hpp"
#include "vsir/trec.hpp"

namespace oracle {

// ---- gradients ------------------------------------------------------------

using LossFn = std::function<vsir::LossAndGrad<double>(const vsir::ModelParamsD&)>;

struct GradCheck {
  std::map<std::string, double> rel_error;  // per tensor
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates whose perturbation crossed a hard-tanh kink
};

/// Central differences of `loss` in every coordinate, compared with the
/// analytic gradient at `params`. Per tensor the error is
/// max|analytic - numeric| / max(max|numeric|, max|analytic|, 1e-12).
GradCheck check_gradients(const vsir::ModelParamsD& params, const LossFn& loss, double h = 1e-3);

// ---- formulas ---------------------------------------------------------------

double naive_dot(const std::vector<double>& a, const std::vector<double>& b);
double naive_sigmoid(double x);

/// ((z+1)/(2z)) (z log s(pos.h) + sum log(1 - s(neg.h)))
double nvsm_log_prob(const std::vector<double>& pos, const std::vector<std::vector<double>>& negs,
                     const std::vector<double>& proj);
/// log s(pos.h) + sum log(1 - s(neg.h))
double lse_log_prob(const std::vector<double>& pos, const std::vector<std::vector<double>>& negs,
                    const std::vector<double>& proj);

double normalized_entropy(const std::vector<double>& p);

/// Product-of-reciprocal-ranks fusion over the union of two ranked lists.
std::vector<std::pair<std::string, double>> rr_fusion(const std::vector<std::string>& a,
                                                      const std::vector<std::string>& b);

/// Sum of standardized scores over the union of per-model top-`cutoff` pools.
std::vector<std::pair<std::string, double>> standardized_sum(const std::vector<std::vector<double>>& scores,
                                                             const std::vector<std::string>& ids,
                                                             std::size_t cutoff);

// ---- ranking ----------------------------------------------------------------

/// Cosine of `query` against each row, then a full sort by (-score, id).
std::vector<std::pair<std::string, double>> exhaustive_rank(const std::vector<double>& query,
                                                            const std::vector<std::vector<double>>& rows,
                                                            const std::vector<std::string>& ids);

// ---- metrics ----------------------------------------------------------------

struct Metrics {
  double ap = 0.0;
  double ndcg = 0.0;
  double precision = 0.0;
  double rr = 0.0;
};

/// `ranked` lists distinct doc ids in rank order; `grades` holds judged docs.
Metrics brute_metrics(const std::vector<std::string>& ranked, const std::map<std::string, int>& grades,
                      std::size_t ndcg_k, std::size_t precision_k);

}  // namespace oracle
