#include "vsir/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vsir/error.hpp"
#include "vsir/vector_ops.hpp"

namespace vsir {

std::vector<RankedObject> top_k(std::span<const double> scores, std::size_t cutoff) {
  std::vector<RankedObject> ranked(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw NumericError("NaN score for object " + std::to_string(i));
    ranked[i] = {i, scores[i]};
  }
  const auto keep = std::min(cutoff, ranked.size());
  const auto by_score = [](const RankedObject& a, const RankedObject& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), by_score);
  ranked.resize(keep);
  return ranked;
}

template <typename T>
std::vector<double> cosine_scores(std::span<const double> query, const BasicMatrix<T>& reps) {
  if (query.size() != reps.cols()) throw std::invalid_argument("query dimension does not match representations");
  const double qn = l2_norm(query);
  if (qn == 0.0) throw ZeroNormError("query representation is the zero vector");
  std::vector<double> scores(reps.rows());
  for (std::size_t r = 0; r < reps.rows(); ++r) {
    const auto row = reps.row(r);
    const double rn = l2_norm(row);
    // An all-zero representation has no direction; it ranks as orthogonal.
    scores[r] = rn == 0.0 ? 0.0 : dot(row, query) / (qn * rn);
  }
  return scores;
}

template std::vector<double> cosine_scores(std::span<const double>, const BasicMatrix<float>&);
template std::vector<double> cosine_scores(std::span<const double>, const BasicMatrix<double>&);

}  // namespace vsir
