#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsir/matrix.hpp"

namespace vsir {

struct RankedObject {
  std::size_t index;
  double score;

  friend bool operator==(const RankedObject&, const RankedObject&) = default;
};

/// Sorts by descending score, ties by ascending index, and keeps `cutoff`.
std::vector<RankedObject> top_k(std::span<const double> scores, std::size_t cutoff);

/// Exhaustive cosine similarity of `query` against every row of `reps`.
template <typename T>
std::vector<double> cosine_scores(std::span<const double> query, const BasicMatrix<T>& reps);

}  // namespace vsir
