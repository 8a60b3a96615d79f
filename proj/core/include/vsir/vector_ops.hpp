#pragma once

#include <cmath>
#include <cstddef>
#include <iterator>
#include <stdexcept>

#include "vsir/error.hpp"

namespace vsir {

// The helpers accept any contiguous range of arithmetic values (spans,
// vectors, matrix rows) and accumulate in double.

template <typename A, typename B>
double dot(const A& a, const B& b) {
  double acc = 0.0;
  const std::size_t n = std::size(a);
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

template <typename A>
double l2_norm(const A& a) {
  return std::sqrt(dot(a, a));
}

/// Cosine similarity; throws ZeroNormError if either vector is zero.
template <typename A, typename B>
double cosine(const A& a, const B& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine of vectors of different length");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw ZeroNormError("cosine similarity of a zero vector");
  return dot(a, b) / (na * nb);
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow or cancellation.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace vsir
