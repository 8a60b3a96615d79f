#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vsir/corpus.hpp"
#include "vsir/matrix.hpp"
#include "vsir/params.hpp"

namespace vsir {

/// z negative object indices per batch instance, row-major m x z.
struct Negatives {
  std::size_t z = 0;
  std::vector<std::size_t> ids;

  std::size_t size() const noexcept { return z == 0 ? 0 : ids.size() / z; }
  std::span<const std::size_t> row(std::size_t i) const { return {ids.data() + i * z, z}; }
};

/// Uniform with replacement over [0, num_objects); may collide with the positive.
Negatives sample_negatives(std::size_t m, std::size_t z, std::size_t num_objects, Rng& rng);

/// Loss value and gradient w.r.t. every tensor of the parameters.
template <typename T>
struct LossAndGrad {
  double loss = 0.0;
  BasicModelParams<T> grad;
  // Hard-tanh region per activation (-1 saturated low, 0 linear, +1 saturated
  // high). Empty for models without piecewise-linear activations.
  std::vector<std::int8_t> activation_pattern;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_losses;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

}  // namespace vsir
