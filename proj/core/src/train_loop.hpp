#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "vsir/error.hpp"
#include "vsir/nce.hpp"
#include "vsir/params.hpp"

namespace vsir::detail {

// Shared mini-batch loop: sample -> loss/gradient -> Adam, with per-epoch
// mean loss reporting.
template <typename SampleFn, typename LossFn>
TrainResult run_training(ModelParams params, const TrainConfig& config, std::size_t batches,
                         Rng& rng, SampleFn&& sample, LossFn&& loss,
                         const EpochCallback& on_epoch) {
  AdamState state = AdamState::for_params(params, config.adam);
  TrainResult result;
  result.epoch_losses.reserve(config.epochs);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      Batch batch = sample(rng);
      auto step = loss(batch, params, rng);
      if (!std::isfinite(step.loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b));
      }
      adam_step(params, step.grad, state);
      total += step.loss;
    }
    const double mean = total / static_cast<double>(batches);
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace vsir::detail
