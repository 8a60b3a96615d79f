#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsir/corpus.hpp"
#include "vsir/matrix.hpp"

namespace vsir {

enum class ModelKind { nvsm, lse, loglinear };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Named dense tensors of one model. Tensor order is fixed per kind and is the
/// order used on disk.
template <typename T>
struct BasicModelParams {
  ModelKind kind = ModelKind::nvsm;
  std::vector<std::string> names;
  std::vector<BasicMatrix<T>> tensors;

  std::size_t index_of(std::string_view name) const;
  BasicMatrix<T>& operator[](std::string_view name) { return tensors[index_of(name)]; }
  const BasicMatrix<T>& operator[](std::string_view name) const { return tensors[index_of(name)]; }

  void add(std::string name, BasicMatrix<T> tensor) {
    names.push_back(std::move(name));
    tensors.push_back(std::move(tensor));
  }

  /// Same names and shapes, all zeros.
  BasicModelParams zeros_like() const;
  bool same_layout(const BasicModelParams& other) const;
  std::size_t parameter_count() const;

  template <typename U>
  BasicModelParams<U> cast() const {
    BasicModelParams<U> out;
    out.kind = kind;
    out.names = names;
    for (const auto& t : tensors) out.tensors.push_back(t.template cast<U>());
    return out;
  }
};

using ModelParams = BasicModelParams<float>;
using ModelParamsD = BasicModelParams<double>;

/// Tensor names shared by the model implementations.
namespace tensor {
inline constexpr std::string_view kWordEmb = "word_emb";
inline constexpr std::string_view kDocEmb = "doc_emb";
inline constexpr std::string_view kEntityEmb = "entity_emb";
inline constexpr std::string_view kTransform = "transform";
inline constexpr std::string_view kBeta = "beta";
inline constexpr std::string_view kBias = "bias";
inline constexpr std::string_view kCandMat = "cand_mat";
inline constexpr std::string_view kCandBias = "cand_bias";
}  // namespace tensor

/// Tensor names in on-disk order for a model kind.
std::vector<std::string_view> tensor_layout(ModelKind kind);

/// Uniform in [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))].
Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng);

struct AdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-tensor moment accumulators for Adam with bias correction.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  ModelParams first_moment;
  ModelParams second_moment;

  static AdamState for_params(const ModelParams& params, AdamConfig config = {});
};

/// One Adam update of every parameter. Throws NumericError naming the tensor
/// if a gradient is not finite; nothing is modified in that case.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

struct TrainConfig {
  std::size_t n = 4;          // n-gram window
  std::size_t m = 51200;      // batch size
  std::size_t z = 10;         // negative samples
  double lambda = 0.01;       // weight decay
  std::size_t epochs = 15;
  std::uint64_t seed = 1;
  std::size_t k_w = 300;      // word representation size
  std::size_t k_d = 128;      // document/entity representation size
  WindowStride stride = WindowStride::overlapping;
  AdamConfig adam;

  static TrainConfig nvsm_defaults();
  static TrainConfig lse_defaults();
  static TrainConfig loglinear_defaults();

  /// Throws ConfigError when a value is out of range.
  void validate() const;
};

}  // namespace vsir
