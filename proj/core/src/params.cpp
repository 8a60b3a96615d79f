#include "vsir/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vsir/error.hpp"

namespace vsir {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::nvsm: return "nvsm";
    case ModelKind::lse: return "lse";
    case ModelKind::loglinear: return "loglinear";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "nvsm") return ModelKind::nvsm;
  if (name == "lse") return ModelKind::lse;
  if (name == "loglinear") return ModelKind::loglinear;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

template <typename T>
std::size_t BasicModelParams<T>::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw std::out_of_range("model has no tensor named '" + std::string(name) + "'");
}

template <typename T>
BasicModelParams<T> BasicModelParams<T>::zeros_like() const {
  BasicModelParams out;
  out.kind = kind;
  out.names = names;
  out.tensors.reserve(tensors.size());
  for (const auto& t : tensors) out.tensors.emplace_back(t.rows(), t.cols());
  return out;
}

template <typename T>
bool BasicModelParams<T>::same_layout(const BasicModelParams& other) const {
  if (kind != other.kind || names != other.names || tensors.size() != other.tensors.size()) {
    return false;
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (!tensors[i].same_shape(other.tensors[i])) return false;
  }
  return true;
}

template <typename T>
std::size_t BasicModelParams<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& t : tensors) total += t.size();
  return total;
}

template struct BasicModelParams<float>;
template struct BasicModelParams<double>;

std::vector<std::string_view> tensor_layout(ModelKind kind) {
  using namespace tensor;
  switch (kind) {
    case ModelKind::nvsm: return {kWordEmb, kDocEmb, kTransform, kBeta};
    case ModelKind::lse: return {kWordEmb, kEntityEmb, kTransform, kBias};
    case ModelKind::loglinear: return {kWordEmb, kCandMat, kCandBias};
  }
  return {};
}

Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("glorot_init needs rows, cols >= 1");
  const float bound = static_cast<float>(std::sqrt(6.0 / static_cast<double>(rows + cols)));
  std::uniform_real_distribution<float> dist(-bound, bound);
  Matrix out(rows, cols);
  for (auto& v : out.data()) v = std::clamp(dist(rng), -bound, bound);
  return out;
}

AdamState AdamState::for_params(const ModelParams& params, AdamConfig config) {
  AdamState state;
  state.config = config;
  state.first_moment = params.zeros_like();
  state.second_moment = params.zeros_like();
  return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  if (!params.same_layout(grads)) throw std::invalid_argument("gradient layout does not match parameters");
  if (!params.same_layout(state.first_moment) || !params.same_layout(state.second_moment)) {
    throw std::invalid_argument("Adam state layout does not match parameters");
  }
  for (std::size_t i = 0; i < grads.tensors.size(); ++i) {
    for (float g : grads.tensors[i].data()) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in tensor '" + grads.names[i] + "'");
      }
    }
  }

  const auto& cfg = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto theta = params.tensors[i].data();
    auto g = grads.tensors[i].data();
    auto m = state.first_moment.tensors[i].data();
    auto v = state.second_moment.tensors[i].data();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double gj = g[j];
      const double mj = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
      const double vj = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      const double m_hat = mj / correction1;
      const double v_hat = vj / correction2;
      theta[j] = static_cast<float>(theta[j] - cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
    }
  }
}

TrainConfig TrainConfig::nvsm_defaults() {
  TrainConfig c;
  c.m = 51200;
  return c;
}

TrainConfig TrainConfig::lse_defaults() {
  TrainConfig c;
  c.m = 4096;
  return c;
}

TrainConfig TrainConfig::loglinear_defaults() {
  TrainConfig c;
  c.m = 4096;
  return c;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(n >= 1, "n (window size) must be >= 1");
  require(m >= 2, "m (batch size) must be >= 2");
  require(z >= 1, "z (negative samples) must be >= 1");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
  require(epochs >= 1, "epochs must be >= 1");
  require(k_w >= 1, "kw must be >= 1");
  require(k_d >= 1, "kd must be >= 1");
  require(adam.alpha > 0.0, "Adam learning rate must be > 0");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "Adam beta1 must be in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "Adam beta2 must be in [0, 1)");
  require(adam.epsilon > 0.0, "Adam epsilon must be > 0");
}

}  // namespace vsir
