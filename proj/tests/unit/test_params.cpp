#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "vsir/error.hpp"
#include "vsir/params.hpp"

using namespace vsir;

namespace {

ModelParams scalar_params(float value) {
  ModelParams p;
  p.kind = ModelKind::loglinear;
  p.add("theta", Matrix(1, 1, value));
  return p;
}

}  // namespace

TEST(ModelKind, ParseAndPrint) {
  for (auto k : {ModelKind::nvsm, ModelKind::lse, ModelKind::loglinear}) EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_THROW(parse_model_kind("bm25"), ConfigError);
}

TEST(TensorLayout, PerKind) {
  EXPECT_EQ(tensor_layout(ModelKind::nvsm),
            (std::vector<std::string_view>{"word_emb", "doc_emb", "transform", "beta"}));
  EXPECT_EQ(tensor_layout(ModelKind::lse),
            (std::vector<std::string_view>{"word_emb", "entity_emb", "transform", "bias"}));
  EXPECT_EQ(tensor_layout(ModelKind::loglinear),
            (std::vector<std::string_view>{"word_emb", "cand_mat", "cand_bias"}));
}

TEST(GlorotInit, SmallShapesBoundedByOne) {
  Rng rng(1);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{2, 4}, {1, 5}}) {
    const auto m = glorot_init(r, c, rng);
    EXPECT_EQ(m.rows(), r);
    EXPECT_EQ(m.cols(), c);
    for (float v : m.data()) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(GlorotInit, LargeDrawStatistics) {
  Rng rng(7);
  const auto m = glorot_init(1000, 1000, rng);
  const double bound = std::sqrt(6.0 / 2000.0);
  double sum = 0.0;
  double lo = 1.0;
  double hi = -1.0;
  for (float v : m.data()) {
    sum += v;
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
  }
  EXPECT_GE(lo, -static_cast<double>(static_cast<float>(bound)));
  EXPECT_LE(hi, static_cast<double>(static_cast<float>(bound)));
  EXPECT_GT(hi, 0.99 * bound);
  EXPECT_NEAR(sum / 1e6, 0.0, 0.01);
}

TEST(Adam, FirstStepFromZero) {
  auto p = scalar_params(0.0f);
  auto state = AdamState::for_params(p);
  adam_step(p, scalar_params(1.0f), state);
  // m_hat = 1, v_hat = 1 at t = 1.
  EXPECT_NEAR(p["theta"](0, 0), -0.001 / (1.0 + 1e-8), 1e-9);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  auto p = scalar_params(0.25f);
  auto state = AdamState::for_params(p);
  for (int i = 0; i < 3; ++i) adam_step(p, scalar_params(0.0f), state);
  EXPECT_EQ(p["theta"](0, 0), 0.25f);
}

TEST(Adam, MatchesScalarRecurrenceOverFiveSteps) {
  const double grads[] = {0.5, 0.5, -0.2, 1.5, 0.5};
  auto p = scalar_params(0.3f);
  auto state = AdamState::for_params(p);
  double theta = 0.3;
  double m = 0.0;
  double v = 0.0;
  for (int t = 1; t <= 5; ++t) {
    const double g = grads[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double m_hat = m / (1.0 - std::pow(0.9, t));
    const double v_hat = v / (1.0 - std::pow(0.999, t));
    theta -= 0.001 * m_hat / (std::sqrt(v_hat) + 1e-8);
    adam_step(p, scalar_params(static_cast<float>(g)), state);
    EXPECT_NEAR(p["theta"](0, 0), theta, 1e-6) << "step " << t;
  }
}

TEST(Adam, ConstantGradientMovesMonotonically) {
  auto p = scalar_params(0.0f);
  auto state = AdamState::for_params(p);
  float prev = 0.0f;
  for (int i = 0; i < 5; ++i) {
    adam_step(p, scalar_params(2.0f), state);
    EXPECT_LT(p["theta"](0, 0), prev);
    prev = p["theta"](0, 0);
  }
}

TEST(Adam, NonFiniteGradientNamesTensorAndChangesNothing) {
  ModelParams p;
  p.kind = ModelKind::loglinear;
  p.add("good", Matrix(1, 2, 1.0f));
  p.add("bad", Matrix(1, 2, 1.0f));
  auto g = p.zeros_like();
  g["good"](0, 0) = 1.0f;
  g["bad"](0, 1) = std::numeric_limits<float>::quiet_NaN();
  auto state = AdamState::for_params(p);
  const auto before = p.tensors;
  try {
    adam_step(p, g, state);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
  EXPECT_EQ(p.tensors, before);
  EXPECT_EQ(state.step, 0u);
}

TEST(Adam, DeterministicAndShapePreserving) {
  Rng rng(3);
  ModelParams p;
  p.kind = ModelKind::loglinear;
  p.add("a", glorot_init(3, 4, rng));
  p.add("b", glorot_init(1, 2, rng));
  ModelParams g = p.zeros_like();
  for (auto& t : g.tensors) {
    for (auto& v : t.data()) v = static_cast<float>(rng() % 100) / 50.0f - 1.0f;
  }
  auto p1 = p;
  auto p2 = p;
  auto s1 = AdamState::for_params(p);
  auto s2 = AdamState::for_params(p);
  adam_step(p1, g, s1);
  adam_step(p2, g, s2);
  EXPECT_EQ(p1.tensors, p2.tensors);
  EXPECT_TRUE(p1.same_layout(p));
}

TEST(TrainConfig, DefaultsAndValidation) {
  const auto nvsm = TrainConfig::nvsm_defaults();
  EXPECT_EQ(nvsm.m, 51200u);
  EXPECT_EQ(nvsm.z, 10u);
  EXPECT_EQ(nvsm.k_w, 300u);
  EXPECT_DOUBLE_EQ(nvsm.lambda, 0.01);
  EXPECT_EQ(nvsm.epochs, 15u);
  EXPECT_EQ(TrainConfig::lse_defaults().m, 4096u);
  EXPECT_NO_THROW(nvsm.validate());

  auto bad = nvsm;
  bad.epochs = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = nvsm;
  bad.m = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = nvsm;
  bad.lambda = -0.1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = nvsm;
  bad.k_d = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ModelParams, CastRoundTripAndZerosLike) {
  Rng rng(5);
  ModelParams p;
  p.kind = ModelKind::nvsm;
  p.add("w", glorot_init(2, 3, rng));
  const auto back = p.cast<double>().cast<float>();
  EXPECT_EQ(back.tensors, p.tensors);
  const auto z = p.zeros_like();
  EXPECT_TRUE(z.same_layout(p));
  for (float v : z.tensors[0].data()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(p.parameter_count(), 6u);
  EXPECT_THROW(p["missing"], std::out_of_range);
}
