#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stacknet/errors.hpp"
#include "stacknet/nn.hpp"
#include "test_util.hpp"

using namespace stacknet;
using stacknet::testing::random_vector;
using stacknet::testing::reference_loss;

namespace {

Mlp single_softmax_layer(Matrix w, std::vector<double> b) {
  DenseLayer l;
  l.weights = std::move(w);
  l.bias = std::move(b);
  l.activation = Activation::kSoftmax;
  return Mlp({l});
}

Mlp random_model(std::uint64_t seed, std::size_t in, std::vector<std::size_t> hidden, std::size_t out,
                 double dropout = 0.0) {
  Rng rng(seed);
  Mlp m = Mlp::random(in, hidden, out, dropout, rng);
  // Non-zero biases so every parameter gets exercised.
  for (auto& l : m.mutable_layers())
    for (double& b : l.bias) b = 0.1 * rng.normal();
  return m;
}

}  // namespace

TEST(EluTest, KnownValues) {
  EXPECT_EQ(elu(0.0, 1.0), 0.0);
  EXPECT_EQ(elu(2.5, 1.0), 2.5);
  // exp(-1) - 1 evaluated with 30-digit arithmetic.
  EXPECT_NEAR(elu(-1.0, 1.0), -0.632120558828557678404476229839, 1e-15);
}

TEST(EluTest, BoundedBelowAndMonotone) {
  Rng rng(7);
  for (double alpha : {0.5, 1.0, 2.0}) {
    double prev_x = -30.0, prev = elu(prev_x, alpha);
    for (int i = 0; i < 2000; ++i) {
      const double x = prev_x + rng.uniform() * 0.05;
      const double y = elu(x, alpha);
      EXPECT_GT(y, -alpha);
      EXPECT_GE(y, prev);
      prev_x = x;
      prev = y;
    }
  }
  // Below about -37, exp(x) - 1 rounds to -1 in binary64: the bound holds
  // only non-strictly there.
  EXPECT_GE(elu(-700.0, 1.0), -1.0);
  EXPECT_GT(elu(-36.0, 1.0), -1.0);
}

TEST(ForwardTest, SoftmaxOfLogitsOneTwo) {
  Matrix w(2, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  const Mlp m = single_softmax_layer(w, {0.0, 0.0});
  const std::vector<double> x = {1.0, 2.0};
  const auto p = predict(m, x);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.268941421369995120748840758178, 1e-15);
  EXPECT_NEAR(p[1], 0.731058578630004879251159241822, 1e-15);
}

TEST(ForwardTest, ZeroLayerGivesUniformPosterior) {
  const Mlp m = single_softmax_layer(Matrix(5, 3), std::vector<double>(5, 0.0));
  for (double v : predict(m, std::vector<double>{3.0, -1.0, 2.0})) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(ForwardTest, PosteriorNormalizedAndEvalDeterministic) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Mlp m = random_model(100 + trial, 7, {9, 5}, 6, 0.2);
    const auto x = random_vector(rng, 7);
    const auto p1 = predict(m, x);
    const auto p2 = predict(m, x);
    EXPECT_EQ(p1, p2);
    double sum = 0.0;
    for (double v : p1) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(ForwardTest, RejectsBadInput) {
  const Mlp m = random_model(1, 4, {3}, 2);
  EXPECT_THROW(predict(m, std::vector<double>{1.0, 2.0}), ShapeError);
  EXPECT_THROW(predict(m, std::vector<double>{1.0, std::nan(""), 0.0, 0.0}), InputError);
  EXPECT_THROW(predict(m, std::vector<double>{1.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}),
               InputError);
  Mlp with_dropout = random_model(1, 4, {3}, 2, 0.5);
  EXPECT_THROW(forward(with_dropout, std::vector<double>(4, 0.0), DropoutMode::kTrain), InputError);
}

TEST(MlpTest, RejectsInvalidStacks) {
  DenseLayer a;
  a.weights = Matrix(3, 2);
  a.bias.assign(3, 0.0);
  a.activation = Activation::kElu;
  DenseLayer b;
  b.weights = Matrix(2, 4);  // expects 4 inputs, previous layer emits 3
  b.bias.assign(2, 0.0);
  b.activation = Activation::kSoftmax;
  EXPECT_THROW(Mlp({a, b}), ShapeError);

  b.weights = Matrix(2, 3);
  EXPECT_NO_THROW(Mlp({a, b}));
  b.dropout_rate = 0.1;
  EXPECT_THROW(Mlp({a, b}), InputError);
  b.dropout_rate = 0.0;
  a.weights(0, 0) = std::nan("");
  EXPECT_THROW(Mlp({a, b}), InputError);
  a.weights(0, 0) = 0.0;
  a.activation = Activation::kSoftmax;
  EXPECT_THROW(Mlp({a, b}), ShapeError);
}

TEST(MlpTest, GlorotInitBounds) {
  Rng rng(3);
  const std::vector<std::size_t> hidden = {20};
  const Mlp m = Mlp::random(10, hidden, 5, 0.1, rng);
  const double l0 = std::sqrt(6.0 / 30.0), l1 = std::sqrt(6.0 / 25.0);
  for (double w : m.layers()[0].weights.data) EXPECT_LE(std::abs(w), l0);
  for (double w : m.layers()[1].weights.data) EXPECT_LE(std::abs(w), l1);
  for (double b : m.layers()[0].bias) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(m.layers()[0].dropout_rate, 0.1);
  EXPECT_EQ(m.layers()[1].dropout_rate, 0.0);
  EXPECT_EQ(m.num_parameters(), 10u * 20 + 20 + 20 * 5 + 5);
}

TEST(CrossEntropyTest, KnownValues) {
  EXPECT_NEAR(cross_entropy(std::vector<double>(4, 0.25), 3), 1.38629436111989061883446424292, 1e-15);
  EXPECT_NEAR(cross_entropy(std::vector<double>{1.0, 0.0, 0.0}, 0), 0.0, 1e-15);
  EXPECT_NEAR(cross_entropy(std::vector<double>{0.5, 0.5}, 1), 0.693147180559945309417232121458, 1e-15);
  // Floor keeps a zero-probability label finite.
  EXPECT_NEAR(cross_entropy(std::vector<double>{1.0, 0.0}, 1), -std::log(1e-30), 1e-9);
  EXPECT_THROW(cross_entropy(std::vector<double>{0.5, 0.5}, 2), InputError);
}

TEST(BackwardTest, OutputOnlyNetworkGradientIsOuterProduct) {
  const Mlp m = single_softmax_layer(Matrix(3, 4), std::vector<double>(3, 0.0));
  const std::vector<double> x = {0.5, -1.0, 2.0, 0.25};
  const auto trace = forward(m, x, DropoutMode::kEval);
  const Gradients g = backward(m, trace, 1);
  for (std::size_t o = 0; o < 3; ++o) {
    const double delta = trace.posterior[o] - (o == 1 ? 1.0 : 0.0);
    EXPECT_DOUBLE_EQ(g.layers[0].bias[o], delta);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g.layers[0].weights(o, i), delta * x[i]);
  }
}

TEST(BackwardTest, MatchesIndependentFiniteDifferences) {
  Rng rng(5);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Mlp m = random_model(200 + trial, 6, {8, 7}, 5);
    const auto x = random_vector(rng, 6);
    const std::size_t label = rng.below(5);
    const Gradients g = backward(m, forward(m, x, DropoutMode::kEval), label);
    auto& layers = m.mutable_layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
      for (std::size_t i = 0; i < layers[li].weights.data.size(); ++i) {
        double& w = layers[li].weights.data[i];
        const double saved = w;
        w = saved + h;
        const double up = reference_loss(m, x, label);
        w = saved - h;
        const double down = reference_loss(m, x, label);
        w = saved;
        EXPECT_NEAR(g.layers[li].weights.data[i], (up - down) / (2 * h), 1e-8);
      }
    }
    // Input gradient too.
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      EXPECT_NEAR(g.input[i], (reference_loss(m, xp, label) - reference_loss(m, xm, label)) / (2 * h),
                  1e-8);
    }
  }
}

TEST(BackwardTest, DuplicatedFrameDoublesGradient) {
  const Mlp m = random_model(9, 4, {6}, 3);
  const std::vector<double> x = {0.3, -0.2, 1.1, 0.0};
  const auto trace = forward(m, x, DropoutMode::kEval);
  const Gradients once = backward(m, trace, 2);
  Gradients twice = Gradients::zeros_like(m);
  twice.accumulate(backward(m, trace, 2));
  twice.accumulate(backward(m, trace, 2));
  for (std::size_t li = 0; li < once.layers.size(); ++li)
    for (std::size_t i = 0; i < once.layers[li].weights.data.size(); ++i)
      EXPECT_EQ(twice.layers[li].weights.data[i], 2.0 * once.layers[li].weights.data[i]);
}

TEST(BackwardTest, ReusesDropoutMasks) {
  const Mlp m = random_model(13, 5, {16}, 4, 0.5);
  Rng dropout(99);
  const std::vector<double> x = {1.0, 0.5, -0.5, 0.2, -1.0};
  const auto trace = forward(m, x, DropoutMode::kTrain, &dropout);
  ASSERT_EQ(trace.dropout_masks[0].size(), 16u);
  const Gradients g = backward(m, trace, 0);
  // Dropped units pass no gradient into the output layer weights.
  for (std::size_t i = 0; i < 16; ++i)
    if (trace.dropout_masks[0][i] == 0.0)
      for (std::size_t o = 0; o < 4; ++o) EXPECT_EQ(g.layers[1].weights(o, i), 0.0);
  ForwardTrace broken = trace;
  broken.inputs.pop_back();
  EXPECT_THROW(backward(m, broken, 0), ShapeError);
}

TEST(DropoutTest, InvertedDropoutMatchesEvalInExpectation) {
  const Mlp m = random_model(21, 6, {10}, 3, 0.3);
  const std::vector<double> x = {0.4, -1.2, 0.7, 2.0, -0.3, 0.1};
  const auto eval = forward(m, x, DropoutMode::kEval);
  std::vector<double> eval_act(10);
  for (std::size_t i = 0; i < 10; ++i) eval_act[i] = elu(eval.pre_activations[0][i]);

  Rng rng(1234);
  const int draws = 20000;
  std::vector<double> sum(10, 0.0), sum_sq(10, 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto tr = forward(m, x, DropoutMode::kTrain, &rng);
    // Input of the softmax layer is the dropped-out hidden activation.
    for (std::size_t i = 0; i < 10; ++i) {
      sum[i] += tr.inputs[1][i];
      sum_sq[i] += tr.inputs[1][i] * tr.inputs[1][i];
    }
  }
  for (std::size_t i = 0; i < 10; ++i) {
    const double mean = sum[i] / draws;
    const double var = sum_sq[i] / draws - mean * mean;
    const double se = std::sqrt(var / draws);
    EXPECT_LE(std::abs(mean - eval_act[i]), 3.0 * se + 1e-15) << "unit " << i;
  }
}

TEST(SgdTest, UpdateArithmetic) {
  Matrix w(1, 1);
  w(0, 0) = 1.0;
  Mlp m = single_softmax_layer(w, {0.0});
  Gradients g = Gradients::zeros_like(m);
  g.layers[0].weights(0, 0) = 0.5;
  sgd_step(m, g, 0.1);
  EXPECT_DOUBLE_EQ(m.layers()[0].weights(0, 0), 0.95);
  EXPECT_EQ(m.layers()[0].bias[0], 0.0);
}

TEST(SgdTest, ZeroRateLeavesModelUnchanged) {
  Mlp m = random_model(31, 5, {4}, 3);
  const Mlp before = m;
  Gradients g = backward(m, forward(m, std::vector<double>(5, 1.0), DropoutMode::kEval), 1);
  sgd_step(m, g, 0.0);
  EXPECT_EQ(m, before);
}

TEST(SgdTest, TwoStepsEqualOneDoubleStep) {
  Mlp a = random_model(41, 3, {4}, 2);
  Mlp b = a;
  // Power-of-two gradient and rate keep the arithmetic exact.
  Gradients g = Gradients::zeros_like(a);
  for (auto& l : g.layers) {
    for (double& v : l.weights.data) v = 0.5;
    for (double& v : l.bias) v = -0.25;
  }
  sgd_step(a, g, 0.125);
  sgd_step(a, g, 0.125);
  sgd_step(b, g, 0.25);
  for (std::size_t li = 0; li < a.layers().size(); ++li)
    for (std::size_t i = 0; i < a.layers()[li].weights.data.size(); ++i)
      EXPECT_NEAR(a.layers()[li].weights.data[i], b.layers()[li].weights.data[i], 1e-15);
}

TEST(SgdTest, NonFiniteGradientAborts) {
  Mlp m = random_model(51, 3, {4}, 2);
  const Mlp before = m;
  Gradients g = Gradients::zeros_like(m);
  g.layers[1].bias[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(sgd_step(m, g, 0.1), NumericError);
  EXPECT_EQ(m, before);
}

TEST(GradCheckTest, RandomModelsPass) {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const Mlp m = random_model(300 + trial, 12, {16, 10, 8}, 9);
    const auto x = random_vector(rng, 12);
    EXPECT_LT(grad_check(m, x, rng.below(9), 1e-5), 1e-6);
  }
}

TEST(GradCheckTest, LinearSoftmaxNearMachinePrecision) {
  Rng rng(71);
  Matrix w(6, 5);
  for (double& v : w.data) v = 0.5 * rng.normal();
  const Mlp m = single_softmax_layer(w, std::vector<double>(6, 0.1));
  EXPECT_LT(grad_check(m, random_vector(rng, 5), 2, 1e-5), 1e-9);
}

TEST(GradCheckTest, RejectsZeroStep) {
  const Mlp m = random_model(81, 3, {2}, 2);
  EXPECT_THROW(grad_check(m, std::vector<double>(3, 0.0), 0, 0.0), InputError);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.minibatch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dropout_rate = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
