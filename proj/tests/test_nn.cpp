// Copyright 2026 The cricwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "cricwin/nn.hpp"
#include "support.hpp"

namespace cw = cricwin;
namespace nn = cricwin::nn;

namespace {

cw::ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const cw::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cricwin::Error thrown";
  return cw::ErrorCode::IoError;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

nn::LstmParams<double> zero_lstm(int in, int hidden) {
  nn::LstmParams<double> p;
  for (auto& g : p.gates) {
    g.W = nn::Matrix<double>(hidden, in);
    g.U = nn::Matrix<double>(hidden, hidden);
    g.b.assign(static_cast<std::size_t>(hidden), 0.0);
  }
  return p;
}

nn::Network<double> random_network(int in, int it, int hidden, std::uint64_t seed) {
  auto net = nn::init_params<double>({in, it, hidden}, seed);
  cw::Rng rng(seed + 100);
  nn::for_each_tensor(net, [&](const std::string&, std::span<double> s, nn::TensorShape) {
    for (double& v : s) v = rng.uniform(-0.8, 0.8);
  });
  return net;
}

}  // namespace

TEST(Init, DeterministicPerSeed) {
  EXPECT_EQ(nn::init_params<double>({9, 5, 4}, 1), nn::init_params<double>({9, 5, 4}, 1));
  EXPECT_NE(nn::init_params<double>({9, 5, 4}, 1), nn::init_params<double>({9, 5, 4}, 2));
}

TEST(Init, ShapesBiasesAndBounds) {
  const auto net = nn::init_params<double>({20, 32, 64}, 3);
  for (std::size_t g = 0; g < 4; ++g) {
    const auto& gate = net.lstm.gates[g];
    EXPECT_EQ(gate.W.rows, 64);
    EXPECT_EQ(gate.W.cols, 32);
    EXPECT_EQ(gate.U.rows, 64);
    EXPECT_EQ(gate.U.cols, 64);
    for (double b : gate.b) EXPECT_EQ(b, g == nn::kForgetGate ? 1.0 : 0.0);
    const double lw = std::sqrt(6.0 / (32 + 64)), lu = std::sqrt(6.0 / (64 + 64));
    for (double w : gate.W.data) ASSERT_LE(std::abs(w), lw);
    for (double u : gate.U.data) ASSERT_LE(std::abs(u), lu);
  }
  EXPECT_EQ(net.it.W.rows, 32);
  EXPECT_EQ(net.it.W.cols, 20);
  EXPECT_EQ(net.ot.W.rows, 2);
  for (double b : net.it.b) EXPECT_EQ(b, 0.0);
  for (double b : net.ot.b) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(code_of([] { nn::init_params<double>({0, 3, 3}, 1); }), cw::ErrorCode::InvalidArgument);
}

TEST(Dense, IdentityWeights) {
  nn::DenseParams<double> p{nn::Matrix<double>(3, 3), {0, 0, 0}, nn::Activation::Identity};
  for (int i = 0; i < 3; ++i) p.W(i, i) = 1.0;
  const std::vector<double> x{0.5, -2.0, 3.25};
  EXPECT_EQ(nn::dense_forward<double>(x, p), x);
}

TEST(Dense, ReluOfBias) {
  nn::DenseParams<double> p{nn::Matrix<double>(2, 4), {2.0, -3.0}, nn::Activation::Relu};
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_EQ(nn::dense_forward<double>(x, p), (std::vector<double>{2.0, 0.0}));
}

TEST(Dense, MatchesTripleLoopOracle) {
  cw::Rng rng(5);
  for (auto act : {nn::Activation::Identity, nn::Activation::Tanh, nn::Activation::Relu}) {
    nn::DenseParams<double> p{nn::Matrix<double>(7, 13), std::vector<double>(7), act};
    for (auto& w : p.W.data) w = rng.uniform(-1, 1);
    for (auto& b : p.b) b = rng.uniform(-1, 1);
    std::vector<double> x(13);
    for (auto& v : x) v = rng.uniform(-2, 2);
    const auto y = nn::dense_forward<double>(x, p);
    cw::FeatureRow sparse;
    for (int j = 0; j < 13; ++j) sparse.push_back({static_cast<std::uint32_t>(j), x[j]});
    std::vector<double> ys(7);
    nn::dense_forward_sparse<double>(sparse, p, ys);
    for (int i = 0; i < 7; ++i) {
      double acc = p.b[i];
      for (int j = 0; j < 13; ++j) acc += p.W(i, j) * x[j];
      const double want = act == nn::Activation::Tanh ? std::tanh(acc) : act == nn::Activation::Relu ? std::max(acc, 0.0) : acc;
      EXPECT_NEAR(y[i], want, 1e-12);
      EXPECT_NEAR(ys[i], want, 1e-12);
    }
  }
  nn::DenseParams<double> p{nn::Matrix<double>(2, 3), {0, 0}, nn::Activation::Identity};
  EXPECT_EQ(code_of([&] { nn::dense_forward<double>(std::vector<double>{1, 2}, p); }), cw::ErrorCode::ShapeMismatch);
}

TEST(Lstm, ZeroParamsHalveTheCell) {
  const auto p = zero_lstm(3, 4);
  const std::vector<double> x{0.3, -1.0, 2.0}, h0{0.1, 0.2, 0.3, 0.4}, c0{1.0, -2.0, 0.5, 3.0};
  nn::LstmStep<double> out;
  nn::lstm_step<double>(x, h0, c0, p, out);
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(out.c[k], 0.5 * c0[k]);
    EXPECT_DOUBLE_EQ(out.h[k], 0.5 * std::tanh(0.5 * c0[k]));
  }
}

TEST(Lstm, ForgetBiasOneRetains) {
  auto p = zero_lstm(2, 3);
  p.gates[nn::kForgetGate].b.assign(3, 1.0);
  const std::vector<double> x{1, 1}, h0{0, 0, 0}, c0{1.0, -4.0, 2.0};
  nn::LstmStep<double> out;
  nn::lstm_step<double>(x, h0, c0, p, out);
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(out.c[k], sigmoid(1.0) * c0[k]);
  EXPECT_NEAR(sigmoid(1.0), 0.731, 5e-4);
}

TEST(Lstm, ZeroStateZeroBiasGivesZeroH) {
  auto net = random_network(3, 3, 4, 8);
  for (auto& g : net.lstm.gates) g.b.assign(4, 0.0);
  const std::vector<double> zero3(3, 0.0), zero4(4, 0.0);
  nn::LstmStep<double> out;
  nn::lstm_step<double>(zero3, zero4, zero4, net.lstm, out);
  for (double h : out.h) EXPECT_EQ(h, 0.0);
}

TEST(Lstm, MatchesScalarOracle) {
  const auto net = random_network(3, 3, 3, 11);
  const auto& p = net.lstm;
  const std::vector<double> x{0.2, -0.7, 1.1}, h0{0.3, -0.1, 0.05}, c0{-0.4, 0.9, 0.2};
  nn::LstmStep<double> out;
  nn::lstm_step<double>(x, h0, c0, p, out);
  for (int k = 0; k < 3; ++k) {
    double z[4];
    for (int g = 0; g < 4; ++g) {
      z[g] = p.gates[g].b[k];
      for (int j = 0; j < 3; ++j) z[g] += p.gates[g].W(k, j) * x[j] + p.gates[g].U(k, j) * h0[j];
    }
    const double c = sigmoid(z[1]) * c0[k] + sigmoid(z[0]) * std::tanh(z[3]);
    EXPECT_NEAR(out.c[k], c, 1e-12);
    EXPECT_NEAR(out.h[k], sigmoid(z[2]) * std::tanh(c), 1e-12);
  }
}

TEST(Lstm, Errors) {
  const auto p = zero_lstm(2, 2);
  nn::LstmStep<double> out;
  const std::vector<double> two(2, 0.0), three(3, 0.0);
  EXPECT_EQ(code_of([&] { nn::lstm_step<double>(three, two, two, p, out); }), cw::ErrorCode::ShapeMismatch);
  const std::vector<double> inf{INFINITY, 0.0};
  EXPECT_EQ(code_of([&] { nn::lstm_step<double>(two, two, inf, p, out); }), cw::ErrorCode::NonFiniteActivation);
}

TEST(Softmax, Examples) {
  const auto a = nn::softmax2<double>({0.0, 0.0});
  EXPECT_EQ(a[0], 0.5);
  EXPECT_EQ(a[1], 0.5);
  const auto b = nn::softmax2<double>({std::log(3.0), 0.0});
  EXPECT_NEAR(b[0], 0.75, 1e-15);
  EXPECT_NEAR(b[1], 0.25, 1e-15);
  const auto c = nn::softmax2<double>({1000.0, 0.0});
  EXPECT_EQ(c[0], 1.0);
  EXPECT_GT(c[1], 0.0);
  EXPECT_TRUE(std::isfinite(c[1]));
}

TEST(Softmax, NormalizedAndPositive) {
  cw::Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto p = nn::softmax2<double>({rng.uniform(-800, 800), rng.uniform(-800, 800)});
    ASSERT_GT(p[0], 0.0);
    ASSERT_GT(p[1], 0.0);
    ASSERT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
}

TEST(CrossEntropy, Examples) {
  EXPECT_NEAR(nn::ce_loss<double>({1.0, 0.0}, true), 0.0, 1e-15);
  EXPECT_NEAR(nn::ce_loss<double>({0.5, 0.5}, true), 0.693147, 1e-6);
  EXPECT_NEAR(nn::ce_loss<double>({0.25, 0.75}, false), 0.287682, 1e-6);
  EXPECT_NEAR(nn::ce_loss<double>({0.75, 0.25}, true), -std::log(0.75), 1e-15);
  EXPECT_NEAR(nn::ce_loss<double>({1.0, 0.0}, false), -std::log(1e-12), 1e-9);
}

TEST(Backward, ZeroOutputGradsGiveZeroGrads) {
  const auto net = random_network(5, 4, 3, 2);
  const auto seq = cw::testing::random_sequence(6, 5, true, 3);
  nn::SequenceTrace<double> trace;
  nn::forward_sequence<double>(net, seq.rows, 6, trace);
  auto grad = nn::zeros_like(net);
  const std::vector<std::array<double, 2>> zero(6, {0.0, 0.0});
  nn::backward_sequence<double>(trace, zero, net, grad);
  EXPECT_EQ(nn::global_norm(grad), 0.0);
}

TEST(Backward, NeedsForwardPass) {
  const auto net = random_network(5, 4, 3, 2);
  nn::SequenceTrace<double> trace;
  auto grad = nn::zeros_like(net);
  EXPECT_EQ(code_of([&] { nn::backward_sequence<double>(trace, {}, net, grad); }), cw::ErrorCode::CacheMissing);
}

TEST(Backward, SingleStepChainRule) {
  const int in = 4, it = 3, H = 3;
  const auto net = random_network(in, it, H, 21);
  const auto seq = cw::testing::random_sequence(1, in, false, 22);
  const auto x = seq.dense_row(0);
  nn::SequenceTrace<double> trace;
  auto grad = nn::zeros_like(net);
  cw::loss_and_gradient<double>(net, seq, cw::output_targets(cw::Variant::B, 1, 300), trace, grad);

  std::vector<double> a(it), pre(it);
  for (int i = 0; i < it; ++i) {
    pre[i] = net.it.b[i];
    for (int j = 0; j < in; ++j) pre[i] += net.it.W(i, j) * x[j];
    a[i] = std::tanh(pre[i]);
  }
  double gate[4][H], c[H], h[H];
  for (int k = 0; k < H; ++k) {
    for (int g = 0; g < 4; ++g) {
      double z = net.lstm.gates[g].b[k];
      for (int j = 0; j < it; ++j) z += net.lstm.gates[g].W(k, j) * a[j];
      gate[g][k] = g == nn::kCandidateGate ? std::tanh(z) : sigmoid(z);
    }
    c[k] = gate[nn::kInputGate][k] * gate[nn::kCandidateGate][k];
    h[k] = gate[nn::kOutputGate][k] * std::tanh(c[k]);
  }
  double logit[2];
  for (int n = 0; n < 2; ++n) {
    logit[n] = net.ot.b[n];
    for (int k = 0; k < H; ++k) logit[n] += net.ot.W(n, k) * h[k];
  }
  const double p0 = 1.0 / (1.0 + std::exp(logit[1] - logit[0]));
  const double dl[2] = {p0, (1.0 - p0) - 1.0};  // label lose
  for (int n = 0; n < 2; ++n) {
    EXPECT_NEAR(grad.ot.b[n], dl[n], 1e-12);
    for (int k = 0; k < H; ++k) EXPECT_NEAR(grad.ot.W(n, k), dl[n] * h[k], 1e-12);
  }
  double dz[4][H];
  for (int k = 0; k < H; ++k) {
    const double dh = net.ot.W(0, k) * dl[0] + net.ot.W(1, k) * dl[1];
    const double tc = std::tanh(c[k]);
    const double dc = dh * gate[nn::kOutputGate][k] * (1 - tc * tc);
    const double i = gate[nn::kInputGate][k], o = gate[nn::kOutputGate][k], g = gate[nn::kCandidateGate][k];
    dz[nn::kInputGate][k] = dc * g * i * (1 - i);
    dz[nn::kForgetGate][k] = 0.0;
    dz[nn::kOutputGate][k] = dh * tc * o * (1 - o);
    dz[nn::kCandidateGate][k] = dc * i * (1 - g * g);
  }
  std::vector<double> da(it, 0.0);
  for (int g = 0; g < 4; ++g)
    for (int k = 0; k < H; ++k) {
      EXPECT_NEAR(grad.lstm.gates[g].b[k], dz[g][k], 1e-12);
      for (int j = 0; j < it; ++j) {
        EXPECT_NEAR(grad.lstm.gates[g].W(k, j), dz[g][k] * a[j], 1e-12);
        da[j] += net.lstm.gates[g].W(k, j) * dz[g][k];
      }
      for (int j = 0; j < H; ++j) EXPECT_EQ(grad.lstm.gates[g].U(k, j), 0.0);
    }
  for (int i = 0; i < it; ++i) {
    const double dpre = da[i] * (1 - a[i] * a[i]);
    EXPECT_NEAR(grad.it.b[i], dpre, 1e-12);
    for (int j = 0; j < in; ++j) EXPECT_NEAR(grad.it.W(i, j), dpre * x[j], 1e-12);
  }
}

class GradCheckAllVariants : public ::testing::TestWithParam<cw::Variant> {};

TEST_P(GradCheckAllVariants, BelowOneInAMillion) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = cw::testing::grad_check_variant(GetParam(), seed);
    EXPECT_GE(r.coords_checked, 200u);
    EXPECT_LT(r.max_relative_error, 1e-6) << "seed " << seed << " coord " << r.worst_coord;
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, GradCheckAllVariants,
                         ::testing::Values(cw::Variant::A, cw::Variant::B, cw::Variant::C, cw::Variant::D),
                         [](const auto& info) { return std::string(cw::to_string(info.param)); });

TEST(GradCheck, QuadraticToy) {
  std::vector<double> theta{0.5, -1.25, 2.0, 3.5};
  const std::vector<double> w{1.0, 2.0, 0.5, 4.0};
  auto loss = [&](const std::vector<double>& t) {
    long double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) s += 0.5L * w[i] * t[i] * t[i];
    return s;
  };
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = w[i] * theta[i];
  const auto r = nn::grad_check(theta, loss, g);
  EXPECT_EQ(r.coords_checked, 4u);
  EXPECT_LT(r.max_relative_error, 1e-9);
}

TEST(GradCheck, DetectsCorruptedGradient) {
  const auto net = nn::init_params<double>({7, 4, 4}, 9);
  const auto seq = cw::testing::random_sequence(5, 7, true, 10);
  const auto targets = cw::output_targets(cw::Variant::B, 5, 300);
  nn::SequenceTrace<double> trace;
  auto grad = nn::zeros_like(net);
  cw::loss_and_gradient<double>(net, seq, targets, trace, grad);
  auto analytic = nn::flatten(grad);
  for (double& v : analytic) v *= 1.01;
  auto loss = [&](const std::vector<double>& theta) -> long double {
    auto probe = net;
    nn::unflatten<double>(theta, probe);
    return cw::loss_only<long double>(nn::cast_network<long double>(probe), seq, targets);
  };
  EXPECT_GT(nn::grad_check(nn::flatten(net), loss, analytic).max_relative_error, 1e-3);
}

TEST(Clip, HalvesAtTwiceTheNorm) {
  auto g = nn::zeros_like(nn::init_params<double>({2, 2, 2}, 1));
  g.ot.b = {6.0, 8.0};
  nn::clip_gradients(g, 5.0);
  EXPECT_DOUBLE_EQ(g.ot.b[0], 3.0);
  EXPECT_DOUBLE_EQ(g.ot.b[1], 4.0);
  g.ot.b = {0.0, 3.0};
  EXPECT_DOUBLE_EQ(nn::clip_gradients(g, 5.0), 3.0);
  EXPECT_EQ(g.ot.b[1], 3.0);
}

TEST(Clip, NeverIncreasesNorm) {
  cw::Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = nn::zeros_like(nn::init_params<double>({5, 4, 3}, 1));
    const double scale = std::pow(10.0, rng.uniform(-3, 3));
    nn::for_each_tensor(g, [&](const std::string&, std::span<double> s, nn::TensorShape) {
      for (double& v : s) v = scale * rng.uniform(-1, 1);
    });
    const double max_norm = rng.uniform(0.1, 10.0);
    const double before = nn::global_norm(g);
    nn::clip_gradients(g, max_norm);
    const double after = nn::global_norm(g);
    ASSERT_LE(after, before * (1 + 1e-15));
    ASSERT_LE(after, max_norm + 1e-9);
  }
}

TEST(Adam, FirstStepMovesByLr) {
  auto p = nn::init_params<double>({3, 3, 2}, 4);
  const auto start = p;
  auto g = nn::zeros_like(p);
  cw::Rng rng(1);
  nn::for_each_tensor(g, [&](const std::string&, std::span<double> s, nn::TensorShape) {
    for (double& v : s) v = rng.bernoulli(0.5) ? rng.uniform(0.1, 3) : -rng.uniform(0.1, 3);
  });
  auto state = nn::make_optimizer(p, {0.01, 0.9, 0.999, 1e-8});
  nn::adam_step(p, g, state);
  EXPECT_EQ(state.step, 1);
  const auto before = nn::flatten(start), after = nn::flatten(p), grads = nn::flatten(g);
  for (std::size_t i = 0; i < before.size(); ++i)
    ASSERT_NEAR(after[i] - before[i], -0.01 * (grads[i] > 0 ? 1 : -1), 1e-8);
}

TEST(Adam, ZeroGradsLeaveParams) {
  auto p = nn::init_params<double>({3, 3, 2}, 4);
  const auto start = p;
  auto state = nn::make_optimizer(p, {});
  nn::adam_step(p, nn::zeros_like(p), state);
  nn::adam_step(p, nn::zeros_like(p), state);
  EXPECT_EQ(p, start);
  EXPECT_EQ(state.step, 2);
}

TEST(Adam, ScalarQuadraticConverges) {
  // Independent scalar recurrence of the bias-corrected update.
  double theta = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 500; ++t) {
    const double g = 2 * theta;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    theta -= 0.05 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  std::vector<double> p{1.0}, gbuf{0.0}, mb{0.0}, vb{0.0};
  for (long t = 1; t <= 500; ++t) {
    gbuf[0] = 2 * p[0];
    nn::adam_update<double>(p, gbuf, mb, vb, t, {0.05, 0.9, 0.999, 1e-8});
  }
  EXPECT_LT(std::abs(p[0]), 0.01);
  EXPECT_NEAR(p[0], theta, 1e-12);
}

TEST(Adam, ShapeMismatch) {
  auto p = nn::init_params<double>({3, 3, 2}, 4);
  auto state = nn::make_optimizer(p, {});
  EXPECT_EQ(code_of([&] { nn::adam_step(p, nn::zeros_like(nn::init_params<double>({4, 3, 2}, 4)), state); }),
            cw::ErrorCode::ShapeMismatch);
}

TEST(Streaming, ForwardStepMatchesSequence) {
  const auto net = random_network(6, 5, 4, 30);
  const auto seq = cw::testing::random_sequence(12, 6, true, 31);
  nn::SequenceTrace<double> trace;
  nn::forward_sequence<double>(net, seq.rows, 12, trace);
  std::vector<double> h(4, 0.0), c(4, 0.0), it;
  nn::LstmStep<double> cell;
  for (int t = 0; t < 12; ++t) {
    const auto p = nn::forward_step<double>(net, seq.rows[t], h, c, it, cell);
    ASSERT_EQ(p, trace.probs[t]);
    h = cell.h;
    c = cell.c;
  }
}

TEST(Flatten, RoundTripAndCast) {
  const auto net = random_network(4, 3, 2, 40);
  auto copy = nn::zeros_like(net);
  nn::unflatten<double>(nn::flatten(net), copy);
  EXPECT_EQ(copy, net);
  EXPECT_EQ(nn::cast_network<double>(nn::cast_network<long double>(net)), net);
  EXPECT_EQ(nn::parameter_count(net), nn::flatten(net).size());
}
