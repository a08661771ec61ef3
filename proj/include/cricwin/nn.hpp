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

// Fixed-topology recurrent network: a shared input dense layer (IT), one LSTM
// cell and a shared two-node output layer (OT), with exact backpropagation
// through time. Everything is templated on the scalar so gradient checks can
// run in double while training runs in float.
//
// Output node 0 is "win", node 1 is "lose".

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cricwin/encode.hpp"
#include "cricwin/error.hpp"
#include "cricwin/rng.hpp"

namespace cricwin::nn {

inline constexpr int kWinNode = 0;
inline constexpr int kLoseNode = 1;
inline constexpr double kProbFloor = 1e-12;

template <typename T>
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), T(0)) {}

  T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  T operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  const T* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  T* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }

  bool operator==(const Matrix&) const = default;
};

enum class Activation { Identity, Relu, Tanh };

template <typename T>
struct DenseParams {
  Matrix<T> W;  // out x in
  std::vector<T> b;
  Activation activation = Activation::Identity;

  int in() const { return W.cols; }
  int out() const { return W.rows; }
  bool operator==(const DenseParams&) const = default;
};

enum Gate { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidateGate = 3 };
inline constexpr std::array<const char*, 4> kGateNames{"input", "forget", "output", "candidate"};

template <typename T>
struct LstmGate {
  Matrix<T> W;  // hidden x in
  Matrix<T> U;  // hidden x hidden
  std::vector<T> b;

  bool operator==(const LstmGate&) const = default;
};

template <typename T>
struct LstmParams {
  std::array<LstmGate<T>, 4> gates;

  int in() const { return gates[0].W.cols; }
  int hidden() const { return gates[0].W.rows; }
  bool operator==(const LstmParams&) const = default;
};

/// IT -> LSTM -> OT. Gradients use the same type.
template <typename T>
struct Network {
  DenseParams<T> it;
  LstmParams<T> lstm;
  DenseParams<T> ot;

  bool operator==(const Network&) const = default;
};

struct TensorShape {
  int rows = 0;
  int cols = 1;
};

/// Visits every parameter tensor in a fixed order with a stable name.
template <typename Net, typename Fn>
  requires std::is_same_v<std::remove_const_t<Net>, Network<float>> ||
           std::is_same_v<std::remove_const_t<Net>, Network<double>> ||
           std::is_same_v<std::remove_const_t<Net>, Network<long double>>
void for_each_tensor(Net& net, Fn&& fn) {
  auto visit_dense = [&](const std::string& prefix, auto& d) {
    fn(prefix + ".W", std::span(d.W.data), TensorShape{d.W.rows, d.W.cols});
    fn(prefix + ".b", std::span(d.b), TensorShape{static_cast<int>(d.b.size()), 1});
  };
  visit_dense("it", net.it);
  for (std::size_t g = 0; g < 4; ++g) {
    auto& gate = net.lstm.gates[g];
    const std::string prefix = std::string("lstm.") + kGateNames[g];
    fn(prefix + ".W", std::span(gate.W.data), TensorShape{gate.W.rows, gate.W.cols});
    fn(prefix + ".U", std::span(gate.U.data), TensorShape{gate.U.rows, gate.U.cols});
    fn(prefix + ".b", std::span(gate.b), TensorShape{static_cast<int>(gate.b.size()), 1});
  }
  visit_dense("ot", net.ot);
}

template <typename T>
std::size_t parameter_count(const Network<T>& net) {
  std::size_t n = 0;
  for_each_tensor(net, [&n](const std::string&, auto s, TensorShape) { n += s.size(); });
  return n;
}

template <typename T>
Network<T> zeros_like(const Network<T>& net) {
  Network<T> z = net;
  for_each_tensor(z, [](const std::string&, std::span<T> s, TensorShape) { std::fill(s.begin(), s.end(), T(0)); });
  return z;
}

template <typename T>
std::vector<double> flatten(const Network<T>& net) {
  std::vector<double> out;
  out.reserve(parameter_count(net));
  for_each_tensor(net, [&out](const std::string&, std::span<const T> s, TensorShape) {
    for (T v : s) out.push_back(static_cast<double>(v));
  });
  return out;
}

template <typename T>
void unflatten(std::span<const double> flat, Network<T>& net) {
  std::size_t at = 0;
  for_each_tensor(net, [&](const std::string&, std::span<T> s, TensorShape) {
    for (T& v : s) v = static_cast<T>(flat[at++]);
  });
}

template <typename To, typename From>
Network<To> cast_network(const Network<From>& net) {
  Network<To> out;
  auto cast_matrix = [](const Matrix<From>& m) {
    Matrix<To> r(m.rows, m.cols);
    std::transform(m.data.begin(), m.data.end(), r.data.begin(), [](From v) { return static_cast<To>(v); });
    return r;
  };
  auto cast_vec = [](const std::vector<From>& v) { return std::vector<To>(v.begin(), v.end()); };
  out.it = {cast_matrix(net.it.W), cast_vec(net.it.b), net.it.activation};
  for (std::size_t g = 0; g < 4; ++g)
    out.lstm.gates[g] = {cast_matrix(net.lstm.gates[g].W), cast_matrix(net.lstm.gates[g].U),
                         cast_vec(net.lstm.gates[g].b)};
  out.ot = {cast_matrix(net.ot.W), cast_vec(net.ot.b), net.ot.activation};
  return out;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

struct NetworkDims {
  int input = 0;   // layout total_dim
  int it = 64;     // IT output
  int hidden = 64;
};

namespace detail {

template <typename T>
void glorot_fill(Matrix<T>& m, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : m.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace detail

/// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases except the
/// forget-gate bias which starts at 1. IT uses tanh, OT is linear.
template <typename T>
Network<T> init_params(const NetworkDims& dims, std::uint64_t seed) {
  if (dims.input < 1 || dims.it < 1 || dims.hidden < 1)
    fail(ErrorCode::InvalidArgument, "network dimensions must be positive");
  Rng rng(seed);
  Network<T> net;
  net.it = {Matrix<T>(dims.it, dims.input), std::vector<T>(static_cast<std::size_t>(dims.it), T(0)),
            Activation::Tanh};
  detail::glorot_fill(net.it.W, dims.input, dims.it, rng);
  for (std::size_t g = 0; g < 4; ++g) {
    auto& gate = net.lstm.gates[g];
    gate.W = Matrix<T>(dims.hidden, dims.it);
    gate.U = Matrix<T>(dims.hidden, dims.hidden);
    gate.b.assign(static_cast<std::size_t>(dims.hidden), g == kForgetGate ? T(1) : T(0));
    detail::glorot_fill(gate.W, dims.it, dims.hidden, rng);
    detail::glorot_fill(gate.U, dims.hidden, dims.hidden, rng);
  }
  net.ot = {Matrix<T>(2, dims.hidden), std::vector<T>(2, T(0)), Activation::Identity};
  detail::glorot_fill(net.ot.W, dims.hidden, 2, rng);
  return net;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

// Eight independent partial sums, combined in a fixed order. Vectorizes
// without reassociation flags and stays bit-reproducible.
template <typename T>
inline T dot(const T* a, const T* b, int n) {
  T acc[8] = {};
  int j = 0;
  for (; j + 8 <= n; j += 8)
    for (int k = 0; k < 8; ++k) acc[k] += a[j + k] * b[j + k];
  for (int k = 0; j < n; ++j, ++k) acc[k] += a[j] * b[j];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, int n) {
  for (int j = 0; j < n; ++j) y[j] += alpha * x[j];
}

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
inline T activate(Activation a, T x) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > T(0) ? x : T(0);
    case Activation::Tanh: return std::tanh(x);
  }
  return x;
}

// Derivative expressed through the activation output.
template <typename T>
inline T activation_grad(Activation a, T y) {
  switch (a) {
    case Activation::Identity: return T(1);
    case Activation::Relu: return y > T(0) ? T(1) : T(0);
    case Activation::Tanh: return T(1) - y * y;
  }
  return T(1);
}

// ---------------------------------------------------------------------------
// Dense layer
// ---------------------------------------------------------------------------

template <typename T>
struct DenseCache {
  std::vector<T> x;
  std::vector<T> y;
};

/// y = act(W x + b).
template <typename T>
std::vector<T> dense_forward(std::span<const T> x, const DenseParams<T>& p, DenseCache<T>* cache = nullptr) {
  if (static_cast<int>(x.size()) != p.in())
    fail(ErrorCode::ShapeMismatch, "dense input has " + std::to_string(x.size()) + " entries, layer expects " +
                                       std::to_string(p.in()));
  std::vector<T> y(static_cast<std::size_t>(p.out()));
  for (int i = 0; i < p.out(); ++i) y[i] = activate(p.activation, p.b[i] + dot(p.W.row(i), x.data(), p.in()));
  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->y = y;
  }
  return y;
}

/// Dense layer on a sparse feature row; writes act(W x + b) into `y`.
template <typename T>
void dense_forward_sparse(const FeatureRow& x, const DenseParams<T>& p, std::span<T> y) {
  const int in = p.in();
  for (int i = 0; i < p.out(); ++i) y[i] = p.b[i];
  for (const auto& e : x) {
    if (static_cast<int>(e.index) >= in)
      fail(ErrorCode::ShapeMismatch, "feature column " + std::to_string(e.index) + " outside layer input " +
                                         std::to_string(in));
    const T v = static_cast<T>(e.value);
    const T* col = p.W.data.data() + e.index;
    for (int i = 0; i < p.out(); ++i) y[i] += col[static_cast<std::size_t>(i) * in] * v;
  }
  for (int i = 0; i < p.out(); ++i) y[i] = activate(p.activation, y[i]);
}

/// Accumulates parameter gradients of a dense layer given dL/dy; returns dL/dx.
template <typename T>
std::vector<T> dense_backward(const DenseCache<T>& cache, std::span<const T> dy, const DenseParams<T>& p,
                              DenseParams<T>& grad) {
  std::vector<T> dx(static_cast<std::size_t>(p.in()), T(0));
  for (int i = 0; i < p.out(); ++i) {
    const T dpre = dy[i] * activation_grad(p.activation, cache.y[i]);
    if (dpre == T(0)) continue;
    grad.b[i] += dpre;
    axpy(dpre, cache.x.data(), grad.W.row(i), p.in());
    axpy(dpre, p.W.row(i), dx.data(), p.in());
  }
  return dx;
}

// ---------------------------------------------------------------------------
// LSTM cell
// ---------------------------------------------------------------------------

/// Activations of one executed step, enough for an exact backward pass.
template <typename T>
struct LstmStep {
  std::vector<T> i, f, o, g;  // gate activations
  std::vector<T> c, tanh_c, h;

  void resize(int hidden) {
    for (auto* v : {&i, &f, &o, &g, &c, &tanh_c, &h}) v->resize(static_cast<std::size_t>(hidden));
  }
};

/// i,f,o = sigmoid(W x + U h + b), g = tanh(...), c = f*c_prev + i*g,
/// h = o*tanh(c).
template <typename T>
void lstm_step(std::span<const T> x, std::span<const T> h_prev, std::span<const T> c_prev, const LstmParams<T>& p,
               LstmStep<T>& out) {
  const int in = p.in();
  const int hidden = p.hidden();
  if (static_cast<int>(x.size()) != in || static_cast<int>(h_prev.size()) != hidden ||
      static_cast<int>(c_prev.size()) != hidden)
    fail(ErrorCode::ShapeMismatch, "lstm_step input shapes do not match parameters");
  out.resize(hidden);
  bool finite = true;
  for (int k = 0; k < hidden; ++k) {
    T z[4];
    for (int g = 0; g < 4; ++g) {
      const auto& gate = p.gates[g];
      z[g] = gate.b[k] + dot(gate.W.row(k), x.data(), in) + dot(gate.U.row(k), h_prev.data(), hidden);
    }
    const T ig = sigmoid(z[kInputGate]);
    const T fg = sigmoid(z[kForgetGate]);
    const T og = sigmoid(z[kOutputGate]);
    const T gg = std::tanh(z[kCandidateGate]);
    const T c = fg * c_prev[k] + ig * gg;
    const T tc = std::tanh(c);
    out.i[k] = ig;
    out.f[k] = fg;
    out.o[k] = og;
    out.g[k] = gg;
    out.c[k] = c;
    out.tanh_c[k] = tc;
    out.h[k] = og * tc;
    finite = finite && std::isfinite(c) && std::isfinite(out.h[k]);
  }
  if (!finite) fail(ErrorCode::NonFiniteActivation, "lstm_step produced a non-finite cell or hidden state");
}

// ---------------------------------------------------------------------------
// Output layer and loss
// ---------------------------------------------------------------------------

/// Numerically stable two-way softmax; entries floored at the smallest
/// normal value so both stay strictly positive.
template <typename T>
std::array<T, 2> softmax2(std::array<T, 2> logits) {
  const T m = std::max(logits[0], logits[1]);
  const T e0 = std::exp(logits[0] - m);
  const T e1 = std::exp(logits[1] - m);
  const T s = e0 + e1;
  std::array<T, 2> p{e0 / s, e1 / s};
  for (auto& v : p) v = std::max(v, std::numeric_limits<T>::min());
  return p;
}

inline int label_node(bool won) { return won ? kWinNode : kLoseNode; }

/// -ln(p[label]) with the probability floored at 1e-12.
template <typename T>
T ce_loss(const std::array<T, 2>& probs, bool won) {
  return -std::log(std::max(probs[label_node(won)], static_cast<T>(kProbFloor)));
}

/// d ce_loss / d logits through the softmax.
template <typename T>
std::array<T, 2> ce_logit_grad(const std::array<T, 2>& probs, bool won) {
  const int y = label_node(won);
  if (probs[y] < static_cast<T>(kProbFloor)) return {T(0), T(0)};
  std::array<T, 2> g = probs;
  g[y] -= T(1);
  return g;
}

// ---------------------------------------------------------------------------
// Sequence forward / backward
// ---------------------------------------------------------------------------

/// Per-step activations of one forward pass over a sequence.
template <typename T>
struct SequenceTrace {
  int steps = 0;
  std::vector<const FeatureRow*> inputs;
  std::vector<std::vector<T>> it_out;
  std::vector<LstmStep<T>> cells;
  std::vector<std::array<T, 2>> probs;
};

/// One IT -> LSTM -> OT -> softmax step. Offline passes and streaming
/// sessions both go through here so their arithmetic is identical.
template <typename T>
std::array<T, 2> forward_step(const Network<T>& net, const FeatureRow& row, std::span<const T> h_prev,
                              std::span<const T> c_prev, std::vector<T>& it_out, LstmStep<T>& cell) {
  it_out.resize(static_cast<std::size_t>(net.it.out()));
  dense_forward_sparse<T>(row, net.it, it_out);
  lstm_step<T>(it_out, h_prev, c_prev, net.lstm, cell);
  const int hidden = net.lstm.hidden();
  std::array<T, 2> logits{net.ot.b[0] + dot(net.ot.W.row(0), cell.h.data(), hidden),
                          net.ot.b[1] + dot(net.ot.W.row(1), cell.h.data(), hidden)};
  return softmax2(logits);
}

/// Runs IT -> LSTM -> OT -> softmax over the first `steps` rows.
template <typename T>
void forward_sequence(const Network<T>& net, std::span<const FeatureRow> rows, int steps, SequenceTrace<T>& trace) {
  if (steps < 0 || steps > static_cast<int>(rows.size()))
    fail(ErrorCode::ShapeMismatch, "forward over more steps than the sequence holds");
  const int hidden = net.lstm.hidden();
  const int it_dim = net.it.out();
  if (net.lstm.in() != it_dim || net.ot.in() != hidden || net.ot.out() != 2)
    fail(ErrorCode::ShapeMismatch, "network blocks have inconsistent dimensions");
  trace.steps = steps;
  trace.inputs.resize(static_cast<std::size_t>(steps));
  trace.it_out.resize(static_cast<std::size_t>(steps));
  trace.cells.resize(static_cast<std::size_t>(steps));
  trace.probs.resize(static_cast<std::size_t>(steps));
  const std::vector<T> zeros(static_cast<std::size_t>(hidden), T(0));
  for (int t = 0; t < steps; ++t) {
    trace.inputs[t] = &rows[t];
    std::span<const T> h_prev = t == 0 ? std::span<const T>(zeros) : std::span<const T>(trace.cells[t - 1].h);
    std::span<const T> c_prev = t == 0 ? std::span<const T>(zeros) : std::span<const T>(trace.cells[t - 1].c);
    trace.probs[t] = forward_step<T>(net, rows[t], h_prev, c_prev, trace.it_out[t], trace.cells[t]);
  }
}

/// Exact BPTT. `logit_grads[t]` is dL/dlogits at step t (zero where the step
/// carries no loss). Gradients are accumulated into `grad`.
template <typename T>
void backward_sequence(const SequenceTrace<T>& trace, std::span<const std::array<T, 2>> logit_grads,
                       const Network<T>& net, Network<T>& grad) {
  if (trace.steps == 0 || static_cast<int>(trace.cells.size()) < trace.steps ||
      static_cast<int>(trace.it_out.size()) < trace.steps)
    fail(ErrorCode::CacheMissing, "backward_sequence needs a completed forward pass");
  if (static_cast<int>(logit_grads.size()) != trace.steps)
    fail(ErrorCode::ShapeMismatch, "one logit gradient per executed step is required");
  const int hidden = net.lstm.hidden();
  const int it_dim = net.it.out();
  const int in = net.it.in();

  std::vector<T> dh(hidden), dc(hidden), dh_next(hidden, T(0)), dc_next(hidden, T(0));
  std::vector<T> dz[4];
  for (auto& v : dz) v.resize(static_cast<std::size_t>(hidden));
  std::vector<T> da(static_cast<std::size_t>(it_dim));
  const std::vector<T> zeros(static_cast<std::size_t>(hidden), T(0));

  for (int t = trace.steps - 1; t >= 0; --t) {
    const auto& cell = trace.cells[t];
    const auto& h_prev = t == 0 ? zeros : trace.cells[t - 1].h;
    const auto& c_prev = t == 0 ? zeros : trace.cells[t - 1].c;

    dh = dh_next;
    const auto& gl = logit_grads[t];
    for (int n = 0; n < 2; ++n) {
      if (gl[n] == T(0)) continue;
      grad.ot.b[n] += gl[n];
      axpy(gl[n], cell.h.data(), grad.ot.W.row(n), hidden);
      axpy(gl[n], net.ot.W.row(n), dh.data(), hidden);
    }

    for (int k = 0; k < hidden; ++k) {
      const T d_o = dh[k] * cell.tanh_c[k];
      dc[k] = dc_next[k] + dh[k] * cell.o[k] * (T(1) - cell.tanh_c[k] * cell.tanh_c[k]);
      const T d_i = dc[k] * cell.g[k];
      const T d_g = dc[k] * cell.i[k];
      const T d_f = dc[k] * c_prev[k];
      dc_next[k] = dc[k] * cell.f[k];
      dz[kInputGate][k] = d_i * cell.i[k] * (T(1) - cell.i[k]);
      dz[kForgetGate][k] = d_f * cell.f[k] * (T(1) - cell.f[k]);
      dz[kOutputGate][k] = d_o * cell.o[k] * (T(1) - cell.o[k]);
      dz[kCandidateGate][k] = d_g * (T(1) - cell.g[k] * cell.g[k]);
    }

    const auto& a = trace.it_out[t];
    std::fill(da.begin(), da.end(), T(0));
    std::fill(dh_next.begin(), dh_next.end(), T(0));
    for (int g = 0; g < 4; ++g) {
      const auto& gate = net.lstm.gates[g];
      auto& ggrad = grad.lstm.gates[g];
      for (int k = 0; k < hidden; ++k) {
        const T d = dz[g][k];
        if (d == T(0)) continue;
        ggrad.b[k] += d;
        axpy(d, a.data(), ggrad.W.row(k), it_dim);
        axpy(d, h_prev.data(), ggrad.U.row(k), hidden);
        axpy(d, gate.W.row(k), da.data(), it_dim);
        axpy(d, gate.U.row(k), dh_next.data(), hidden);
      }
    }

    const FeatureRow& x = *trace.inputs[t];
    for (int i = 0; i < it_dim; ++i) {
      const T dpre = da[i] * activation_grad(net.it.activation, a[i]);
      if (dpre == T(0)) continue;
      grad.it.b[i] += dpre;
      T* wrow = grad.it.W.row(i);
      for (const auto& e : x) wrow[e.index] += dpre * static_cast<T>(e.value);
    }
    (void)in;
  }
}

// ---------------------------------------------------------------------------
// Gradient utilities
// ---------------------------------------------------------------------------

template <typename T>
double global_norm(const Network<T>& g) {
  double sq = 0.0;
  for_each_tensor(g, [&sq](const std::string&, std::span<const T> s, TensorShape) {
    for (T v : s) sq += static_cast<double>(v) * static_cast<double>(v);
  });
  return std::sqrt(sq);
}

/// Rescales to `max_norm` when the global L2 norm exceeds it. Returns the
/// norm before clipping.
template <typename T>
double clip_gradients(Network<T>& g, double max_norm) {
  if (!(max_norm > 0.0)) fail(ErrorCode::InvalidArgument, "clip norm must be positive");
  const double norm = global_norm(g);
  if (norm > max_norm) {
    const T scale = static_cast<T>(max_norm / norm);
    for_each_tensor(g, [scale](const std::string&, std::span<T> s, TensorShape) {
      for (T& v : s) v *= scale;
    });
  }
  return norm;
}

template <typename T>
void scale_gradients(Network<T>& g, T factor) {
  for_each_tensor(g, [factor](const std::string&, std::span<T> s, TensorShape) {
    for (T& v : s) v *= factor;
  });
}

/// grad += other, tensor by tensor in visiting order.
template <typename T>
void accumulate(Network<T>& grad, const Network<T>& other) {
  std::vector<std::span<const T>> src;
  for_each_tensor(other, [&src](const std::string&, std::span<const T> s, TensorShape) { src.push_back(s); });
  std::size_t n = 0;
  for_each_tensor(grad, [&](const std::string&, std::span<T> s, TensorShape) {
    const auto o = src[n++];
    if (o.size() != s.size()) fail(ErrorCode::ShapeMismatch, "gradient shapes differ");
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += o[i];
  });
}

// ---------------------------------------------------------------------------
// Adaptive-moment optimizer
// ---------------------------------------------------------------------------

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected update of a flat tensor; `step` is the 1-based count
/// after incrementing.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, long step,
                 const AdamHyper& h) {
  if (param.size() != grad.size() || param.size() != m.size() || param.size() != v.size())
    fail(ErrorCode::ShapeMismatch, "adam_update tensors differ in size");
  if (!(h.lr > 0.0)) fail(ErrorCode::InvalidArgument, "learning rate must be positive");
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(h.beta1, static_cast<double>(step)));
  const T c2 = static_cast<T>(1.0 - std::pow(h.beta2, static_cast<double>(step)));
  const T lr = static_cast<T>(h.lr);
  const T eps = static_cast<T>(h.epsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * grad[i];
    v[i] = b2 * v[i] + (T(1) - b2) * grad[i] * grad[i];
    const T mhat = m[i] / c1;
    const T vhat = v[i] / c2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <typename T>
struct OptimizerState {
  Network<T> m;
  Network<T> v;
  long step = 0;
  AdamHyper hyper;
};

template <typename T>
OptimizerState<T> make_optimizer(const Network<T>& params, const AdamHyper& hyper) {
  return {zeros_like(params), zeros_like(params), 0, hyper};
}

template <typename T>
void adam_step(Network<T>& params, const Network<T>& grads, OptimizerState<T>& state) {
  if (parameter_count(params) != parameter_count(grads) || parameter_count(params) != parameter_count(state.m))
    fail(ErrorCode::ShapeMismatch, "adam_step shapes differ");
  ++state.step;
  std::vector<std::span<const T>> g;
  std::vector<std::span<T>> m, v;
  for_each_tensor(grads, [&g](const std::string&, std::span<const T> s, TensorShape) { g.push_back(s); });
  for_each_tensor(state.m, [&m](const std::string&, std::span<T> s, TensorShape) { m.push_back(s); });
  for_each_tensor(state.v, [&v](const std::string&, std::span<T> s, TensorShape) { v.push_back(s); });
  std::size_t n = 0;
  for_each_tensor(params, [&](const std::string&, std::span<T> p, TensorShape) {
    adam_update<T>(p, g[n], m[n], v[n], state.step, state.hyper);
    ++n;
  });
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check
// ---------------------------------------------------------------------------

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t min_coords = 200;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_coord = 0;
  std::size_t coords_checked = 0;
};

/// Central differences on a random subset of at least `min_coords`
/// coordinates (all of them when there are fewer); relative error is
/// |a - n| / max(|a|, |n|, 1e-8). The loss may be evaluated in extended
/// precision; the difference quotient is formed in long double.
inline GradCheckResult grad_check(std::vector<double> theta,
                                  const std::function<long double(const std::vector<double>&)>& loss,
                                  const std::vector<double>& analytic, const GradCheckOptions& opt = {}) {
  if (analytic.size() != theta.size()) fail(ErrorCode::ShapeMismatch, "analytic gradient size differs");
  std::vector<std::size_t> coords(theta.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (coords.size() > opt.min_coords) {
    Rng rng(opt.seed);
    for (std::size_t i = 0; i < opt.min_coords; ++i)
      std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
    coords.resize(opt.min_coords);
  }
  GradCheckResult result;
  result.coords_checked = coords.size();
  for (std::size_t k : coords) {
    const double saved = theta[k];
    const double hi = saved + opt.eps;
    const double lo = saved - opt.eps;
    theta[k] = hi;
    const long double up = loss(theta);
    theta[k] = lo;
    const long double down = loss(theta);
    theta[k] = saved;
    const double numeric =
        static_cast<double>((up - down) / (static_cast<long double>(hi) - static_cast<long double>(lo)));
    const double a = analytic[k];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_coord = k;
    }
  }
  return result;
}

}  // namespace cricwin::nn
