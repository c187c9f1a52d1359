#pragma once

#include "alstm/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace alstm {

/// Numerically stable logistic function, exact for |x| beyond exp overflow.
Scalar sigmoid(Scalar x);
Vector sigmoid(const Vector& x);

enum class Activation { Rectifier, Identity };

struct DenseLayerParams {
  Matrix W;  // out x in
  Vector b;  // out
  Activation activation = Activation::Identity;

  static DenseLayerParams zeros(Index out, Index in, Activation activation);
  Index out_dim() const { return W.rows(); }
  Index in_dim() const { return W.cols(); }
};

/// Gate weights operate on the concatenation [x_t; h_{t-1}].
struct LstmLayerParams {
  Matrix Wf, Wi, Wo, Wc;  // units x (input_dim + units)
  Vector bf, bi, bo, bc;  // units

  static LstmLayerParams zeros(Index units, Index input_dim);
  Index units() const { return Wf.rows(); }
  Index input_dim() const { return Wf.cols() - Wf.rows(); }
};

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zero(Index units);
};

/// Per-unit dropout mask applied to the candidate-cell contribution,
/// sampled once per sequence. Entries are 0 or 1/(1-rate) at train time,
/// all ones at inference.
struct DropoutMask {
  Vector scale;

  static DropoutMask identity(Index units);
  static DropoutMask sample(Index units, Scalar rate, std::mt19937_64& rng);
};

struct LstmStepCache {
  Vector gate_input;  // [x_t; h_{t-1}]
  Vector c_prev;
  Vector f, i, o, c_hat;
  Vector c, tanh_c;
};

struct LstmSequenceCache {
  std::vector<LstmStepCache> steps;
};

/// One step of the gated cell:
///   f = sigma(Wf [x;h] + bf), i = sigma(Wi [x;h] + bi),
///   o = sigma(Wo [x;h] + bo), chat = tanh(Wc [x;h] + bc),
///   c = f . c_prev + i . (mask . chat), h = o . tanh(c).
LstmState lstm_cell_forward(const Vector& x, const LstmState& prev,
                            const LstmLayerParams& params, const DropoutMask& mask,
                            LstmStepCache* cache = nullptr);

struct LstmForwardResult {
  Matrix hidden;  // T x units, one row per step
  LstmState final_state;
};

/// Runs the cell over a T x input_dim sequence from a zero initial state;
/// the mask stays fixed across all steps. Throws on an empty sequence.
LstmForwardResult lstm_layer_forward(const Matrix& sequence, const LstmLayerParams& params,
                                     const DropoutMask& mask,
                                     LstmSequenceCache* cache = nullptr);

/// Reverse-mode pass through all steps. d_hidden holds the loss gradient on
/// every hidden-state row; parameter gradients accumulate into grads.
/// Returns the gradient on the input sequence (T x input_dim).
Matrix lstm_layer_backward(const LstmLayerParams& params, const DropoutMask& mask,
                           const LstmSequenceCache& cache, const Matrix& d_hidden,
                           LstmLayerParams& grads);

struct DenseCache {
  Vector x;
  Vector z;  // pre-activation
};

Vector dense_forward(const Vector& x, const DenseLayerParams& params,
                     DenseCache* cache = nullptr);

/// Accumulates parameter gradients into grads; returns the gradient on x.
Vector dense_backward(const DenseLayerParams& params, const DenseCache& cache,
                      const Vector& d_out, DenseLayerParams& grads);

// ---------------------------------------------------------------------------
// Initialization

/// Uniform Glorot fan-based scaling: limit sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Index rows, Index cols, std::mt19937_64& rng);

/// Orthonormal square matrix from the QR of a Gaussian draw, sign-fixed so
/// the result is unique.
Matrix orthogonal(Index size, std::mt19937_64& rng);

/// Glorot input blocks, orthogonal recurrent blocks, forget bias 1,
/// remaining biases 0.
LstmLayerParams init_lstm_params(Index units, Index input_dim, std::mt19937_64& rng);
DenseLayerParams init_dense_params(Index out, Index in, Activation activation,
                                   std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Flat parameter views (shared by ADAM, checkpoints, gradient checking)

struct TensorRef {
  std::string name;
  Scalar* data = nullptr;
  Index size = 0;
};

void append_refs(std::vector<TensorRef>& refs, const std::string& prefix, LstmLayerParams& p);
void append_refs(std::vector<TensorRef>& refs, const std::string& prefix, DenseLayerParams& p);

// ---------------------------------------------------------------------------
// ADAM

struct AdamConfig {
  Scalar learning_rate = 6e-4;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
};

struct AdamState {
  Vector m;
  Vector v;
  std::int64_t t = 0;

  static AdamState zero(Index total_params);
};

/// Standard bias-corrected ADAM update, applied through the parameter refs
/// in order. Throws DivergenceError on a non-finite gradient.
void adam_step(std::span<const TensorRef> params, std::span<const TensorRef> grads,
               AdamState& state, const AdamConfig& config);

// ---------------------------------------------------------------------------
// Gradient verification

struct GradientCheckReport {
  Scalar max_relative_error = 0;
  std::string worst_tensor;
  Index worst_index = 0;
  Scalar analytic = 0;
  Scalar numeric = 0;
};

/// Central-difference check of analytic gradients, parameter by parameter.
/// loss() must recompute the scalar loss from the current parameter values.
/// Relative error uses a small denominator floor so components that are
/// exactly zero compare as zero against finite-difference roundoff.
GradientCheckReport gradient_check(std::span<const TensorRef> params,
                                   std::span<const TensorRef> analytic_grads,
                                   const std::function<Scalar()>& loss, Scalar step);

}  // namespace alstm
