#pragma once

#include "alstm/dataset.hpp"
#include "alstm/lstm.hpp"
#include "alstm/types.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

namespace alstm {

struct ArchitectureConfig {
  Index n_window = 7;
  Index input_dim = kFeatureCount;
  Index lstm_units = 64;
  Index open_lstm_layers = 2;  // stacked layers in the open branch
  Index dense_hidden = 32;
  Scalar dropout_rate = 0.2;

  void validate() const;
};

/// Three chained branches over the same input window: open is predicted
/// first from a stacked LSTM encoder; low sees its own LSTM encoding plus
/// the predicted open; high sees its encoding plus both predicted prices.
struct AssociatedNetwork {
  ArchitectureConfig arch;

  std::vector<LstmLayerParams> open_lstm;
  DenseLayerParams open_hidden;
  DenseLayerParams open_head;

  LstmLayerParams low_lstm;
  DenseLayerParams low_hidden;
  DenseLayerParams low_head;

  LstmLayerParams high_lstm;
  DenseLayerParams high_hidden;
  DenseLayerParams high_head;
};

AssociatedNetwork make_network(const ArchitectureConfig& arch, std::mt19937_64& rng);
AssociatedNetwork zero_network(const ArchitectureConfig& arch);
AssociatedNetwork zeros_like(const AssociatedNetwork& net);

/// Stable-order named views over every parameter tensor.
std::vector<TensorRef> parameter_refs(AssociatedNetwork& net);
Index total_parameter_count(const AssociatedNetwork& net);

/// One dropout mask per LSTM layer, drawn once per sequence.
struct DropoutMasks {
  std::vector<DropoutMask> open;
  DropoutMask low;
  DropoutMask high;
};

DropoutMasks identity_masks(const ArchitectureConfig& arch);
DropoutMasks sample_masks(const ArchitectureConfig& arch, std::mt19937_64& rng);

struct AssocForwardCache {
  std::vector<LstmSequenceCache> open_lstm;
  std::vector<Matrix> open_hidden_seqs;  // inputs to stacked layers 1..k-1
  DenseCache open_hidden_dense, open_head_dense;
  LstmSequenceCache low_lstm;
  DenseCache low_hidden_dense, low_head_dense;
  LstmSequenceCache high_lstm;
  DenseCache high_hidden_dense, high_head_dense;
  Vector low_concat, high_concat;
};

/// Normalized (open, low, high) prediction for one input window.
Vector3 assoc_forward(const Matrix& inputs, const AssociatedNetwork& net,
                      const DropoutMasks& masks, AssocForwardCache* cache = nullptr);

/// Backpropagates an arbitrary gradient on the three outputs through the
/// chained branches, accumulating parameter gradients into grads.
void assoc_backward(const AssociatedNetwork& net, const DropoutMasks& masks,
                    const AssocForwardCache& cache, const Vector3& d_prediction,
                    AssociatedNetwork& grads);

/// Mean of the three squared errors.
Scalar assoc_loss(const Vector3& prediction, const Vector3& targets);
Vector3 assoc_loss_grad(const Vector3& prediction, const Vector3& targets);

enum class RunMode { Train, Inference };

/// Train mode samples fresh per-sequence dropout masks from rng; inference
/// uses identity masks and is deterministic.
Vector3 assoc_forward(const WindowedSample& sample, const AssociatedNetwork& net, RunMode mode,
                      std::mt19937_64& rng, AssocForwardCache* cache = nullptr);

struct Prediction {
  std::string ticker;
  Date target_date;
  Vector3 normalized;    // open, low, high
  Vector3 denormalized;  // currency units via the ticker's stored params
};

/// Inference-mode predictions with denormalized prices. Throws
/// MissingParamsError for a ticker absent from the params map.
std::vector<Prediction> predict_batch(const std::vector<WindowedSample>& samples,
                                      const AssociatedNetwork& net,
                                      const std::map<std::string, NormalizationParams>& params);

/// Full-network central-difference check on one sample with fixed masks.
GradientCheckReport check_network_gradients(AssociatedNetwork& net, const WindowedSample& sample,
                                            const DropoutMasks& masks, Scalar step);

}  // namespace alstm
