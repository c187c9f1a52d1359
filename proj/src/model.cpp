#include "alstm/model.hpp"

#include "alstm/errors.hpp"

namespace alstm {

void ArchitectureConfig::validate() const {
  if (n_window < 1) throw ConfigError("n_window must be >= 1");
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (lstm_units < 1) throw ConfigError("lstm_units must be >= 1");
  if (open_lstm_layers < 1) throw ConfigError("open_lstm_layers must be >= 1");
  if (dense_hidden < 1) throw ConfigError("dense_hidden must be >= 1");
  if (dropout_rate < 0 || dropout_rate >= 1) throw ConfigError("dropout rate must be in [0, 1)");
}

AssociatedNetwork make_network(const ArchitectureConfig& arch, std::mt19937_64& rng) {
  arch.validate();
  AssociatedNetwork net;
  net.arch = arch;

  for (Index layer = 0; layer < arch.open_lstm_layers; ++layer) {
    const Index in = layer == 0 ? arch.input_dim : arch.lstm_units;
    net.open_lstm.push_back(init_lstm_params(arch.lstm_units, in, rng));
  }
  net.open_hidden =
      init_dense_params(arch.dense_hidden, arch.lstm_units, Activation::Rectifier, rng);
  net.open_head = init_dense_params(1, arch.dense_hidden, Activation::Identity, rng);

  net.low_lstm = init_lstm_params(arch.lstm_units, arch.input_dim, rng);
  net.low_hidden =
      init_dense_params(arch.dense_hidden, arch.lstm_units + 1, Activation::Rectifier, rng);
  net.low_head = init_dense_params(1, arch.dense_hidden, Activation::Identity, rng);

  net.high_lstm = init_lstm_params(arch.lstm_units, arch.input_dim, rng);
  net.high_hidden =
      init_dense_params(arch.dense_hidden, arch.lstm_units + 2, Activation::Rectifier, rng);
  net.high_head = init_dense_params(1, arch.dense_hidden, Activation::Identity, rng);
  return net;
}

AssociatedNetwork zeros_like(const AssociatedNetwork& net) { return zero_network(net.arch); }

AssociatedNetwork zero_network(const ArchitectureConfig& arch) {
  arch.validate();
  AssociatedNetwork out;
  out.arch = arch;
  for (Index layer = 0; layer < arch.open_lstm_layers; ++layer) {
    const Index in = layer == 0 ? arch.input_dim : arch.lstm_units;
    out.open_lstm.push_back(LstmLayerParams::zeros(arch.lstm_units, in));
  }
  out.open_hidden =
      DenseLayerParams::zeros(arch.dense_hidden, arch.lstm_units, Activation::Rectifier);
  out.open_head = DenseLayerParams::zeros(1, arch.dense_hidden, Activation::Identity);
  out.low_lstm = LstmLayerParams::zeros(arch.lstm_units, arch.input_dim);
  out.low_hidden =
      DenseLayerParams::zeros(arch.dense_hidden, arch.lstm_units + 1, Activation::Rectifier);
  out.low_head = DenseLayerParams::zeros(1, arch.dense_hidden, Activation::Identity);
  out.high_lstm = LstmLayerParams::zeros(arch.lstm_units, arch.input_dim);
  out.high_hidden =
      DenseLayerParams::zeros(arch.dense_hidden, arch.lstm_units + 2, Activation::Rectifier);
  out.high_head = DenseLayerParams::zeros(1, arch.dense_hidden, Activation::Identity);
  return out;
}

std::vector<TensorRef> parameter_refs(AssociatedNetwork& net) {
  std::vector<TensorRef> refs;
  for (std::size_t layer = 0; layer < net.open_lstm.size(); ++layer) {
    append_refs(refs, "open_lstm." + std::to_string(layer), net.open_lstm[layer]);
  }
  append_refs(refs, "open_hidden", net.open_hidden);
  append_refs(refs, "open_head", net.open_head);
  append_refs(refs, "low_lstm", net.low_lstm);
  append_refs(refs, "low_hidden", net.low_hidden);
  append_refs(refs, "low_head", net.low_head);
  append_refs(refs, "high_lstm", net.high_lstm);
  append_refs(refs, "high_hidden", net.high_hidden);
  append_refs(refs, "high_head", net.high_head);
  return refs;
}

Index total_parameter_count(const AssociatedNetwork& net) {
  Index total = 0;
  for (const auto& ref : parameter_refs(const_cast<AssociatedNetwork&>(net))) total += ref.size;
  return total;
}

DropoutMasks identity_masks(const ArchitectureConfig& arch) {
  DropoutMasks masks;
  for (Index layer = 0; layer < arch.open_lstm_layers; ++layer) {
    masks.open.push_back(DropoutMask::identity(arch.lstm_units));
  }
  masks.low = DropoutMask::identity(arch.lstm_units);
  masks.high = DropoutMask::identity(arch.lstm_units);
  return masks;
}

DropoutMasks sample_masks(const ArchitectureConfig& arch, std::mt19937_64& rng) {
  DropoutMasks masks;
  for (Index layer = 0; layer < arch.open_lstm_layers; ++layer) {
    masks.open.push_back(DropoutMask::sample(arch.lstm_units, arch.dropout_rate, rng));
  }
  masks.low = DropoutMask::sample(arch.lstm_units, arch.dropout_rate, rng);
  masks.high = DropoutMask::sample(arch.lstm_units, arch.dropout_rate, rng);
  return masks;
}

Vector3 assoc_forward(const Matrix& inputs, const AssociatedNetwork& net,
                      const DropoutMasks& masks, AssocForwardCache* cache) {
  if (inputs.rows() != net.arch.n_window || inputs.cols() != net.arch.input_dim) {
    throw ConfigError("input window is " + std::to_string(inputs.rows()) + "x" +
                      std::to_string(inputs.cols()) + ", model expects " +
                      std::to_string(net.arch.n_window) + "x" +
                      std::to_string(net.arch.input_dim));
  }
  if (masks.open.size() != net.open_lstm.size()) {
    throw DimensionError("mask count does not match stacked layer count");
  }

  if (cache) {
    cache->open_lstm.resize(net.open_lstm.size());
    cache->open_hidden_seqs.clear();
  }

  // Open branch: stacked LSTM layers, dense head on the final hidden state.
  Matrix sequence = inputs;
  LstmState open_final;
  for (std::size_t layer = 0; layer < net.open_lstm.size(); ++layer) {
    if (cache && layer > 0) cache->open_hidden_seqs.push_back(sequence);
    LstmForwardResult result =
        lstm_layer_forward(sequence, net.open_lstm[layer], masks.open[layer],
                           cache ? &cache->open_lstm[layer] : nullptr);
    sequence = std::move(result.hidden);
    open_final = std::move(result.final_state);
  }
  const Vector open_hidden_out = dense_forward(open_final.h, net.open_hidden,
                                               cache ? &cache->open_hidden_dense : nullptr);
  const Vector open_out =
      dense_forward(open_hidden_out, net.open_head, cache ? &cache->open_head_dense : nullptr);
  const Scalar y_open = open_out[0];

  // Low branch: single preprocessing LSTM, predicted open appended to the
  // final hidden state.
  LstmForwardResult low_result =
      lstm_layer_forward(inputs, net.low_lstm, masks.low, cache ? &cache->low_lstm : nullptr);
  Vector low_concat(net.arch.lstm_units + 1);
  low_concat << low_result.final_state.h, y_open;
  if (cache) cache->low_concat = low_concat;
  const Vector low_hidden_out =
      dense_forward(low_concat, net.low_hidden, cache ? &cache->low_hidden_dense : nullptr);
  const Vector low_out =
      dense_forward(low_hidden_out, net.low_head, cache ? &cache->low_head_dense : nullptr);
  const Scalar y_low = low_out[0];

  // High branch sees both predicted prices.
  LstmForwardResult high_result =
      lstm_layer_forward(inputs, net.high_lstm, masks.high, cache ? &cache->high_lstm : nullptr);
  Vector high_concat(net.arch.lstm_units + 2);
  high_concat << high_result.final_state.h, y_open, y_low;
  if (cache) cache->high_concat = high_concat;
  const Vector high_hidden_out =
      dense_forward(high_concat, net.high_hidden, cache ? &cache->high_hidden_dense : nullptr);
  const Vector high_out =
      dense_forward(high_hidden_out, net.high_head, cache ? &cache->high_head_dense : nullptr);

  return Vector3(y_open, y_low, high_out[0]);
}

void assoc_backward(const AssociatedNetwork& net, const DropoutMasks& masks,
                    const AssocForwardCache& cache, const Vector3& d_prediction,
                    AssociatedNetwork& grads) {
  const Index units = net.arch.lstm_units;
  Scalar dy_open = d_prediction[0];
  Scalar dy_low = d_prediction[1];
  const Scalar dy_high = d_prediction[2];

  // High first: its gradient feeds the chained open/low predictions.
  const Vector d_high_hidden = dense_backward(net.high_head, cache.high_head_dense,
                                              Vector::Constant(1, dy_high), grads.high_head);
  const Vector d_high_concat =
      dense_backward(net.high_hidden, cache.high_hidden_dense, d_high_hidden, grads.high_hidden);
  dy_open += d_high_concat[units];
  dy_low += d_high_concat[units + 1];
  Matrix d_hidden = Matrix::Zero(net.arch.n_window, units);
  d_hidden.row(net.arch.n_window - 1) = d_high_concat.head(units).transpose();
  lstm_layer_backward(net.high_lstm, masks.high, cache.high_lstm, d_hidden, grads.high_lstm);

  const Vector d_low_hidden = dense_backward(net.low_head, cache.low_head_dense,
                                             Vector::Constant(1, dy_low), grads.low_head);
  const Vector d_low_concat =
      dense_backward(net.low_hidden, cache.low_hidden_dense, d_low_hidden, grads.low_hidden);
  dy_open += d_low_concat[units];
  d_hidden.setZero();
  d_hidden.row(net.arch.n_window - 1) = d_low_concat.head(units).transpose();
  lstm_layer_backward(net.low_lstm, masks.low, cache.low_lstm, d_hidden, grads.low_lstm);

  const Vector d_open_hidden = dense_backward(net.open_head, cache.open_head_dense,
                                              Vector::Constant(1, dy_open), grads.open_head);
  const Vector d_open_final =
      dense_backward(net.open_hidden, cache.open_hidden_dense, d_open_hidden, grads.open_hidden);
  Matrix d_layer = Matrix::Zero(net.arch.n_window, units);
  d_layer.row(net.arch.n_window - 1) = d_open_final.transpose();
  for (std::size_t layer = net.open_lstm.size(); layer-- > 0;) {
    d_layer = lstm_layer_backward(net.open_lstm[layer], masks.open[layer],
                                  cache.open_lstm[layer], d_layer, grads.open_lstm[layer]);
  }
}

Scalar assoc_loss(const Vector3& prediction, const Vector3& targets) {
  return (prediction - targets).squaredNorm() / 3.0;
}

Vector3 assoc_loss_grad(const Vector3& prediction, const Vector3& targets) {
  return 2.0 / 3.0 * (prediction - targets);
}

Vector3 assoc_forward(const WindowedSample& sample, const AssociatedNetwork& net, RunMode mode,
                      std::mt19937_64& rng, AssocForwardCache* cache) {
  const DropoutMasks masks =
      mode == RunMode::Train ? sample_masks(net.arch, rng) : identity_masks(net.arch);
  return assoc_forward(sample.inputs, net, masks, cache);
}

std::vector<Prediction> predict_batch(const std::vector<WindowedSample>& samples,
                                      const AssociatedNetwork& net,
                                      const std::map<std::string, NormalizationParams>& params) {
  const DropoutMasks masks = identity_masks(net.arch);
  std::vector<Prediction> predictions;
  predictions.reserve(samples.size());
  for (const auto& sample : samples) {
    const auto it = params.find(sample.ticker);
    if (it == params.end()) {
      throw MissingParamsError("no normalization params for ticker '" + sample.ticker + "'");
    }
    Prediction p;
    p.ticker = sample.ticker;
    p.target_date = sample.target_date;
    p.normalized = assoc_forward(sample.inputs, net, masks);
    p.denormalized = Vector3(invert_minmax(p.normalized[0], it->second, kOpen),
                             invert_minmax(p.normalized[1], it->second, kLow),
                             invert_minmax(p.normalized[2], it->second, kHigh));
    predictions.push_back(std::move(p));
  }
  return predictions;
}

GradientCheckReport check_network_gradients(AssociatedNetwork& net, const WindowedSample& sample,
                                            const DropoutMasks& masks, Scalar step) {
  AssocForwardCache cache;
  const Vector3 prediction = assoc_forward(sample.inputs, net, masks, &cache);
  AssociatedNetwork grads = zeros_like(net);
  assoc_backward(net, masks, cache, assoc_loss_grad(prediction, sample.targets), grads);

  const auto params = parameter_refs(net);
  const auto grad_refs = parameter_refs(grads);
  const auto loss = [&]() {
    return assoc_loss(assoc_forward(sample.inputs, net, masks), sample.targets);
  };
  return gradient_check(params, grad_refs, loss, step);
}

}  // namespace alstm
