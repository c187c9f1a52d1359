#include "alstm/lstm.hpp"

#include "alstm/errors.hpp"

#include <cmath>

namespace alstm {

Scalar sigmoid(Scalar x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const Scalar e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& x) {
  return x.unaryExpr([](Scalar v) { return sigmoid(v); });
}

DenseLayerParams DenseLayerParams::zeros(Index out, Index in, Activation activation) {
  DenseLayerParams p;
  p.W = Matrix::Zero(out, in);
  p.b = Vector::Zero(out);
  p.activation = activation;
  return p;
}

LstmLayerParams LstmLayerParams::zeros(Index units, Index input_dim) {
  LstmLayerParams p;
  const Index cols = input_dim + units;
  p.Wf = Matrix::Zero(units, cols);
  p.Wi = Matrix::Zero(units, cols);
  p.Wo = Matrix::Zero(units, cols);
  p.Wc = Matrix::Zero(units, cols);
  p.bf = Vector::Zero(units);
  p.bi = Vector::Zero(units);
  p.bo = Vector::Zero(units);
  p.bc = Vector::Zero(units);
  return p;
}

LstmState LstmState::zero(Index units) {
  return {Vector::Zero(units), Vector::Zero(units)};
}

DropoutMask DropoutMask::identity(Index units) {
  return {Vector::Ones(units)};
}

DropoutMask DropoutMask::sample(Index units, Scalar rate, std::mt19937_64& rng) {
  if (rate < 0 || rate >= 1) throw ConfigError("dropout rate must be in [0, 1)");
  if (rate == 0) return identity(units);
  std::uniform_real_distribution<Scalar> uniform(0.0, 1.0);
  DropoutMask mask;
  mask.scale = Vector::Zero(units);
  const Scalar keep_scale = 1.0 / (1.0 - rate);
  for (Index i = 0; i < units; ++i) {
    mask.scale[i] = uniform(rng) < rate ? 0.0 : keep_scale;
  }
  return mask;
}

LstmState lstm_cell_forward(const Vector& x, const LstmState& prev,
                            const LstmLayerParams& params, const DropoutMask& mask,
                            LstmStepCache* cache) {
  const Index units = params.units();
  const Index input_dim = params.input_dim();
  if (x.size() != input_dim || prev.h.size() != units || prev.c.size() != units ||
      mask.scale.size() != units) {
    throw DimensionError("lstm_cell_forward: inconsistent shapes");
  }

  Vector gate_input(input_dim + units);
  gate_input << x, prev.h;

  const Vector f = sigmoid(params.Wf * gate_input + params.bf);
  const Vector i = sigmoid(params.Wi * gate_input + params.bi);
  const Vector o = sigmoid(params.Wo * gate_input + params.bo);
  const Vector c_hat = (params.Wc * gate_input + params.bc).array().tanh();

  LstmState next;
  next.c = f.cwiseProduct(prev.c) + i.cwiseProduct(mask.scale.cwiseProduct(c_hat));
  const Vector tanh_c = next.c.array().tanh();
  next.h = o.cwiseProduct(tanh_c);

  if (cache) {
    cache->gate_input = std::move(gate_input);
    cache->c_prev = prev.c;
    cache->f = f;
    cache->i = i;
    cache->o = o;
    cache->c_hat = c_hat;
    cache->c = next.c;
    cache->tanh_c = tanh_c;
  }
  return next;
}

LstmForwardResult lstm_layer_forward(const Matrix& sequence, const LstmLayerParams& params,
                                     const DropoutMask& mask, LstmSequenceCache* cache) {
  const Index steps = sequence.rows();
  if (steps == 0) throw Error("lstm_layer_forward: empty sequence");
  if (sequence.cols() != params.input_dim()) {
    throw DimensionError("lstm_layer_forward: sequence width " +
                         std::to_string(sequence.cols()) + " != layer input dim " +
                         std::to_string(params.input_dim()));
  }

  if (cache) cache->steps.resize(static_cast<std::size_t>(steps));

  LstmForwardResult result;
  result.hidden.resize(steps, params.units());
  LstmState state = LstmState::zero(params.units());
  for (Index t = 0; t < steps; ++t) {
    LstmStepCache* step_cache = cache ? &cache->steps[static_cast<std::size_t>(t)] : nullptr;
    state = lstm_cell_forward(sequence.row(t).transpose(), state, params, mask, step_cache);
    result.hidden.row(t) = state.h.transpose();
  }
  result.final_state = std::move(state);
  return result;
}

Matrix lstm_layer_backward(const LstmLayerParams& params, const DropoutMask& mask,
                           const LstmSequenceCache& cache, const Matrix& d_hidden,
                           LstmLayerParams& grads) {
  const Index steps = static_cast<Index>(cache.steps.size());
  if (steps == 0) throw Error("lstm_layer_backward: no cached forward pass");
  const Index units = params.units();
  const Index input_dim = params.input_dim();
  if (d_hidden.rows() != steps || d_hidden.cols() != units) {
    throw DimensionError("lstm_layer_backward: d_hidden shape mismatch");
  }

  Matrix d_sequence(steps, input_dim);
  Vector dh_next = Vector::Zero(units);  // gradient flowing in from step t+1
  Vector dc_next = Vector::Zero(units);

  for (Index t = steps - 1; t >= 0; --t) {
    const LstmStepCache& s = cache.steps[static_cast<std::size_t>(t)];

    const Vector dh = d_hidden.row(t).transpose() + dh_next;
    const Vector d_o = dh.cwiseProduct(s.tanh_c);
    Vector dc = dc_next;
    dc += dh.cwiseProduct(s.o)
              .cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());

    const Vector d_f = dc.cwiseProduct(s.c_prev);
    const Vector d_i = dc.cwiseProduct(mask.scale.cwiseProduct(s.c_hat));
    const Vector d_c_hat = dc.cwiseProduct(s.i).cwiseProduct(mask.scale);
    dc_next = dc.cwiseProduct(s.f);

    const Vector dz_f = d_f.cwiseProduct(s.f).cwiseProduct((1.0 - s.f.array()).matrix());
    const Vector dz_i = d_i.cwiseProduct(s.i).cwiseProduct((1.0 - s.i.array()).matrix());
    const Vector dz_o = d_o.cwiseProduct(s.o).cwiseProduct((1.0 - s.o.array()).matrix());
    const Vector dz_c = d_c_hat.cwiseProduct((1.0 - s.c_hat.array().square()).matrix());

    grads.Wf.noalias() += dz_f * s.gate_input.transpose();
    grads.Wi.noalias() += dz_i * s.gate_input.transpose();
    grads.Wo.noalias() += dz_o * s.gate_input.transpose();
    grads.Wc.noalias() += dz_c * s.gate_input.transpose();
    grads.bf += dz_f;
    grads.bi += dz_i;
    grads.bo += dz_o;
    grads.bc += dz_c;

    Vector d_gate_input = params.Wf.transpose() * dz_f;
    d_gate_input.noalias() += params.Wi.transpose() * dz_i;
    d_gate_input.noalias() += params.Wo.transpose() * dz_o;
    d_gate_input.noalias() += params.Wc.transpose() * dz_c;

    d_sequence.row(t) = d_gate_input.head(input_dim).transpose();
    dh_next = d_gate_input.tail(units);
  }
  return d_sequence;
}

Vector dense_forward(const Vector& x, const DenseLayerParams& params, DenseCache* cache) {
  if (x.size() != params.in_dim()) {
    throw DimensionError("dense_forward: input size " + std::to_string(x.size()) +
                         " != layer input dim " + std::to_string(params.in_dim()));
  }
  Vector z = params.W * x + params.b;
  if (cache) {
    cache->x = x;
    cache->z = z;
  }
  if (params.activation == Activation::Rectifier) {
    return z.cwiseMax(0.0);
  }
  return z;
}

Vector dense_backward(const DenseLayerParams& params, const DenseCache& cache,
                      const Vector& d_out, DenseLayerParams& grads) {
  Vector dz = d_out;
  if (params.activation == Activation::Rectifier) {
    for (Index i = 0; i < dz.size(); ++i) {
      if (cache.z[i] <= 0) dz[i] = 0;
    }
  }
  grads.W.noalias() += dz * cache.x.transpose();
  grads.b += dz;
  return params.W.transpose() * dz;
}

Matrix glorot_uniform(Index rows, Index cols, std::mt19937_64& rng) {
  const Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(rows + cols));
  std::uniform_real_distribution<Scalar> uniform(-limit, limit);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = uniform(rng);
  }
  return out;
}

Matrix orthogonal(Index size, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix gaussian(size, size);
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < size; ++j) gaussian(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(size, size);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < size; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

LstmLayerParams init_lstm_params(Index units, Index input_dim, std::mt19937_64& rng) {
  LstmLayerParams p = LstmLayerParams::zeros(units, input_dim);
  for (Matrix* W : {&p.Wf, &p.Wi, &p.Wo, &p.Wc}) {
    W->leftCols(input_dim) = glorot_uniform(units, input_dim, rng);
    W->rightCols(units) = orthogonal(units, rng);
  }
  p.bf.setOnes();  // open forget gates at the start of training
  return p;
}

DenseLayerParams init_dense_params(Index out, Index in, Activation activation,
                                   std::mt19937_64& rng) {
  DenseLayerParams p;
  p.W = glorot_uniform(out, in, rng);
  p.b = Vector::Zero(out);
  p.activation = activation;
  return p;
}

void append_refs(std::vector<TensorRef>& refs, const std::string& prefix, LstmLayerParams& p) {
  refs.push_back({prefix + ".Wf", p.Wf.data(), p.Wf.size()});
  refs.push_back({prefix + ".Wi", p.Wi.data(), p.Wi.size()});
  refs.push_back({prefix + ".Wo", p.Wo.data(), p.Wo.size()});
  refs.push_back({prefix + ".Wc", p.Wc.data(), p.Wc.size()});
  refs.push_back({prefix + ".bf", p.bf.data(), p.bf.size()});
  refs.push_back({prefix + ".bi", p.bi.data(), p.bi.size()});
  refs.push_back({prefix + ".bo", p.bo.data(), p.bo.size()});
  refs.push_back({prefix + ".bc", p.bc.data(), p.bc.size()});
}

void append_refs(std::vector<TensorRef>& refs, const std::string& prefix, DenseLayerParams& p) {
  refs.push_back({prefix + ".W", p.W.data(), p.W.size()});
  refs.push_back({prefix + ".b", p.b.data(), p.b.size()});
}

AdamState AdamState::zero(Index total_params) {
  return {Vector::Zero(total_params), Vector::Zero(total_params), 0};
}

void adam_step(std::span<const TensorRef> params, std::span<const TensorRef> grads,
               AdamState& state, const AdamConfig& config) {
  if (params.size() != grads.size()) throw DimensionError("adam_step: ref list mismatch");

  state.t += 1;
  const Scalar bias1 = 1.0 - std::pow(config.beta1, static_cast<Scalar>(state.t));
  const Scalar bias2 = 1.0 - std::pow(config.beta2, static_cast<Scalar>(state.t));

  Index offset = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const TensorRef& p = params[k];
    const TensorRef& g = grads[k];
    if (p.size != g.size) throw DimensionError("adam_step: tensor size mismatch at " + p.name);
    if (offset + p.size > state.m.size()) throw DimensionError("adam_step: moment state too small");

    for (Index i = 0; i < p.size; ++i) {
      const Scalar grad = g.data[i];
      if (!std::isfinite(grad)) {
        throw DivergenceError("non-finite gradient in " + p.name);
      }
      Scalar& m = state.m[offset + i];
      Scalar& v = state.v[offset + i];
      m = config.beta1 * m + (1.0 - config.beta1) * grad;
      v = config.beta2 * v + (1.0 - config.beta2) * grad * grad;
      const Scalar m_hat = m / bias1;
      const Scalar v_hat = v / bias2;
      p.data[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    offset += p.size;
  }
  if (offset != state.m.size()) throw DimensionError("adam_step: moment state size mismatch");
}

GradientCheckReport gradient_check(std::span<const TensorRef> params,
                                   std::span<const TensorRef> analytic_grads,
                                   const std::function<Scalar()>& loss, Scalar step) {
  GradientCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const TensorRef& p = params[k];
    const TensorRef& g = analytic_grads[k];
    for (Index i = 0; i < p.size; ++i) {
      const Scalar saved = p.data[i];
      p.data[i] = saved + step;
      const Scalar loss_plus = loss();
      p.data[i] = saved - step;
      const Scalar loss_minus = loss();
      p.data[i] = saved;

      const Scalar numeric = (loss_plus - loss_minus) / (2.0 * step);
      const Scalar analytic = g.data[i];
      // Floor absorbs finite-difference roundoff on components near zero.
      const Scalar denom = std::max({std::abs(analytic), std::abs(numeric), Scalar(1e-6)});
      const Scalar rel = std::abs(analytic - numeric) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_tensor = p.name;
        report.worst_index = i;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace alstm
