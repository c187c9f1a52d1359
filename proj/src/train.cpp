#include "alstm/train.hpp"

#include "alstm/container_io.hpp"
#include "alstm/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

namespace alstm {

using nlohmann::json;

namespace {

constexpr std::string_view kCheckpointFormat = "alstm-checkpoint";
constexpr int kCheckpointVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json arch_to_json(const ArchitectureConfig& arch) {
  return {{"n_window", arch.n_window},
          {"input_dim", arch.input_dim},
          {"lstm_units", arch.lstm_units},
          {"open_lstm_layers", arch.open_lstm_layers},
          {"dense_hidden", arch.dense_hidden},
          {"dropout_rate", arch.dropout_rate}};
}

ArchitectureConfig arch_from_json(const json& j) {
  ArchitectureConfig arch;
  arch.n_window = j.at("n_window").get<Index>();
  arch.input_dim = j.at("input_dim").get<Index>();
  arch.lstm_units = j.at("lstm_units").get<Index>();
  arch.open_lstm_layers = j.at("open_lstm_layers").get<Index>();
  arch.dense_hidden = j.at("dense_hidden").get<Index>();
  arch.dropout_rate = j.at("dropout_rate").get<Scalar>();
  return arch;
}

// The worker count is an execution detail, not training state: identical
// runs with different worker counts must produce identical checkpoints, so
// it stays out of the snapshot.
json config_to_json(const TrainingConfig& config) {
  return {{"learning_rate", config.learning_rate},
          {"epochs", config.epochs},
          {"batch_size", config.batch_size},
          {"seed", config.seed},
          {"checkpoint_every", config.checkpoint_every},
          {"adam_beta1", config.adam_beta1},
          {"adam_beta2", config.adam_beta2},
          {"adam_epsilon", config.adam_epsilon},
          {"arch", arch_to_json(config.arch)}};
}

TrainingConfig config_from_json(const json& j) {
  TrainingConfig config;
  config.learning_rate = j.at("learning_rate").get<Scalar>();
  config.epochs = j.at("epochs").get<int>();
  config.batch_size = j.at("batch_size").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.checkpoint_every = j.at("checkpoint_every").get<int>();
  config.adam_beta1 = j.at("adam_beta1").get<Scalar>();
  config.adam_beta2 = j.at("adam_beta2").get<Scalar>();
  config.adam_epsilon = j.at("adam_epsilon").get<Scalar>();
  config.arch = arch_from_json(j.at("arch"));
  return config;
}

// JSON has no NaN literal; nlohmann emits null for non-finite numbers.
Scalar number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<Scalar>::quiet_NaN() : j.get<Scalar>();
}

json normalization_to_json(const std::map<std::string, NormalizationParams>& normalization) {
  json out = json::object();
  for (const auto& [ticker, params] : normalization) {
    out[ticker] = {{"min", std::vector<Scalar>(params.min.begin(), params.min.end())},
                   {"max", std::vector<Scalar>(params.max.begin(), params.max.end())}};
  }
  return out;
}

std::map<std::string, NormalizationParams> normalization_from_json(const json& j) {
  std::map<std::string, NormalizationParams> out;
  for (const auto& [ticker, entry] : j.items()) {
    NormalizationParams params;
    const auto mins = entry.at("min").get<std::vector<Scalar>>();
    const auto maxs = entry.at("max").get<std::vector<Scalar>>();
    params.min = Eigen::Map<const Vector>(mins.data(), static_cast<Index>(mins.size()));
    params.max = Eigen::Map<const Vector>(maxs.data(), static_cast<Index>(maxs.size()));
    out.emplace(ticker, std::move(params));
  }
  return out;
}

std::string checkpoint_filename(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "checkpoint-%04d.ckpt", epoch);
  return buf;
}

void zero_network(std::vector<TensorRef>& refs) {
  for (auto& ref : refs) Eigen::Map<Vector>(ref.data, ref.size).setZero();
}

Scalar validation_loss(const AssociatedNetwork& net, const std::vector<WindowedSample>& samples) {
  const DropoutMasks masks = identity_masks(net.arch);
  Scalar sum = 0;
  for (const auto& sample : samples) {
    sum += assoc_loss(assoc_forward(sample.inputs, net, masks), sample.targets);
  }
  return sum / static_cast<Scalar>(samples.size());
}

}  // namespace

void TrainingConfig::validate() const {
  if (learning_rate <= 0) throw ConfigError("learning rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (checkpoint_every < 1) throw ConfigError("checkpoint cadence must be >= 1");
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  arch.validate();
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  json manifest;
  manifest["format"] = std::string(kCheckpointFormat);
  manifest["version"] = kCheckpointVersion;
  manifest["epoch"] = checkpoint.epoch;
  manifest["val_mse"] = checkpoint.val_mse;
  manifest["config"] = config_to_json(checkpoint.config);
  manifest["tickers"] = checkpoint.tickers;
  manifest["normalization"] = normalization_to_json(checkpoint.normalization);
  manifest["adam_t"] = checkpoint.adam.t;

  auto& network = const_cast<AssociatedNetwork&>(checkpoint.network);
  std::vector<std::pair<std::string, std::span<const Scalar>>> tensors;
  for (const auto& ref : parameter_refs(network)) {
    tensors.emplace_back(ref.name, std::span<const Scalar>(ref.data, static_cast<std::size_t>(ref.size)));
  }
  tensors.emplace_back("adam.m", std::span<const Scalar>(checkpoint.adam.m.data(),
                                                         static_cast<std::size_t>(checkpoint.adam.m.size())));
  tensors.emplace_back("adam.v", std::span<const Scalar>(checkpoint.adam.v.data(),
                                                         static_cast<std::size_t>(checkpoint.adam.v.size())));
  write_container(path, std::move(manifest), tensors);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Container container = read_container(path, kCheckpointFormat, kCheckpointVersion);
  const json& manifest = container.manifest;

  Checkpoint checkpoint;
  checkpoint.epoch = manifest.at("epoch").get<int>();
  checkpoint.val_mse = number_or_nan(manifest.at("val_mse"));
  checkpoint.config = config_from_json(manifest.at("config"));
  checkpoint.tickers = manifest.at("tickers").get<std::vector<std::string>>();
  checkpoint.normalization = normalization_from_json(manifest.at("normalization"));

  checkpoint.network = zero_network(checkpoint.config.arch);
  for (auto& ref : parameter_refs(checkpoint.network)) {
    const auto it = container.tensors.find(ref.name);
    if (it == container.tensors.end()) {
      throw CorruptionError(path.string() + ": missing tensor '" + ref.name + "'");
    }
    if (static_cast<Index>(it->second.size()) != ref.size) {
      throw CorruptionError(path.string() + ": tensor '" + ref.name + "' has wrong size");
    }
    std::copy(it->second.begin(), it->second.end(), ref.data);
  }

  const auto& m = container.tensors.at("adam.m");
  const auto& v = container.tensors.at("adam.v");
  checkpoint.adam.m = Eigen::Map<const Vector>(m.data(), static_cast<Index>(m.size()));
  checkpoint.adam.v = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  checkpoint.adam.t = manifest.at("adam_t").get<std::int64_t>();
  return checkpoint;
}

TrainingHistory train(const SplitDataset& dataset, const TrainingConfig& config,
                      const std::filesystem::path& out_dir) {
  config.validate();
  if (dataset.train.empty()) throw NoDataError("training partition is empty");
  if (dataset.validation.empty()) throw NoDataError("validation partition is empty");
  if (dataset.n_window != config.arch.n_window) {
    throw ConfigError("dataset window " + std::to_string(dataset.n_window) +
                      " != configured window " + std::to_string(config.arch.n_window));
  }
  if (dataset.train.front().inputs.cols() != config.arch.input_dim) {
    throw ConfigError("dataset feature count " +
                      std::to_string(dataset.train.front().inputs.cols()) +
                      " != configured input dim " + std::to_string(config.arch.input_dim));
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream history_csv(out_dir / "history.csv", std::ios::trunc);
  std::ofstream timing_csv(out_dir / "timing.csv", std::ios::trunc);
  if (!history_csv || !timing_csv) throw Error("cannot write into " + out_dir.string());
  history_csv << "epoch,train_mse,val_mse\n";
  timing_csv << "epoch,seconds\n";

  std::mt19937_64 init_rng(config.seed);
  AssociatedNetwork network = make_network(config.arch, init_rng);
  auto param_refs = parameter_refs(network);

  Index total_params = 0;
  for (const auto& ref : param_refs) total_params += ref.size;
  AdamState adam = AdamState::zero(total_params);
  const AdamConfig adam_config{config.learning_rate, config.adam_beta1, config.adam_beta2,
                               config.adam_epsilon};

  const std::size_t n_train = dataset.train.size();
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  const std::size_t max_batch = std::min(batch_size, n_train);

  // Per-sample gradient buffers; reduction always runs in sample-index
  // order, so the result is independent of the worker count.
  std::vector<AssociatedNetwork> sample_grads;
  sample_grads.reserve(max_batch);
  for (std::size_t i = 0; i < max_batch; ++i) sample_grads.push_back(zeros_like(network));
  std::vector<std::vector<TensorRef>> sample_grad_refs;
  for (auto& grad : sample_grads) sample_grad_refs.push_back(parameter_refs(grad));

  AssociatedNetwork batch_grad = zeros_like(network);
  auto batch_grad_refs = parameter_refs(batch_grad);

  TrainingHistory history;
  std::vector<std::size_t> order(n_train);
  for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();

    std::mt19937_64 shuffle_rng(splitmix64(config.seed + 2 * static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 mask_rng(splitmix64(config.seed + 2 * static_cast<std::uint64_t>(epoch) + 1));

    Scalar epoch_loss_sum = 0;
    for (std::size_t batch_start = 0; batch_start < n_train; batch_start += batch_size) {
      const std::size_t batch_n = std::min(batch_size, n_train - batch_start);

      // Masks are drawn on this thread, in batch order.
      std::vector<DropoutMasks> masks;
      masks.reserve(batch_n);
      for (std::size_t k = 0; k < batch_n; ++k) {
        masks.push_back(sample_masks(config.arch, mask_rng));
      }

      std::vector<Scalar> losses(batch_n, 0);
      auto process_sample = [&](std::size_t k) {
        const WindowedSample& sample = dataset.train[order[batch_start + k]];
        zero_network(sample_grad_refs[k]);
        AssocForwardCache cache;
        const Vector3 prediction = assoc_forward(sample.inputs, network, masks[k], &cache);
        losses[k] = assoc_loss(prediction, sample.targets);
        assoc_backward(network, masks[k], cache, assoc_loss_grad(prediction, sample.targets),
                       sample_grads[k]);
      };

      const int workers = std::min<int>(config.threads, static_cast<int>(batch_n));
      if (workers <= 1) {
        for (std::size_t k = 0; k < batch_n; ++k) process_sample(k);
      } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
          pool.emplace_back([&]() {
            for (std::size_t k = next.fetch_add(1); k < batch_n; k = next.fetch_add(1)) {
              process_sample(k);
            }
          });
        }
        for (auto& worker : pool) worker.join();
      }

      Scalar batch_loss = 0;
      for (std::size_t k = 0; k < batch_n; ++k) batch_loss += losses[k];
      epoch_loss_sum += batch_loss;
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch));
      }

      zero_network(batch_grad_refs);
      for (std::size_t k = 0; k < batch_n; ++k) {
        for (std::size_t r = 0; r < batch_grad_refs.size(); ++r) {
          Eigen::Map<Vector>(batch_grad_refs[r].data, batch_grad_refs[r].size) +=
              Eigen::Map<const Vector>(sample_grad_refs[k][r].data, sample_grad_refs[k][r].size);
        }
      }
      const Scalar inv_batch = 1.0 / static_cast<Scalar>(batch_n);
      for (auto& ref : batch_grad_refs) {
        Eigen::Map<Vector>(ref.data, ref.size) *= inv_batch;
      }
      adam_step(param_refs, batch_grad_refs, adam, adam_config);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_mse = epoch_loss_sum / static_cast<Scalar>(n_train);
    stats.val_mse = validation_loss(network, dataset.validation);
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    history.epochs.push_back(stats);

    char line[128];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", epoch, stats.train_mse, stats.val_mse);
    history_csv << line << std::flush;
    timing_csv << epoch << ',' << stats.seconds << '\n' << std::flush;

    if (epoch % config.checkpoint_every == 0 || epoch == config.epochs) {
      Checkpoint checkpoint;
      checkpoint.epoch = epoch;
      checkpoint.val_mse = stats.val_mse;
      checkpoint.config = config;
      checkpoint.network = network;
      checkpoint.adam = adam;
      checkpoint.normalization = dataset.normalization;
      checkpoint.tickers = dataset.tickers;
      save_checkpoint(checkpoint, out_dir / checkpoint_filename(epoch));
    }
  }
  return history;
}

std::filesystem::path select_best_path(const std::filesystem::path& checkpoint_dir) {
  struct Candidate {
    std::filesystem::path path;
    int epoch;
    Scalar val_mse;
  };
  std::vector<Candidate> candidates;
  if (std::filesystem::is_directory(checkpoint_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(checkpoint_dir)) {
      const std::string name = entry.path().filename().string();
      if (!name.starts_with("checkpoint-") || !name.ends_with(".ckpt")) continue;
      const json manifest =
          read_container_manifest(entry.path(), kCheckpointFormat, kCheckpointVersion);
      candidates.push_back(
          {entry.path(), manifest.at("epoch").get<int>(), number_or_nan(manifest.at("val_mse"))});
    }
  }
  if (candidates.empty()) {
    throw NoDataError("no checkpoints found in " + checkpoint_dir.string());
  }
  // NaN validation losses (possible after a poisoned run) rank last.
  const auto rank = [](const Candidate& c) {
    return std::isnan(c.val_mse) ? std::numeric_limits<Scalar>::infinity() : c.val_mse;
  };
  const auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [&](const Candidate& a, const Candidate& b) {
                                       if (rank(a) != rank(b)) return rank(a) < rank(b);
                                       return a.epoch < b.epoch;
                                     });
  return best->path;
}

Checkpoint select_best(const std::filesystem::path& checkpoint_dir) {
  return load_checkpoint(select_best_path(checkpoint_dir));
}

}  // namespace alstm
