#include "alstm/dataset.hpp"
#include "alstm/errors.hpp"
#include "alstm/fetch.hpp"
#include "alstm/indicators.hpp"
#include "alstm/metrics.hpp"
#include "alstm/model.hpp"
#include "alstm/ohlcv.hpp"
#include "alstm/run_config.hpp"
#include "alstm/train.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace {

using namespace alstm;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs, win over the file
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration file (key = value lines)");
  cmd->add_option("--set", opts.overrides,
                  "Override a config key, e.g. --set epochs=5 (repeatable)");
}

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig config;
  if (!opts.config_path.empty()) config = RunConfig::from_file(opts.config_path);
  for (const auto& assignment : opts.overrides) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + assignment + "'");
    }
    config.apply(assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  return config;
}

/// Cache file for the configured range, or a plain {ticker}.csv drop-in.
fs::path resolve_ticker_csv(const RunConfig& config, const std::string& ticker) {
  FetchConfig fetch_config;
  fetch_config.data_dir = config.data_dir;
  const fs::path ranged = cache_path(fetch_config, ticker, config.fetch_from, config.fetch_to);
  if (fs::exists(ranged)) return ranged;
  const fs::path plain = fs::path(config.data_dir) / (ticker + ".csv");
  if (fs::exists(plain)) return plain;
  throw NoDataError("no CSV for ticker '" + ticker + "' under " + config.data_dir +
                    " (expected " + ranged.filename().string() + " or " +
                    plain.filename().string() + ")");
}

int cmd_fetch(const CommonOpts& opts) {
  const RunConfig config = resolve_config(opts);
  FetchConfig fetch_config;
  fetch_config.endpoint = config.endpoint;
  fetch_config.data_dir = config.data_dir;
  fetch_config.offline = config.offline;

  int failures = 0;
  for (const auto& ticker : config.tickers) {
    try {
      const TickerHistory history =
          fetch_history(ticker, config.fetch_from, config.fetch_to, fetch_config);
      std::cout << ticker << ": " << history.bars.size() << " sessions ("
                << history.bars.front().date.to_string() << ".."
                << history.bars.back().date.to_string() << ")\n";
    } catch (const Error& e) {
      ++failures;
      std::cerr << ticker << ": FAILED: " << e.what() << "\n";
    }
  }
  if (failures > 0) {
    std::cerr << failures << " of " << config.tickers.size() << " tickers failed\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_prepare(const CommonOpts& opts, const std::string& out_path) {
  const RunConfig config = resolve_config(opts);
  config.split.validate();

  std::vector<PreparedTicker> prepared;
  for (const auto& ticker : config.tickers) {
    const fs::path csv = resolve_ticker_csv(config, ticker);
    std::ifstream in(csv, std::ios::binary);
    ParseResult parsed = parse_ohlcv_csv(in, ticker);
    if (parsed.skipped_rows > 0) {
      std::cerr << ticker << ": skipped " << parsed.skipped_rows << " bad rows\n";
    }
    prepared.push_back(
        prepare_ticker(ticker, parsed.history.bars, config.split, config.training.arch.n_window));
    const auto& p = prepared.back();
    std::cout << ticker << ": train " << p.train.size() << ", validation "
              << p.validation.size() << ", test " << p.test.size() << " samples\n";
  }

  const SplitDataset dataset = pool_indices(prepared, config.training.seed);
  save_dataset(dataset, out_path);
  std::cout << "features per day: " << kFeatureCount << "\n";
  std::cout << "pooled: train " << dataset.train.size() << ", validation "
            << dataset.validation.size() << ", test " << dataset.test.size() << " -> " << out_path
            << "\n";
  return kExitOk;
}

int cmd_train(const CommonOpts& opts, const std::string& dataset_path,
              const std::string& out_dir) {
  const RunConfig config = resolve_config(opts);
  const SplitDataset dataset = load_dataset(dataset_path);

  TrainingConfig training = config.training;
  training.arch.input_dim = kFeatureCount;
  const TrainingHistory history = train(dataset, training, out_dir);

  const fs::path best_path = select_best_path(out_dir);
  const Checkpoint best = load_checkpoint(best_path);
  fs::copy_file(best_path, fs::path(out_dir) / "best.ckpt",
                fs::copy_options::overwrite_existing);

  std::cout << "trained " << history.epochs.size() << " epochs; final train MSE "
            << history.epochs.back().train_mse << ", final validation MSE "
            << history.epochs.back().val_mse << "\n";
  std::cout << "best checkpoint: epoch " << best.epoch << " (validation MSE " << best.val_mse
            << ") -> " << (fs::path(out_dir) / "best.ckpt").string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& dataset_path,
                 const std::string& partition, const std::string& report_path) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const SplitDataset dataset = load_dataset(dataset_path);

  const std::vector<WindowedSample>* samples = nullptr;
  if (partition == "train") samples = &dataset.train;
  else if (partition == "validation") samples = &dataset.validation;
  else if (partition == "test") samples = &dataset.test;
  else throw ConfigError("partition must be train, validation, or test");

  if (dataset.n_window != checkpoint.config.arch.n_window) {
    throw ConfigError("checkpoint window " + std::to_string(checkpoint.config.arch.n_window) +
                      " != dataset window " + std::to_string(dataset.n_window));
  }

  const EvaluationReport report =
      evaluate(checkpoint.network, checkpoint.normalization, *samples, partition);
  if (!report_path.empty()) write_report_json(report, report_path);
  std::cout << render_report_table(report);
  return kExitOk;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& csv_path,
                std::string ticker) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  if (ticker.empty()) {
    if (checkpoint.tickers.size() != 1) {
      throw ConfigError("checkpoint covers several tickers; pass --ticker");
    }
    ticker = checkpoint.tickers.front();
  }
  const auto params_it = checkpoint.normalization.find(ticker);
  if (params_it == checkpoint.normalization.end()) {
    throw MissingParamsError("checkpoint has no normalization params for '" + ticker + "'");
  }

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw NoDataError("cannot open " + csv_path);
  const ParseResult parsed = parse_ohlcv_csv(in, ticker);
  const FeatureMatrix features = build_feature_matrix(parsed.history.bars);

  const Index n_window = checkpoint.config.arch.n_window;
  if (features.values.rows() < n_window) {
    throw InsufficientHistoryError("need " + std::to_string(n_window) +
                                   " feature rows after indicator warm-up, have " +
                                   std::to_string(features.values.rows()));
  }

  WindowedSample sample;
  sample.inputs = apply_minmax(features.values.bottomRows(n_window), params_it->second);
  sample.targets.setZero();
  sample.ticker = ticker;
  sample.target_date = Date::from_epoch_days(features.dates.back().epoch_days() + 1);

  const std::vector<Prediction> predictions =
      predict_batch({sample}, checkpoint.network, checkpoint.normalization);
  const Prediction& p = predictions.front();
  std::cout << "ticker: " << p.ticker << "\n"
            << "last session: " << features.dates.back().to_string() << "\n"
            << "next-day open: " << p.denormalized[0] << "\n"
            << "next-day low:  " << p.denormalized[1] << "\n"
            << "next-day high: " << p.denormalized[2] << "\n";
  return kExitOk;
}

int cmd_export_plot(const std::string& checkpoint_path, const std::string& dataset_path,
                    const std::string& partition, const std::string& ticker,
                    const std::string& out_path) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const SplitDataset dataset = load_dataset(dataset_path);

  const std::vector<WindowedSample>* samples = nullptr;
  if (partition == "train") samples = &dataset.train;
  else if (partition == "validation") samples = &dataset.validation;
  else if (partition == "test") samples = &dataset.test;
  else throw ConfigError("partition must be train, validation, or test");

  export_prediction_series(checkpoint.network, checkpoint.normalization, *samples, ticker,
                           out_path);
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-day open/low/high forecaster for market indices "
               "(chained LSTM branches)"};
  app.require_subcommand(1);

  CommonOpts fetch_opts;
  bool fetch_offline = false;
  auto* fetch = app.add_subcommand("fetch", "Download and cache daily OHLCV history");
  add_common(fetch, fetch_opts);
  fetch->add_flag("--offline", fetch_offline, "Serve from the cache only, no network");

  CommonOpts prepare_opts;
  std::string prepare_out = "dataset.alstm";
  auto* prepare = app.add_subcommand("prepare", "Build the normalized windowed dataset");
  add_common(prepare, prepare_opts);
  prepare->add_option("--out", prepare_out, "Output dataset container");

  CommonOpts train_opts;
  std::string train_dataset, train_out = "run";
  auto* train_cmd = app.add_subcommand("train", "Train the model");
  add_common(train_cmd, train_opts);
  train_cmd->add_option("--dataset", train_dataset, "Dataset container")->required();
  train_cmd->add_option("--out", train_out, "Output directory (checkpoints, history.csv)");

  std::string eval_checkpoint, eval_dataset, eval_partition = "test", eval_report;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a partition");
  evaluate_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
  evaluate_cmd->add_option("--dataset", eval_dataset, "Dataset container")->required();
  evaluate_cmd->add_option("--partition", eval_partition, "train|validation|test");
  evaluate_cmd->add_option("--report", eval_report, "Write the JSON report here");

  std::string predict_checkpoint, predict_csv, predict_ticker;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the next day from a CSV tail");
  predict_cmd->add_option("--checkpoint", predict_checkpoint, "Checkpoint file")->required();
  predict_cmd->add_option("--csv", predict_csv, "OHLCV history CSV")->required();
  predict_cmd->add_option("--ticker", predict_ticker, "Ticker for normalization params");

  std::string plot_checkpoint, plot_dataset, plot_partition = "test", plot_ticker, plot_out;
  auto* plot_cmd = app.add_subcommand("export-plot", "Export prediction-vs-actual series CSV");
  plot_cmd->add_option("--checkpoint", plot_checkpoint, "Checkpoint file")->required();
  plot_cmd->add_option("--dataset", plot_dataset, "Dataset container")->required();
  plot_cmd->add_option("--partition", plot_partition, "train|validation|test");
  plot_cmd->add_option("--ticker", plot_ticker, "Ticker to export")->required();
  plot_cmd->add_option("--out", plot_out, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fetch->parsed()) {
      if (fetch_offline) fetch_opts.overrides.push_back("offline=true");
      return cmd_fetch(fetch_opts);
    }
    if (prepare->parsed()) return cmd_prepare(prepare_opts, prepare_out);
    if (train_cmd->parsed()) return cmd_train(train_opts, train_dataset, train_out);
    if (evaluate_cmd->parsed()) {
      return cmd_evaluate(eval_checkpoint, eval_dataset, eval_partition, eval_report);
    }
    if (predict_cmd->parsed()) return cmd_predict(predict_checkpoint, predict_csv, predict_ticker);
    if (plot_cmd->parsed()) {
      return cmd_export_plot(plot_checkpoint, plot_dataset, plot_partition, plot_ticker, plot_out);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
