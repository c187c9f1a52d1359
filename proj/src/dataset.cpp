#include "alstm/dataset.hpp"

#include "alstm/container_io.hpp"
#include "alstm/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace alstm {

using nlohmann::json;

namespace {

constexpr std::string_view kDatasetFormat = "alstm-dataset";
constexpr int kDatasetVersion = 1;

FeatureMatrix take_rows(const FeatureMatrix& matrix, Index begin, Index end) {
  FeatureMatrix out;
  out.values = matrix.values.middleRows(begin, end - begin);
  out.dates.assign(matrix.dates.begin() + begin, matrix.dates.begin() + end);
  return out;
}

}  // namespace

void SplitBoundaries::validate() const {
  if (!(train_start <= train_end && train_end < val_end && val_end < test_end)) {
    throw InvalidSplitError("split boundaries out of order: train " +
                            train_start.to_string() + ".." + train_end.to_string() +
                            ", validation end " + val_end.to_string() + ", test end " +
                            test_end.to_string());
  }
}

RowPartitions split_by_date(const FeatureMatrix& matrix, const SplitBoundaries& boundaries) {
  boundaries.validate();
  const Index n = matrix.values.rows();

  // Rows are date-ascending, so the three partitions are contiguous spans.
  auto lower = [&](Date d) {
    return static_cast<Index>(std::lower_bound(matrix.dates.begin(), matrix.dates.end(), d) -
                              matrix.dates.begin());
  };
  auto upper = [&](Date d) {
    return static_cast<Index>(std::upper_bound(matrix.dates.begin(), matrix.dates.end(), d) -
                              matrix.dates.begin());
  };

  RowPartitions out;
  const Index train_begin = lower(boundaries.train_start);
  const Index train_end = upper(boundaries.train_end);
  const Index val_end = upper(boundaries.val_end);
  const Index test_end = upper(boundaries.test_end);
  out.train = take_rows(matrix, train_begin, train_end);
  out.validation = take_rows(matrix, train_end, val_end);
  out.test = take_rows(matrix, val_end, std::min(test_end, n));
  return out;
}

NormalizationParams fit_minmax(const Matrix& train_rows) {
  if (train_rows.rows() == 0) throw NoDataError("cannot fit min-max on an empty partition");
  NormalizationParams params;
  params.min = train_rows.colwise().minCoeff();
  params.max = train_rows.colwise().maxCoeff();
  return params;
}

Scalar apply_minmax(Scalar value, const NormalizationParams& params, Index feature) {
  if (feature < 0 || feature >= params.features()) {
    throw DimensionError("feature index out of range");
  }
  if (params.degenerate(feature)) return 0.0;
  return (value - params.min[feature]) / (params.max[feature] - params.min[feature]);
}

Matrix apply_minmax(const Matrix& rows, const NormalizationParams& params) {
  if (rows.cols() != params.features()) {
    throw DimensionError("row width " + std::to_string(rows.cols()) +
                         " does not match fitted feature count " +
                         std::to_string(params.features()));
  }
  Matrix out(rows.rows(), rows.cols());
  for (Index j = 0; j < rows.cols(); ++j) {
    if (params.degenerate(j)) {
      out.col(j).setZero();
    } else {
      out.col(j) = (rows.col(j).array() - params.min[j]) / (params.max[j] - params.min[j]);
    }
  }
  return out;
}

Scalar invert_minmax(Scalar normalized, const NormalizationParams& params, Index feature) {
  if (feature < 0 || feature >= params.features()) {
    throw DimensionError("feature index out of range");
  }
  if (params.degenerate(feature)) {
    throw DegenerateFeatureError("feature '" + std::string(feature_names()[feature]) +
                                 "' is constant on the training partition");
  }
  return normalized * (params.max[feature] - params.min[feature]) + params.min[feature];
}

std::vector<WindowedSample> make_windows(const Matrix& normalized_rows,
                                         const std::vector<Date>& dates,
                                         const std::string& ticker, Index n_window) {
  if (n_window < 1) throw InvalidWindowError("window length must be >= 1");
  if (normalized_rows.rows() != static_cast<Index>(dates.size())) {
    throw DimensionError("rows and dates disagree in length");
  }
  std::vector<WindowedSample> samples;
  if (normalized_rows.rows() <= n_window) return samples;

  samples.reserve(static_cast<std::size_t>(normalized_rows.rows() - n_window));
  for (Index t = n_window; t < normalized_rows.rows(); ++t) {
    WindowedSample sample;
    sample.inputs = normalized_rows.middleRows(t - n_window, n_window);
    sample.targets = Vector3(normalized_rows(t, kOpen), normalized_rows(t, kLow),
                             normalized_rows(t, kHigh));
    sample.ticker = ticker;
    sample.target_date = dates[static_cast<std::size_t>(t)];
    samples.push_back(std::move(sample));
  }
  return samples;
}

PreparedTicker prepare_ticker(const std::string& ticker, const std::vector<OhlcvBar>& bars,
                              const SplitBoundaries& boundaries, Index n_window) {
  const FeatureMatrix features = build_feature_matrix(bars);
  const RowPartitions parts = split_by_date(features, boundaries);

  PreparedTicker out;
  out.ticker = ticker;
  out.params = fit_minmax(parts.train.values);
  out.train = make_windows(apply_minmax(parts.train.values, out.params), parts.train.dates,
                           ticker, n_window);
  out.validation = make_windows(apply_minmax(parts.validation.values, out.params),
                                parts.validation.dates, ticker, n_window);
  out.test = make_windows(apply_minmax(parts.test.values, out.params), parts.test.dates,
                          ticker, n_window);
  return out;
}

SplitDataset pool_indices(const std::vector<PreparedTicker>& prepared, std::uint64_t seed) {
  SplitDataset out;
  Index n_window = 0;
  for (const auto& ticker : prepared) {
    out.tickers.push_back(ticker.ticker);
    out.normalization.emplace(ticker.ticker, ticker.params);
    out.train.insert(out.train.end(), ticker.train.begin(), ticker.train.end());
    out.validation.insert(out.validation.end(), ticker.validation.begin(),
                          ticker.validation.end());
    out.test.insert(out.test.end(), ticker.test.begin(), ticker.test.end());
    for (const auto* part : {&ticker.train, &ticker.validation, &ticker.test}) {
      if (!part->empty()) n_window = part->front().inputs.rows();
    }
  }
  out.n_window = n_window;

  std::mt19937_64 rng(seed);
  std::shuffle(out.train.begin(), out.train.end(), rng);
  return out;
}

void save_dataset(const SplitDataset& dataset, const std::filesystem::path& path) {
  json manifest;
  manifest["format"] = std::string(kDatasetFormat);
  manifest["version"] = kDatasetVersion;
  manifest["n_window"] = dataset.n_window;
  manifest["tickers"] = dataset.tickers;
  json names = json::array();
  for (const auto name : feature_names()) names.push_back(std::string(name));
  manifest["feature_names"] = names;

  json norm = json::object();
  for (const auto& [ticker, params] : dataset.normalization) {
    json entry;
    entry["min"] = std::vector<Scalar>(params.min.begin(), params.min.end());
    entry["max"] = std::vector<Scalar>(params.max.begin(), params.max.end());
    norm[ticker] = std::move(entry);
  }
  manifest["normalization"] = std::move(norm);

  std::map<std::string, std::vector<Scalar>> payloads;
  const struct {
    const char* name;
    const std::vector<WindowedSample>* samples;
  } partitions[] = {{"train", &dataset.train},
                    {"validation", &dataset.validation},
                    {"test", &dataset.test}};

  json meta = json::object();
  for (const auto& [name, samples] : partitions) {
    std::vector<int> ticker_idx;
    std::vector<std::int32_t> target_days;
    std::vector<Scalar> inputs;
    std::vector<Scalar> targets;
    for (const auto& sample : *samples) {
      const auto it = std::find(dataset.tickers.begin(), dataset.tickers.end(), sample.ticker);
      ticker_idx.push_back(static_cast<int>(it - dataset.tickers.begin()));
      target_days.push_back(sample.target_date.epoch_days());
      for (Index r = 0; r < sample.inputs.rows(); ++r) {
        for (Index c = 0; c < sample.inputs.cols(); ++c) inputs.push_back(sample.inputs(r, c));
      }
      targets.insert(targets.end(), sample.targets.begin(), sample.targets.end());
    }
    meta[name] = {{"count", samples->size()},
                  {"ticker_idx", ticker_idx},
                  {"target_days", target_days}};
    payloads[std::string(name) + ".inputs"] = std::move(inputs);
    payloads[std::string(name) + ".targets"] = std::move(targets);
  }
  manifest["samples"] = std::move(meta);

  std::vector<std::pair<std::string, std::span<const Scalar>>> tensors;
  for (const auto& [name, samples] : partitions) {
    tensors.emplace_back(std::string(name) + ".inputs", payloads[std::string(name) + ".inputs"]);
    tensors.emplace_back(std::string(name) + ".targets", payloads[std::string(name) + ".targets"]);
  }
  write_container(path, std::move(manifest), tensors);
}

SplitDataset load_dataset(const std::filesystem::path& path) {
  Container container = read_container(path, kDatasetFormat, kDatasetVersion);
  const json& manifest = container.manifest;

  SplitDataset dataset;
  dataset.n_window = manifest.at("n_window").get<Index>();
  dataset.tickers = manifest.at("tickers").get<std::vector<std::string>>();

  for (const auto& [ticker, entry] : manifest.at("normalization").items()) {
    NormalizationParams params;
    const auto mins = entry.at("min").get<std::vector<Scalar>>();
    const auto maxs = entry.at("max").get<std::vector<Scalar>>();
    params.min = Eigen::Map<const Vector>(mins.data(), static_cast<Index>(mins.size()));
    params.max = Eigen::Map<const Vector>(maxs.data(), static_cast<Index>(maxs.size()));
    dataset.normalization.emplace(ticker, std::move(params));
  }

  const struct {
    const char* name;
    std::vector<WindowedSample>* samples;
  } partitions[] = {{"train", &dataset.train},
                    {"validation", &dataset.validation},
                    {"test", &dataset.test}};

  for (const auto& [name, samples] : partitions) {
    const json& meta = manifest.at("samples").at(name);
    const auto count = meta.at("count").get<std::size_t>();
    const auto ticker_idx = meta.at("ticker_idx").get<std::vector<int>>();
    const auto target_days = meta.at("target_days").get<std::vector<std::int32_t>>();
    const auto& inputs = container.tensors.at(std::string(name) + ".inputs");
    const auto& targets = container.tensors.at(std::string(name) + ".targets");

    const auto window = static_cast<std::size_t>(dataset.n_window);
    const std::size_t row_width = kFeatureCount;
    if (ticker_idx.size() != count || target_days.size() != count ||
        inputs.size() != count * window * row_width || targets.size() != count * 3) {
      throw CorruptionError(path.string() + ": sample payload sizes disagree with manifest");
    }

    samples->reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
      WindowedSample sample;
      sample.inputs.resize(dataset.n_window, kFeatureCount);
      const Scalar* base = inputs.data() + s * window * row_width;
      for (Index r = 0; r < dataset.n_window; ++r) {
        for (Index c = 0; c < kFeatureCount; ++c) {
          sample.inputs(r, c) = base[static_cast<std::size_t>(r) * row_width +
                                     static_cast<std::size_t>(c)];
        }
      }
      sample.targets = Vector3(targets[s * 3], targets[s * 3 + 1], targets[s * 3 + 2]);
      sample.ticker = dataset.tickers.at(static_cast<std::size_t>(ticker_idx[s]));
      sample.target_date = Date::from_epoch_days(target_days[s]);
      samples->push_back(std::move(sample));
    }
  }
  return dataset;
}

}  // namespace alstm
