#include "alstm/metrics.hpp"

#include "alstm/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace alstm {

using nlohmann::json;

namespace {

void check_pair(const Vector& pred, const Vector& actual) {
  if (pred.size() != actual.size()) throw DimensionError("series lengths differ");
  if (pred.size() == 0) throw NoDataError("empty series");
}

struct TickerSeries {
  // Denormalized, one entry per sample, date-ascending.
  std::vector<Scalar> pred[3], actual[3], prev_actual[3];
  std::vector<Scalar> pred_norm, actual_norm;  // pooled over price types
  std::vector<Date> dates;
};

Vector to_vector(const std::vector<Scalar>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

constexpr Feature kPriceFeature[3] = {kOpen, kLow, kHigh};
constexpr const char* kPriceName[3] = {"open", "low", "high"};

/// Gathers per-ticker prediction/actual/prior-day series. The window's last
/// row is the trading day before the target, so its price columns provide
/// the prior-day actuals.
std::map<std::string, TickerSeries> collect_series(
    const AssociatedNetwork& net, const std::map<std::string, NormalizationParams>& normalization,
    const std::vector<WindowedSample>& samples) {
  const DropoutMasks masks = identity_masks(net.arch);
  std::map<std::string, TickerSeries> by_ticker;
  for (const auto& sample : samples) {
    const auto it = normalization.find(sample.ticker);
    if (it == normalization.end()) {
      throw MissingParamsError("no normalization params for ticker '" + sample.ticker + "'");
    }
    const NormalizationParams& params = it->second;
    const Vector3 pred_norm = assoc_forward(sample.inputs, net, masks);

    TickerSeries& series = by_ticker[sample.ticker];
    series.dates.push_back(sample.target_date);
    const Index last_row = sample.inputs.rows() - 1;
    for (int p = 0; p < 3; ++p) {
      const Feature feature = kPriceFeature[p];
      series.pred[p].push_back(invert_minmax(pred_norm[p], params, feature));
      series.actual[p].push_back(invert_minmax(sample.targets[p], params, feature));
      series.prev_actual[p].push_back(
          invert_minmax(sample.inputs(last_row, feature), params, feature));
      series.pred_norm.push_back(pred_norm[p]);
      series.actual_norm.push_back(sample.targets[p]);
    }
  }
  return by_ticker;
}

}  // namespace

Scalar mse(const Vector& pred, const Vector& actual) {
  check_pair(pred, actual);
  return (pred - actual).squaredNorm() / static_cast<Scalar>(pred.size());
}

Scalar mae(const Vector& pred, const Vector& actual) {
  check_pair(pred, actual);
  return (pred - actual).cwiseAbs().mean();
}

Scalar mape(const Vector& pred, const Vector& actual) {
  check_pair(pred, actual);
  Scalar sum = 0;
  for (Index i = 0; i < pred.size(); ++i) {
    if (actual[i] == 0) throw Error("MAPE undefined for a zero actual value");
    sum += std::abs(pred[i] - actual[i]) / std::abs(actual[i]);
  }
  return 100.0 * sum / static_cast<Scalar>(pred.size());
}

Scalar trend_accuracy(const Vector& pred, const Vector& actual, const Vector& previous_actual) {
  check_pair(pred, actual);
  check_pair(pred, previous_actual);
  Index correct = 0;
  for (Index i = 0; i < pred.size(); ++i) {
    // Zero variation classes as positive.
    const bool predicted_up = pred[i] - previous_actual[i] >= 0;
    const bool actual_up = actual[i] - previous_actual[i] >= 0;
    if (predicted_up == actual_up) ++correct;
  }
  return 100.0 * static_cast<Scalar>(correct) / static_cast<Scalar>(pred.size());
}

EvaluationReport evaluate(const AssociatedNetwork& net,
                          const std::map<std::string, NormalizationParams>& normalization,
                          const std::vector<WindowedSample>& samples, std::string partition) {
  if (samples.empty()) throw NoDataError("partition '" + partition + "' is empty");

  EvaluationReport report;
  report.partition = std::move(partition);
  report.total_samples = samples.size();

  const auto by_ticker = collect_series(net, normalization, samples);
  Scalar pooled_sq_sum = 0;
  std::size_t pooled_count = 0;
  for (const auto& [ticker, series] : by_ticker) {
    TickerMetrics metrics;
    metrics.samples = series.dates.size();

    const Vector pred_norm = to_vector(series.pred_norm);
    const Vector actual_norm = to_vector(series.actual_norm);
    metrics.mse_normalized = mse(pred_norm, actual_norm);
    pooled_sq_sum += (pred_norm - actual_norm).squaredNorm();
    pooled_count += static_cast<std::size_t>(pred_norm.size());

    Scalar* mae_slots[3] = {&metrics.mae.open, &metrics.mae.low, &metrics.mae.high};
    Scalar* mape_slots[3] = {&metrics.mape.open, &metrics.mape.low, &metrics.mape.high};
    Scalar* trend_slots[3] = {&metrics.trend.open, &metrics.trend.low, &metrics.trend.high};
    std::vector<Scalar> pooled_pred, pooled_actual;
    for (int p = 0; p < 3; ++p) {
      const Vector pred = to_vector(series.pred[p]);
      const Vector actual = to_vector(series.actual[p]);
      *mae_slots[p] = mae(pred, actual);
      *mape_slots[p] = mape(pred, actual);
      *trend_slots[p] = trend_accuracy(pred, actual, to_vector(series.prev_actual[p]));
      pooled_pred.insert(pooled_pred.end(), series.pred[p].begin(), series.pred[p].end());
      pooled_actual.insert(pooled_actual.end(), series.actual[p].begin(), series.actual[p].end());
    }
    metrics.mae_overall = mae(to_vector(pooled_pred), to_vector(pooled_actual));
    metrics.mape_overall = mape(to_vector(pooled_pred), to_vector(pooled_actual));
    report.per_ticker.emplace(ticker, metrics);
  }
  report.pooled_mse_normalized = pooled_sq_sum / static_cast<Scalar>(pooled_count);
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  json out;
  out["partition"] = report.partition;
  out["total_samples"] = report.total_samples;
  out["pooled_mse_normalized"] = report.pooled_mse_normalized;
  json tickers = json::object();
  for (const auto& [ticker, m] : report.per_ticker) {
    tickers[ticker] = {
        {"samples", m.samples},
        {"mse_normalized", m.mse_normalized},
        {"mae", {{"overall", m.mae_overall}, {"open", m.mae.open}, {"low", m.mae.low}, {"high", m.mae.high}}},
        {"mape", {{"overall", m.mape_overall}, {"open", m.mape.open}, {"low", m.mape.low}, {"high", m.mape.high}}},
        {"trend", {{"open", m.trend.open}, {"low", m.trend.low}, {"high", m.trend.high}}},
    };
  }
  out["tickers"] = std::move(tickers);
  return out.dump(2) + "\n";
}

void write_report_json(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << report_to_json(report);
}

std::string render_report_table(const EvaluationReport& report) {
  std::ostringstream out;
  char line[256];
  out << "partition: " << report.partition << "  samples: " << report.total_samples
      << "  pooled MSE (normalized): ";
  std::snprintf(line, sizeof(line), "%.6g\n\n", report.pooled_mse_normalized);
  out << line;

  std::snprintf(line, sizeof(line), "%-10s %12s %12s %10s %10s %10s %10s\n", "ticker",
                "MSE(norm)", "MAE", "MAPE(%)", "open(%)", "low(%)", "high(%)");
  out << line;
  for (const auto& [ticker, m] : report.per_ticker) {
    std::snprintf(line, sizeof(line), "%-10s %12.4e %12.4f %10.2f %10.2f %10.2f %10.2f\n",
                  ticker.c_str(), m.mse_normalized, m.mae_overall, m.mape_overall, m.mape.open,
                  m.mape.low, m.mape.high);
    out << line;
  }

  out << '\n';
  std::snprintf(line, sizeof(line), "%-10s %12s %12s %12s\n", "ticker", "trend open",
                "trend low", "trend high");
  out << line;
  for (const auto& [ticker, m] : report.per_ticker) {
    std::snprintf(line, sizeof(line), "%-10s %11.1f%% %11.1f%% %11.1f%%\n", ticker.c_str(),
                  m.trend.open, m.trend.low, m.trend.high);
    out << line;
  }
  return out.str();
}

void export_prediction_series(const AssociatedNetwork& net,
                              const std::map<std::string, NormalizationParams>& normalization,
                              const std::vector<WindowedSample>& samples,
                              const std::string& ticker, const std::filesystem::path& path) {
  std::vector<WindowedSample> selected;
  for (const auto& sample : samples) {
    if (sample.ticker == ticker) selected.push_back(sample);
  }
  if (selected.empty()) {
    throw MissingParamsError("ticker '" + ticker + "' not present in the partition");
  }
  std::sort(selected.begin(), selected.end(),
            [](const WindowedSample& a, const WindowedSample& b) {
              return a.target_date < b.target_date;
            });

  const auto by_ticker = collect_series(net, normalization, selected);
  const TickerSeries& series = by_ticker.at(ticker);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "date,actual_open,pred_open,actual_low,pred_low,actual_high,pred_high\n";
  char line[256];
  for (std::size_t i = 0; i < series.dates.size(); ++i) {
    std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  series.dates[i].to_string().c_str(), series.actual[0][i], series.pred[0][i],
                  series.actual[1][i], series.pred[1][i], series.actual[2][i], series.pred[2][i]);
    out << line;
  }
}

}  // namespace alstm
