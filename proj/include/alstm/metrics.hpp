#pragma once

#include "alstm/model.hpp"
#include "alstm/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace alstm {

/// Mean squared / mean absolute elementwise error. Throw on empty or
/// mismatched inputs.
Scalar mse(const Vector& pred, const Vector& actual);
Scalar mae(const Vector& pred, const Vector& actual);

/// 100 * mean(|pred - actual| / |actual|), on denormalized prices. Throws
/// on a zero actual value.
Scalar mape(const Vector& pred, const Vector& actual);

/// Percentage of days where sign(pred_t - actual_{t-1}) matches
/// sign(actual_t - actual_{t-1}); zero variation counts as positive.
Scalar trend_accuracy(const Vector& pred, const Vector& actual, const Vector& previous_actual);

struct PriceTypeMetrics {
  Scalar open = 0;
  Scalar low = 0;
  Scalar high = 0;
};

struct TickerMetrics {
  std::size_t samples = 0;
  Scalar mse_normalized = 0;       // normalized scale
  Scalar mae_overall = 0;          // currency units, pooled over price types
  PriceTypeMetrics mae;            // currency units
  Scalar mape_overall = 0;         // percent, pooled over price types
  PriceTypeMetrics mape;           // percent
  PriceTypeMetrics trend;          // percent of correctly predicted directions
};

struct EvaluationReport {
  std::string partition;
  std::size_t total_samples = 0;
  Scalar pooled_mse_normalized = 0;
  std::map<std::string, TickerMetrics> per_ticker;
};

/// Inference-mode evaluation of every sample in a partition, grouped per
/// ticker. MSE stays on the normalized scale; MAE/MAPE/trend run on
/// denormalized prices. The prior-day reference for trend accuracy is the
/// actual value, recovered from the window's last row. Throws NoDataError
/// on an empty partition.
EvaluationReport evaluate(const AssociatedNetwork& net,
                          const std::map<std::string, NormalizationParams>& normalization,
                          const std::vector<WindowedSample>& samples, std::string partition);

std::string report_to_json(const EvaluationReport& report);
void write_report_json(const EvaluationReport& report, const std::filesystem::path& path);

/// Aligned text tables: per-ticker errors and trend accuracies.
std::string render_report_table(const EvaluationReport& report);

/// CSV "date,actual_open,pred_open,actual_low,pred_low,actual_high,pred_high"
/// (denormalized, date-ascending) for one ticker. Throws MissingParamsError
/// for a ticker absent from the partition.
void export_prediction_series(const AssociatedNetwork& net,
                              const std::map<std::string, NormalizationParams>& normalization,
                              const std::vector<WindowedSample>& samples,
                              const std::string& ticker, const std::filesystem::path& path);

}  // namespace alstm
