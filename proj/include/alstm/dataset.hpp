#pragma once

#include "alstm/indicators.hpp"
#include "alstm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace alstm {

/// Per-feature min/max, fitted on training rows only.
struct NormalizationParams {
  Vector min;
  Vector max;

  Index features() const { return min.size(); }
  bool degenerate(Index feature) const { return max[feature] == min[feature]; }
};

/// One model input: a normalized window of feature rows plus the normalized
/// next-day open/low/high targets. The target day is the calendar day
/// immediately after the window's last row.
struct WindowedSample {
  Matrix inputs;    // n_window x kFeatureCount, normalized
  Vector3 targets;  // next-day open, low, high, normalized
  std::string ticker;
  Date target_date;
};

/// Inclusive calendar ranges: train = [train_start, train_end],
/// validation = (train_end, val_end], test = (val_end, test_end].
struct SplitBoundaries {
  Date train_start;
  Date train_end;
  Date val_end;
  Date test_end;

  /// Throws InvalidSplitError when the dates are out of order.
  void validate() const;
};

struct RowPartitions {
  FeatureMatrix train;
  FeatureMatrix validation;
  FeatureMatrix test;
};

/// Assigns rows to the partition whose date range contains them; rows
/// outside all ranges are dropped.
RowPartitions split_by_date(const FeatureMatrix& matrix, const SplitBoundaries& boundaries);

/// Per-feature min/max over training rows only. Throws NoDataError on an
/// empty training partition.
NormalizationParams fit_minmax(const Matrix& train_rows);

/// (x - min) / (max - min); a degenerate feature (max == min) maps to 0.
Matrix apply_minmax(const Matrix& rows, const NormalizationParams& params);
Scalar apply_minmax(Scalar value, const NormalizationParams& params, Index feature);

/// Exact algebraic inverse of apply_minmax. Throws DegenerateFeatureError
/// for a degenerate feature.
Scalar invert_minmax(Scalar normalized, const NormalizationParams& params, Index feature);

/// One sample per position t >= n_window; inputs are rows [t-n_window, t),
/// targets the open/low/high of row t. Fewer than n_window+1 rows yield an
/// empty list.
std::vector<WindowedSample> make_windows(const Matrix& normalized_rows,
                                         const std::vector<Date>& dates,
                                         const std::string& ticker, Index n_window);

/// One index's normalized, windowed partitions plus its fitted params.
struct PreparedTicker {
  std::string ticker;
  NormalizationParams params;
  std::vector<WindowedSample> train;
  std::vector<WindowedSample> validation;
  std::vector<WindowedSample> test;
};

/// Full pipeline for one index: features -> date split -> per-ticker min-max
/// fit on train -> normalize -> window.
PreparedTicker prepare_ticker(const std::string& ticker, const std::vector<OhlcvBar>& bars,
                              const SplitBoundaries& boundaries, Index n_window);

/// Training material pooled across indices.
struct SplitDataset {
  std::vector<WindowedSample> train;       // seeded shuffle order
  std::vector<WindowedSample> validation;  // ticker order, then date
  std::vector<WindowedSample> test;
  std::map<std::string, NormalizationParams> normalization;
  std::vector<std::string> tickers;
  Index n_window = 0;
};

/// Concatenates per-ticker samples (ticker order, then date) and applies one
/// deterministic seeded shuffle to the training partition.
SplitDataset pool_indices(const std::vector<PreparedTicker>& prepared, std::uint64_t seed);

void save_dataset(const SplitDataset& dataset, const std::filesystem::path& path);
SplitDataset load_dataset(const std::filesystem::path& path);

}  // namespace alstm
