#pragma once

#include "alstm/ohlcv.hpp"
#include "alstm/types.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace alstm {

/// Per-day indicator values over a price series. Entries before valid_from
/// are warm-up placeholders and must not be read.
struct IndicatorSeries {
  Vector values;        // same length as the source series
  Index valid_from = 0; // first defined day index
};

/// Simple moving average over the trailing n closes. Defined from day n-1.
/// Throws InvalidWindowError when n = 0 or n > length.
IndicatorSeries sma(const Vector& prices, Index n);

/// Exponential moving average, alpha = 2/(n+1), seeded with SMA(n) at day
/// n-1. Throws InvalidWindowError when n = 0 or n > length.
IndicatorSeries ema(const Vector& prices, Index n);

/// EMA(12) - EMA(26). Defined from day 25. Throws InsufficientHistoryError
/// for series shorter than 26.
IndicatorSeries macd(const Vector& prices);

/// Model input features, in column order.
enum Feature : int {
  kOpen = 0,
  kClose,
  kLow,
  kHigh,
  kVolume,
  kSma5,
  kSma10,
  kSma20,
  kSma40,
  kEma5,
  kEma10,
  kEma20,
  kEma40,
  kMacd,
  kFeatureCount,
};

const std::array<std::string_view, kFeatureCount>& feature_names();

/// Per-day feature rows for one index. Only fully defined rows are kept, so
/// the first rows of the source history (indicator warm-up) are dropped.
struct FeatureMatrix {
  Matrix values;            // rows x kFeatureCount
  std::vector<Date> dates;  // one per retained row, ascending
};

/// Builds the feature matrix from raw bars. Requires >= 40 date-ascending
/// bars (longest moving-average window); indicators run on close prices.
/// Throws MalformedInputError on unsorted/duplicate dates and
/// InsufficientHistoryError on short history.
FeatureMatrix build_feature_matrix(const std::vector<OhlcvBar>& bars);

}  // namespace alstm
