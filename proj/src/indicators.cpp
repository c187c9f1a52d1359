#include "alstm/indicators.hpp"

#include "alstm/errors.hpp"

#include <cmath>

namespace alstm {

namespace {

void check_price_series(const Vector& prices) {
  if (prices.size() == 0) throw InvalidWindowError("price series is empty");
  for (Index i = 0; i < prices.size(); ++i) {
    if (!std::isfinite(prices[i]) || prices[i] <= 0) {
      throw MalformedInputError("price series must be finite and positive");
    }
  }
}

void check_window(const Vector& prices, Index n) {
  if (n < 1 || n > prices.size()) {
    throw InvalidWindowError("window length " + std::to_string(n) +
                             " invalid for series of length " +
                             std::to_string(prices.size()));
  }
}

}  // namespace

IndicatorSeries sma(const Vector& prices, Index n) {
  check_price_series(prices);
  check_window(prices, n);

  IndicatorSeries out;
  out.values = Vector::Zero(prices.size());
  out.valid_from = n - 1;

  // Rolling sum, refreshed every n steps to keep drift below the window's
  // own rounding noise.
  Scalar sum = prices.head(n).sum();
  out.values[n - 1] = sum / static_cast<Scalar>(n);
  for (Index t = n; t < prices.size(); ++t) {
    if ((t - n) % n == n - 1) {
      sum = prices.segment(t - n + 1, n).sum();
    } else {
      sum += prices[t] - prices[t - n];
    }
    out.values[t] = sum / static_cast<Scalar>(n);
  }
  return out;
}

IndicatorSeries ema(const Vector& prices, Index n) {
  check_price_series(prices);
  check_window(prices, n);

  IndicatorSeries out;
  out.values = Vector::Zero(prices.size());
  out.valid_from = n - 1;

  const Scalar alpha = 2.0 / static_cast<Scalar>(n + 1);
  Scalar value = prices.head(n).mean();  // SMA seed
  out.values[n - 1] = value;
  for (Index t = n; t < prices.size(); ++t) {
    value += alpha * (prices[t] - value);
    out.values[t] = value;
  }
  return out;
}

IndicatorSeries macd(const Vector& prices) {
  check_price_series(prices);
  if (prices.size() < 26) {
    throw InsufficientHistoryError("MACD needs at least 26 days, got " +
                                   std::to_string(prices.size()));
  }
  const IndicatorSeries fast = ema(prices, 12);
  const IndicatorSeries slow = ema(prices, 26);

  IndicatorSeries out;
  out.valid_from = slow.valid_from;
  out.values = Vector::Zero(prices.size());
  for (Index t = out.valid_from; t < prices.size(); ++t) {
    out.values[t] = fast.values[t] - slow.values[t];
  }
  return out;
}

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "open", "close", "low",   "high",  "volume", "sma5",  "sma10",
      "sma20", "sma40", "ema5", "ema10", "ema20",  "ema40", "macd",
  };
  return names;
}

FeatureMatrix build_feature_matrix(const std::vector<OhlcvBar>& bars) {
  for (std::size_t i = 0; i < bars.size(); ++i) {
    if (i > 0 && !(bars[i - 1].date < bars[i].date)) {
      throw MalformedInputError("bars must be strictly ascending by date");
    }
    if (!bars[i].valid()) {
      throw MalformedInputError("invalid bar at " + bars[i].date.to_string());
    }
  }
  constexpr Index kLongestWindow = 40;
  const Index n = static_cast<Index>(bars.size());
  if (n < kLongestWindow) {
    throw InsufficientHistoryError("need at least 40 bars, got " + std::to_string(n));
  }

  Vector close(n);
  for (Index i = 0; i < n; ++i) close[i] = bars[static_cast<std::size_t>(i)].close;

  const std::array<std::pair<Feature, Index>, 8> ma_specs = {{
      {kSma5, 5}, {kSma10, 10}, {kSma20, 20}, {kSma40, 40},
      {kEma5, 5}, {kEma10, 10}, {kEma20, 20}, {kEma40, 40},
  }};

  Matrix full(n, kFeatureCount);
  Index first_valid = 0;
  for (Index i = 0; i < n; ++i) {
    const auto& bar = bars[static_cast<std::size_t>(i)];
    full(i, kOpen) = bar.open;
    full(i, kClose) = bar.close;
    full(i, kLow) = bar.low;
    full(i, kHigh) = bar.high;
    full(i, kVolume) = bar.volume;
  }
  for (const auto& [feature, window] : ma_specs) {
    const IndicatorSeries series = (feature >= kEma5) ? ema(close, window) : sma(close, window);
    full.col(feature) = series.values;
    first_valid = std::max(first_valid, series.valid_from);
  }
  const IndicatorSeries macd_series = macd(close);
  full.col(kMacd) = macd_series.values;
  first_valid = std::max(first_valid, macd_series.valid_from);

  FeatureMatrix out;
  out.values = full.bottomRows(n - first_valid);
  out.dates.reserve(static_cast<std::size_t>(n - first_valid));
  for (Index i = first_valid; i < n; ++i) {
    out.dates.push_back(bars[static_cast<std::size_t>(i)].date);
  }
  return out;
}

}  // namespace alstm
