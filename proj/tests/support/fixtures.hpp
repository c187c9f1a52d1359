#pragma once

#include "alstm/dataset.hpp"
#include "alstm/ohlcv.hpp"
#include "alstm/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace alstm::testing {

/// Noiseless sinusoid OHLCV fixture: amplitude-varied prices derived from
/// one sine wave, consecutive calendar days.
inline std::vector<OhlcvBar> make_sine_bars(int days, Date start = Date::from_ymd(2019, 1, 2)) {
  std::vector<OhlcvBar> bars;
  bars.reserve(static_cast<std::size_t>(days));
  for (int t = 0; t < days; ++t) {
    const double phase = 2.0 * M_PI * t / 40.0;
    const double base = 100.0 + 10.0 * std::sin(phase);
    OhlcvBar bar;
    bar.date = Date::from_epoch_days(start.epoch_days() + t);
    bar.open = base;
    bar.close = 100.0 + 10.0 * std::sin(phase + 0.35);
    bar.low = std::min(bar.open, bar.close) * 0.995;
    bar.high = std::max(bar.open, bar.close) * 1.005;
    bar.volume = 1.0e6 + 1.0e5 * std::sin(2.0 * M_PI * t / 17.0);
    bars.push_back(bar);
  }
  return bars;
}

/// 85/10/5 boundaries over the feature rows (bars minus the 39-day
/// indicator warm-up).
inline SplitBoundaries sine_split_boundaries(const std::vector<OhlcvBar>& bars) {
  const int warmup = 39;
  const int rows = static_cast<int>(bars.size()) - warmup;
  const int train_rows = static_cast<int>(std::lround(rows * 0.85));
  const int val_rows = static_cast<int>(std::lround(rows * 0.10));
  SplitBoundaries b;
  b.train_start = bars.front().date;
  b.train_end = bars[static_cast<std::size_t>(warmup + train_rows - 1)].date;
  b.val_end = bars[static_cast<std::size_t>(warmup + train_rows + val_rows - 1)].date;
  b.test_end = bars.back().date;
  return b;
}

/// Geometric random walk, strictly positive.
inline Vector make_random_walk(Index days, std::uint64_t seed, Scalar start = 100.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> step(0.0, 0.01);
  Vector prices(days);
  Scalar price = start;
  for (Index t = 0; t < days; ++t) {
    price *= std::exp(step(rng));
    prices[t] = price;
  }
  return prices;
}

inline std::vector<OhlcvBar> bars_from_closes(const Vector& closes,
                                              Date start = Date::from_ymd(2015, 3, 2)) {
  std::vector<OhlcvBar> bars;
  bars.reserve(static_cast<std::size_t>(closes.size()));
  for (Index t = 0; t < closes.size(); ++t) {
    OhlcvBar bar;
    bar.date = Date::from_epoch_days(start.epoch_days() + static_cast<int>(t));
    bar.close = closes[t];
    bar.open = closes[t] * 1.001;
    bar.high = std::max(bar.open, bar.close) * 1.004;
    bar.low = std::min(bar.open, bar.close) * 0.996;
    bar.volume = 5.0e5 + 1000.0 * static_cast<Scalar>(t % 13);
    bars.push_back(bar);
  }
  return bars;
}

}  // namespace alstm::testing
