#pragma once

#include "alstm/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace alstm {

/// One trading day of a market index.
struct OhlcvBar {
  Date date;
  Scalar open = 0;
  Scalar high = 0;
  Scalar low = 0;
  Scalar close = 0;
  Scalar volume = 0;

  /// low <= min(open, close) <= max(open, close) <= high, prices > 0,
  /// volume >= 0, all fields finite.
  bool valid() const;
};

/// Date-ascending daily history of one index.
struct TickerHistory {
  std::string ticker;
  std::vector<OhlcvBar> bars;
};

struct ParseResult {
  TickerHistory history;
  /// Rows dropped for missing/non-finite fields, invariant violations, or
  /// duplicate dates.
  int skipped_rows = 0;
};

/// Parses OHLCV CSV. Requires a header naming at least
/// date,open,high,low,close,volume (case-insensitive, extra columns such as
/// a vendor's "Adj Close" are ignored). Rows with missing or non-finite
/// fields are skipped and tallied; bars are returned sorted by date.
/// Throws FormatError on a missing header, wrong field count, or an
/// unparseable non-empty cell.
ParseResult parse_ohlcv_csv(std::istream& in, std::string ticker = {});
ParseResult parse_ohlcv_csv(const std::string& text, std::string ticker = {});

/// Canonical CSV: header "date,open,high,low,close,volume", LF line ends,
/// shortest round-trip numerals. parse(serialize(h)) == h.
std::string serialize_ohlcv_csv(const TickerHistory& history);

}  // namespace alstm
