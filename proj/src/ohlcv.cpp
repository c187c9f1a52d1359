#include "alstm/ohlcv.hpp"

#include "alstm/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

namespace alstm {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool is_missing(std::string_view cell) {
  if (cell.empty()) return true;
  const std::string lower = to_lower(cell);
  return lower == "null" || lower == "nan" || lower == "na";
}

bool parse_number(std::string_view cell, Scalar& out) {
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_number(Scalar v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

bool OhlcvBar::valid() const {
  const bool finite = std::isfinite(open) && std::isfinite(high) &&
                      std::isfinite(low) && std::isfinite(close) &&
                      std::isfinite(volume);
  if (!finite) return false;
  if (open <= 0 || high <= 0 || low <= 0 || close <= 0 || volume < 0) return false;
  return low <= std::min(open, close) && std::max(open, close) <= high;
}

ParseResult parse_ohlcv_csv(std::istream& in, std::string ticker) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV: missing header row");

  const auto header = split_fields(line);
  int col_date = -1, col_open = -1, col_high = -1, col_low = -1, col_close = -1,
      col_volume = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = to_lower(header[i]);
    const int idx = static_cast<int>(i);
    if (name == "date") col_date = idx;
    else if (name == "open") col_open = idx;
    else if (name == "high") col_high = idx;
    else if (name == "low") col_low = idx;
    else if (name == "close") col_close = idx;
    else if (name == "volume") col_volume = idx;
  }
  if (col_date < 0 || col_open < 0 || col_high < 0 || col_low < 0 ||
      col_close < 0 || col_volume < 0) {
    throw FormatError("CSV header must name date,open,high,low,close,volume");
  }

  ParseResult result;
  result.history.ticker = std::move(ticker);
  auto& bars = result.history.bars;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw FormatError("row has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()),
                        line_no);
    }

    bool missing = false;
    for (int col : {col_date, col_open, col_high, col_low, col_close, col_volume}) {
      if (is_missing(fields[static_cast<std::size_t>(col)])) missing = true;
    }
    if (missing) {
      ++result.skipped_rows;
      continue;
    }

    const auto date = Date::try_parse(fields[static_cast<std::size_t>(col_date)]);
    if (!date) {
      throw FormatError("unparseable date '" +
                            std::string(fields[static_cast<std::size_t>(col_date)]) + "'",
                        line_no);
    }

    OhlcvBar bar;
    bar.date = *date;
    struct Slot {
      int col;
      Scalar* dst;
    };
    for (const auto& [col, dst] : {Slot{col_open, &bar.open}, Slot{col_high, &bar.high},
                                   Slot{col_low, &bar.low}, Slot{col_close, &bar.close},
                                   Slot{col_volume, &bar.volume}}) {
      if (!parse_number(fields[static_cast<std::size_t>(col)], *dst)) {
        throw FormatError("unparseable number '" +
                              std::string(fields[static_cast<std::size_t>(col)]) + "'",
                          line_no);
      }
    }

    if (!bar.valid()) {
      ++result.skipped_rows;
      continue;
    }
    bars.push_back(bar);
  }

  std::stable_sort(bars.begin(), bars.end(),
                   [](const OhlcvBar& a, const OhlcvBar& b) { return a.date < b.date; });
  // Vendor files occasionally repeat a session; keep the first row per date.
  auto last = std::unique(bars.begin(), bars.end(), [](const OhlcvBar& a, const OhlcvBar& b) {
    return a.date == b.date;
  });
  result.skipped_rows += static_cast<int>(bars.end() - last);
  bars.erase(last, bars.end());
  return result;
}

ParseResult parse_ohlcv_csv(const std::string& text, std::string ticker) {
  std::istringstream in(text);
  return parse_ohlcv_csv(in, std::move(ticker));
}

std::string serialize_ohlcv_csv(const TickerHistory& history) {
  std::string out = "date,open,high,low,close,volume\n";
  for (const auto& bar : history.bars) {
    out += bar.date.to_string();
    out += ',';
    out += format_number(bar.open);
    out += ',';
    out += format_number(bar.high);
    out += ',';
    out += format_number(bar.low);
    out += ',';
    out += format_number(bar.close);
    out += ',';
    out += format_number(bar.volume);
    out += '\n';
  }
  return out;
}

}  // namespace alstm
