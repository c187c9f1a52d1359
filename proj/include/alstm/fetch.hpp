#pragma once

#include "alstm/ohlcv.hpp"
#include "alstm/types.hpp"

#include <filesystem>
#include <string>

namespace alstm {

struct FetchConfig {
  /// Base URL of a daily-history CSV endpoint; the request is
  /// GET {endpoint}?ticker=T&from=YYYY-MM-DD&to=YYYY-MM-DD.
  std::string endpoint;
  std::filesystem::path data_dir = "data";
  int max_retries = 3;
  int backoff_initial_ms = 250;  // doubles per retry, capped
  int backoff_cap_ms = 4000;
  bool offline = false;  // cache only, no network
};

/// Cache location for one ticker/range request.
std::filesystem::path cache_path(const FetchConfig& config, const std::string& ticker, Date from,
                                 Date to);

/// Daily history for [from, to]. Served byte-identically from the local
/// cache when present; otherwise fetched over HTTP (capped exponential
/// backoff on failures), validated, written as canonical CSV via
/// temp-then-rename, and recorded in the data directory's manifest.json.
/// Throws TransportError on HTTP failure, NoDataError when the range holds
/// no trading days, and NoDataError in offline mode on a cache miss.
TickerHistory fetch_history(const std::string& ticker, Date from, Date to,
                            const FetchConfig& config);

}  // namespace alstm
