#include "alstm/fetch.hpp"

#include "alstm/errors.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <thread>

namespace alstm {

using nlohmann::json;

namespace {

std::string sanitize(const std::string& ticker) {
  std::string out;
  for (char c : ticker) {
    out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  return out;
}

/// Splits "https://host:port/some/path" into client target and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint URL must start with http:// or https://: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string http_get_with_retries(const std::string& url, const FetchConfig& config) {
  const auto [base, path] = split_url(url);
  int backoff_ms = config.backoff_initial_ms;
  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms = std::min(backoff_ms * 2, config.backoff_cap_ms);
    }
    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto response = client.Get(path);
    if (!response) {
      last_error = "connection failed (" + httplib::to_string(response.error()) + ")";
      continue;
    }
    if (response->status >= 500) {
      last_error = "HTTP " + std::to_string(response->status);
      continue;
    }
    if (response->status != 200) {
      throw TransportError("GET " + url + ": HTTP " + std::to_string(response->status));
    }
    return response->body;
  }
  throw TransportError("GET " + url + " failed after " + std::to_string(config.max_retries + 1) +
                       " attempts: " + last_error);
}

void record_in_manifest(const FetchConfig& config, const std::string& ticker, Date from, Date to,
                        std::size_t rows) {
  const auto manifest_path = config.data_dir / "manifest.json";
  json manifest = json::object();
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    in >> manifest;
  }
  if (!manifest.contains("entries")) manifest["entries"] = json::array();

  const auto now = std::chrono::system_clock::now();
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
  json entry = {{"ticker", ticker},
                {"from", from.to_string()},
                {"to", to.to_string()},
                {"rows", rows},
                {"retrieved_at_unix", seconds.count()}};
  manifest["entries"].push_back(std::move(entry));

  const auto tmp = manifest_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << manifest.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, manifest_path);
}

}  // namespace

std::filesystem::path cache_path(const FetchConfig& config, const std::string& ticker, Date from,
                                 Date to) {
  return config.data_dir /
         (sanitize(ticker) + "_" + from.to_string() + "_" + to.to_string() + ".csv");
}

TickerHistory fetch_history(const std::string& ticker, Date from, Date to,
                            const FetchConfig& config) {
  if (to < from) throw ConfigError("empty date range: " + from.to_string() + ".." + to.to_string());

  const auto cached = cache_path(config, ticker, from, to);
  if (std::filesystem::exists(cached)) {
    std::ifstream in(cached, std::ios::binary);
    ParseResult result = parse_ohlcv_csv(in, ticker);
    return std::move(result.history);
  }
  if (config.offline) {
    throw NoDataError("offline mode and no cached file for " + ticker + " " + from.to_string() +
                      ".." + to.to_string());
  }
  if (config.endpoint.empty()) {
    throw ConfigError("no fetch endpoint configured (set endpoint= or pass --endpoint)");
  }

  const std::string url = config.endpoint + "?ticker=" + httplib::detail::encode_url(ticker) +
                          "&from=" + from.to_string() + "&to=" + to.to_string();
  const std::string body = http_get_with_retries(url, config);
  if (body.empty()) throw NoDataError("empty payload for " + ticker);

  ParseResult result = parse_ohlcv_csv(body, ticker);
  auto& bars = result.history.bars;
  std::erase_if(bars, [&](const OhlcvBar& bar) { return bar.date < from || to < bar.date; });
  if (bars.empty()) {
    throw NoDataError("no trading days for " + ticker + " in " + from.to_string() + ".." +
                      to.to_string());
  }

  std::filesystem::create_directories(config.data_dir);
  const auto tmp = cached.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << serialize_ohlcv_csv(result.history);
  }
  std::filesystem::rename(tmp, cached);
  record_in_manifest(config, ticker, from, to, bars.size());
  return std::move(result.history);
}

}  // namespace alstm
