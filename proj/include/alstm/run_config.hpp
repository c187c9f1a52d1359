#pragma once

#include "alstm/dataset.hpp"
#include "alstm/train.hpp"
#include "alstm/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace alstm {

/// Flat key=value run configuration; unknown keys are rejected.
struct RunConfig {
  std::vector<std::string> tickers = {"BVSP",      "NYA", "DJI",  "IXIC",  "RUT", "FCHI",
                                      "FTSE", "000001.SS", "HSI", "N225", "BSESN"};
  std::string data_dir = "data";
  std::string endpoint;  // daily-history CSV service; empty = offline only
  bool offline = false;
  Date fetch_from = Date::from_ymd(2007, 1, 1);
  Date fetch_to = Date::from_ymd(2020, 12, 10);
  SplitBoundaries split{Date::from_ymd(2007, 1, 1), Date::from_ymd(2018, 10, 19),
                        Date::from_ymd(2020, 3, 18), Date::from_ymd(2020, 12, 10)};
  TrainingConfig training;

  /// Applies one key=value assignment; throws ConfigError on an unknown key
  /// or unparseable value.
  void apply(const std::string& key, const std::string& value);

  static RunConfig from_file(const std::filesystem::path& path);

  /// Every accepted key, for documentation and error messages.
  static const std::vector<std::string>& known_keys();
};

}  // namespace alstm
