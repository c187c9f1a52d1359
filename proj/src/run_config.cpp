#include "alstm/run_config.hpp"

#include "alstm/errors.hpp"

#include <charconv>
#include <fstream>

namespace alstm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': cannot parse number '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

Date parse_date(const std::string& key, const std::string& value) {
  const auto date = Date::try_parse(value);
  if (!date) throw ConfigError("key '" + key + "': not an ISO date: '" + value + "'");
  return *date;
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto piece =
        trim(comma == std::string::npos ? value.substr(start) : value.substr(start, comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "tickers") {
    tickers = parse_list(value);
    if (tickers.empty()) throw ConfigError("tickers list is empty");
  } else if (key == "data_dir") {
    data_dir = value;
  } else if (key == "endpoint") {
    endpoint = value;
  } else if (key == "offline") {
    offline = parse_bool(key, value);
  } else if (key == "fetch_from") {
    fetch_from = parse_date(key, value);
  } else if (key == "fetch_to") {
    fetch_to = parse_date(key, value);
  } else if (key == "train_start") {
    split.train_start = parse_date(key, value);
  } else if (key == "train_end") {
    split.train_end = parse_date(key, value);
  } else if (key == "val_end") {
    split.val_end = parse_date(key, value);
  } else if (key == "test_end") {
    split.test_end = parse_date(key, value);
  } else if (key == "n_window") {
    training.arch.n_window = parse_number<Index>(key, value);
  } else if (key == "lstm_units") {
    training.arch.lstm_units = parse_number<Index>(key, value);
  } else if (key == "open_lstm_layers") {
    training.arch.open_lstm_layers = parse_number<Index>(key, value);
  } else if (key == "dense_hidden") {
    training.arch.dense_hidden = parse_number<Index>(key, value);
  } else if (key == "dropout") {
    training.arch.dropout_rate = parse_number<Scalar>(key, value);
  } else if (key == "learning_rate") {
    training.learning_rate = parse_number<Scalar>(key, value);
  } else if (key == "epochs") {
    training.epochs = parse_number<int>(key, value);
  } else if (key == "batch_size") {
    training.batch_size = parse_number<int>(key, value);
  } else if (key == "seed") {
    training.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "checkpoint_every") {
    training.checkpoint_every = parse_number<int>(key, value);
  } else if (key == "threads") {
    training.threads = parse_number<int>(key, value);
  } else {
    std::string known;
    for (const auto& k : known_keys()) {
      if (!known.empty()) known += ", ";
      known += k;
    }
    throw ConfigError("unknown config key '" + key + "' (known keys: " + known + ")");
  }
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());

  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    config.apply(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
  }
  return config;
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "tickers",     "data_dir",    "endpoint",      "offline",          "fetch_from",
      "fetch_to",    "train_start", "train_end",     "val_end",          "test_end",
      "n_window",    "lstm_units",  "open_lstm_layers", "dense_hidden",  "dropout",
      "learning_rate", "epochs",    "batch_size",    "seed",             "checkpoint_every",
      "threads",
  };
  return keys;
}

}  // namespace alstm
