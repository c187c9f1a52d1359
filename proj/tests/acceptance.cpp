// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero when any required criterion fails. Criteria 8 and 9 are
// non-binding reproduction bands over real cached market data; they run
// only when ALSTM_REPRO_DIR points at a directory holding dataset.alstm
// and run/best.ckpt, and are logged without affecting the exit code.

#include "alstm/dataset.hpp"
#include "alstm/errors.hpp"
#include "alstm/indicators.hpp"
#include "alstm/metrics.hpp"
#include "alstm/model.hpp"
#include "alstm/train.hpp"

#include "support/fixtures.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace alstm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << "\n";
  if (!pass) ++g_failures;
}

void report_skip(int criterion, const std::string& detail) {
  std::cout << "SKIP criterion " << criterion << ": " << detail << "\n";
}

void report_band(int criterion, bool pass, const std::string& detail) {
  // Non-binding: logged, never failing the suite.
  std::cout << (pass ? "PASS" : "WARN") << " criterion " << criterion << ": " << detail << "\n";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --------------------------------------------------------------------------
// 1. Analytic BPTT gradients vs central finite differences on the full
//    associated network (4-unit layers, window 7, 14 features).

void criterion_gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();

  ArchitectureConfig arch;
  arch.n_window = 7;
  arch.input_dim = kFeatureCount;
  arch.lstm_units = 4;
  arch.open_lstm_layers = 2;
  arch.dense_hidden = 4;
  arch.dropout_rate = 0.2;

  std::mt19937_64 rng(2718);
  AssociatedNetwork net = make_network(arch, rng);

  std::uniform_real_distribution<Scalar> uniform(0.0, 1.0);
  WindowedSample sample;
  sample.inputs.resize(arch.n_window, arch.input_dim);
  for (Index r = 0; r < arch.n_window; ++r) {
    for (Index c = 0; c < arch.input_dim; ++c) sample.inputs(r, c) = uniform(rng);
  }
  sample.targets = Vector3(uniform(rng), uniform(rng), uniform(rng));

  const GradientCheckReport identity_report =
      check_network_gradients(net, sample, identity_masks(arch), 1e-5);
  const DropoutMasks fixed_masks = sample_masks(arch, rng);
  const GradientCheckReport mask_report =
      check_network_gradients(net, sample, fixed_masks, 1e-5);

  const double elapsed = seconds_since(start);
  const Scalar worst = std::max(identity_report.max_relative_error,
                                mask_report.max_relative_error);
  std::ostringstream detail;
  detail << "BPTT vs central differences, worst relative error " << worst << " (identity "
         << identity_report.max_relative_error << ", fixed dropout mask "
         << mask_report.max_relative_error << "), " << elapsed << " s";
  report(1, worst < 1e-4 && elapsed < 30.0, detail.str());
}

// --------------------------------------------------------------------------
// 2. Equation-literal scalar cell vs the production cell.

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void scalar_cell_step(const LstmLayerParams& params, const std::vector<double>& x,
                      std::vector<double>& h, std::vector<double>& c) {
  const std::size_t units = static_cast<std::size_t>(params.units());
  std::vector<double> concat = x;
  concat.insert(concat.end(), h.begin(), h.end());
  std::vector<double> h_next(units), c_next(units);
  for (std::size_t u = 0; u < units; ++u) {
    double zf = params.bf[static_cast<Index>(u)];
    double zi = params.bi[static_cast<Index>(u)];
    double zo = params.bo[static_cast<Index>(u)];
    double zc = params.bc[static_cast<Index>(u)];
    for (std::size_t k = 0; k < concat.size(); ++k) {
      zf += params.Wf(static_cast<Index>(u), static_cast<Index>(k)) * concat[k];
      zi += params.Wi(static_cast<Index>(u), static_cast<Index>(k)) * concat[k];
      zo += params.Wo(static_cast<Index>(u), static_cast<Index>(k)) * concat[k];
      zc += params.Wc(static_cast<Index>(u), static_cast<Index>(k)) * concat[k];
    }
    const double f = logistic(zf);
    const double i = logistic(zi);
    const double o = logistic(zo);
    const double c_hat = std::tanh(zc);
    c_next[u] = f * c[u] + i * c_hat;
    h_next[u] = o * std::tanh(c_next[u]);
  }
  h = h_next;
  c = c_next;
}

void criterion_equation_fidelity() {
  std::mt19937_64 rng(1618);
  std::uniform_real_distribution<Scalar> uniform(-1.5, 1.5);
  std::uniform_int_distribution<Index> size(1, 4);

  Scalar worst = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const Index units = size(rng);
    const Index input_dim = size(rng);
    LstmLayerParams params = LstmLayerParams::zeros(units, input_dim);
    for (Matrix* W : {&params.Wf, &params.Wi, &params.Wo, &params.Wc}) {
      for (Index r = 0; r < W->rows(); ++r) {
        for (Index c = 0; c < W->cols(); ++c) (*W)(r, c) = uniform(rng);
      }
    }
    for (Vector* b : {&params.bf, &params.bi, &params.bo, &params.bc}) {
      for (Index r = 0; r < b->size(); ++r) (*b)[r] = uniform(rng);
    }

    const DropoutMask mask = DropoutMask::identity(units);
    LstmState state = LstmState::zero(units);
    std::vector<double> h(static_cast<std::size_t>(units), 0.0);
    std::vector<double> c(static_cast<std::size_t>(units), 0.0);
    for (int t = 0; t < 5; ++t) {
      Vector x(input_dim);
      std::vector<double> x_plain;
      for (Index k = 0; k < input_dim; ++k) {
        x[k] = uniform(rng);
        x_plain.push_back(x[k]);
      }
      state = lstm_cell_forward(x, state, params, mask);
      scalar_cell_step(params, x_plain, h, c);
      for (Index u = 0; u < units; ++u) {
        worst = std::max(worst, std::abs(state.h[u] - h[static_cast<std::size_t>(u)]));
        worst = std::max(worst, std::abs(state.c[u] - c[static_cast<std::size_t>(u)]));
      }
    }
  }
  std::ostringstream detail;
  detail << "scalar gate equations vs production cell, 100 draws, worst |diff| " << worst;
  report(2, worst < 1e-12, detail.str());
}

// --------------------------------------------------------------------------
// 3. Indicators vs brute-force rolling definitions.

void criterion_indicator_oracles() {
  const Vector prices = alstm::testing::make_random_walk(1000, 31415);
  Scalar worst = 0;

  for (Index n : {5, 10, 20, 40}) {
    const IndicatorSeries fast = sma(prices, n);
    for (Index t = n - 1; t < prices.size(); ++t) {
      Scalar sum = 0;
      for (Index k = t - n + 1; k <= t; ++k) sum += prices[k];
      const Scalar oracle = sum / static_cast<Scalar>(n);
      worst = std::max(worst, std::abs(fast.values[t] - oracle) / std::abs(oracle));
    }
  }
  for (Index n : {5, 10, 12, 20, 26, 40}) {
    const IndicatorSeries fast = ema(prices, n);
    const Scalar alpha = 2.0 / static_cast<Scalar>(n + 1);
    Scalar seed = 0;
    for (Index k = 0; k < n; ++k) seed += prices[k];
    Scalar value = seed / static_cast<Scalar>(n);
    worst = std::max(worst, std::abs(fast.values[n - 1] - value) / std::abs(value));
    for (Index t = n; t < prices.size(); ++t) {
      value = alpha * prices[t] + (1.0 - alpha) * value;
      worst = std::max(worst, std::abs(fast.values[t] - value) / std::abs(value));
    }
  }

  const IndicatorSeries macd_series = macd(prices);
  {
    // Oracle route: independent EMA recurrences subtracted.
    const Scalar alpha12 = 2.0 / 13.0, alpha26 = 2.0 / 27.0;
    Scalar seed12 = 0, seed26 = 0;
    for (Index k = 0; k < 12; ++k) seed12 += prices[k];
    for (Index k = 0; k < 26; ++k) seed26 += prices[k];
    Scalar e12 = seed12 / 12.0;
    for (Index t = 12; t < 26; ++t) e12 = alpha12 * prices[t] + (1.0 - alpha12) * e12;
    Scalar e26 = seed26 / 26.0;
    for (Index t = 26; t < prices.size(); ++t) {
      e12 = alpha12 * prices[t] + (1.0 - alpha12) * e12;
      e26 = alpha26 * prices[t] + (1.0 - alpha26) * e26;
      const Scalar oracle = e12 - e26;
      // The subtraction crosses zero; relative precision is carried by the
      // EMA operands, so the error is measured against their scale.
      worst = std::max(worst, std::abs(macd_series.values[t] - oracle) /
                                  (std::abs(e12) + std::abs(e26)));
    }
  }

  const IndicatorSeries constant_macd = macd(Vector::Constant(200, 100.0));
  Scalar macd_const_max = 0;
  for (Index t = constant_macd.valid_from; t < 200; ++t) {
    macd_const_max = std::max(macd_const_max, std::abs(constant_macd.values[t]));
  }

  std::ostringstream detail;
  detail << "SMA/EMA/MACD vs brute force on a 1000-point walk, worst relative error " << worst
         << "; MACD(constant) max |value| " << macd_const_max;
  report(3, worst < 1e-12 && macd_const_max == 0.0, detail.str());
}

// --------------------------------------------------------------------------
// 4. Min-max normalization identities and train-only dependence.

void criterion_normalization() {
  const auto bars = alstm::testing::make_sine_bars(300);
  const FeatureMatrix fm = build_feature_matrix(bars);
  const SplitBoundaries split = alstm::testing::sine_split_boundaries(bars);
  const RowPartitions parts = split_by_date(fm, split);
  const NormalizationParams params = fit_minmax(parts.train.values);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<Scalar> uniform(-1.0, 2.0);  // normalized, beyond [0,1]
  Scalar worst = 0;
  for (int k = 0; k < 2000; ++k) {
    const Index feature = static_cast<Index>(k % kFeatureCount);
    if (params.degenerate(feature)) continue;
    // Raw values drawn across the feature's own scale; the affine map's
    // conditioning makes that the scale the roundtrip error lives on.
    const Scalar range = params.max[feature] - params.min[feature];
    const Scalar x = params.min[feature] + uniform(rng) * range;
    const Scalar roundtrip = invert_minmax(apply_minmax(x, params, feature), params, feature);
    worst = std::max(worst, std::abs(roundtrip - x) / std::max(std::abs(x), range));
  }

  // Deleting every validation/test row and refitting must not move the fit.
  FeatureMatrix train_rows;
  train_rows.values = parts.train.values;
  train_rows.dates = parts.train.dates;
  const RowPartitions reparts = split_by_date(train_rows, split);
  const NormalizationParams refit = fit_minmax(reparts.train.values);
  const bool train_only = (refit.min == params.min) && (refit.max == params.max) &&
                          reparts.validation.values.rows() == 0 &&
                          reparts.test.values.rows() == 0;

  std::ostringstream detail;
  detail << "invert(apply(x)) worst relative error " << worst
         << "; refit on train-only rows identical: " << (train_only ? "yes" : "no");
  report(4, worst < 1e-12 && train_only, detail.str());
}

// --------------------------------------------------------------------------
// 5. Bitwise-deterministic training for any worker count.

void criterion_determinism() {
  const auto bars = alstm::testing::make_sine_bars(160);
  const SplitBoundaries split = alstm::testing::sine_split_boundaries(bars);
  const SplitDataset dataset = pool_indices({prepare_ticker("SINE", bars, split, 7)}, 5);

  TrainingConfig config;
  config.epochs = 4;
  config.batch_size = 16;
  config.seed = 1234;
  config.arch.n_window = 7;
  config.arch.input_dim = kFeatureCount;
  config.arch.lstm_units = 8;
  config.arch.dense_hidden = 6;

  const fs::path dir_a = fs::temp_directory_path() / "alstm_acc_det_a";
  const fs::path dir_b = fs::temp_directory_path() / "alstm_acc_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  TrainingConfig config_a = config;
  config_a.threads = 1;
  TrainingConfig config_b = config;
  config_b.threads = 4;
  train(dataset, config_a, dir_a);
  train(dataset, config_b, dir_b);

  bool identical = read_file(dir_a / "history.csv") == read_file(dir_b / "history.csv");
  int compared = 0;
  for (int e = 1; e <= config.epochs; ++e) {
    char name[32];
    std::snprintf(name, sizeof(name), "checkpoint-%04d.ckpt", e);
    const std::string bytes_a = read_file(dir_a / name);
    identical = identical && !bytes_a.empty() && bytes_a == read_file(dir_b / name);
    ++compared;
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  std::ostringstream detail;
  detail << "two full runs, 1 vs 4 workers: history.csv and " << compared
         << " checkpoints " << (identical ? "bitwise identical" : "DIFFER");
  report(5, identical, detail.str());
}

// --------------------------------------------------------------------------
// 6. Convergence smoke test on the noiseless sinusoid.

void criterion_convergence() {
  const auto start = std::chrono::steady_clock::now();

  const auto bars = alstm::testing::make_sine_bars(600);
  const SplitBoundaries split = alstm::testing::sine_split_boundaries(bars);
  const SplitDataset dataset = pool_indices({prepare_ticker("SINE", bars, split, 7)}, 42);

  TrainingConfig config;  // stock defaults: lr 6e-4, 100 epochs, window 7
  config.arch.input_dim = kFeatureCount;

  const fs::path dir = fs::temp_directory_path() / "alstm_acc_convergence";
  fs::remove_all(dir);
  const TrainingHistory history = train(dataset, config, dir);
  const double elapsed = seconds_since(start);

  Scalar best_val = std::numeric_limits<Scalar>::infinity();
  for (const auto& epoch : history.epochs) best_val = std::min(best_val, epoch.val_mse);
  fs::remove_all(dir);

  std::ostringstream detail;
  detail << "600-day sinusoid, default config: best validation MSE " << best_val << " in "
         << history.epochs.size() << " epochs, " << elapsed << " s";
  report(6, best_val < 1e-3 && elapsed < 120.0, detail.str());
}

// --------------------------------------------------------------------------
// 7. Metric fixtures, exact.

void criterion_metric_fidelity() {
  auto vec3 = [](Scalar a, Scalar b, Scalar c) {
    Vector v(3);
    v << a, b, c;
    return v;
  };
  Vector two(2);
  two << 110, 180;
  Vector two_actual(2);
  two_actual << 100, 200;

  bool ok = true;
  ok = ok && mape(two, two_actual) == 10.0;
  Vector pred(2), actual(2);
  pred << 1, 3;
  actual << 2, 2;
  ok = ok && mse(pred, actual) == 1.0;
  ok = ok && mae(pred, actual) == 1.0;
  const Scalar tie_fixture =
      trend_accuracy(vec3(9, 12, 10.5), vec3(11, 11, 10), vec3(10, 11, 11));
  ok = ok && tie_fixture == 200.0 / 3.0;
  ok = ok && mse(actual, actual) == 0.0;

  std::ostringstream detail;
  detail << "MAPE 10% fixture, MSE/MAE unit fixtures, tie-day trend fixture "
         << tie_fixture << "%";
  report(7, ok, detail.str());
}

// --------------------------------------------------------------------------
// 8./9. Non-binding reproduction bands over real cached data.

void criteria_reproduction_bands() {
  const char* repro = std::getenv("ALSTM_REPRO_DIR");
  if (repro == nullptr) {
    report_skip(8, "non-binding band: set ALSTM_REPRO_DIR to a directory with dataset.alstm "
                   "and run/best.ckpt built from the cached default index tickers");
    report_skip(9, "non-binding band: requires the same reproduction run");
    return;
  }
  try {
    const fs::path base(repro);
    const SplitDataset dataset = load_dataset(base / "dataset.alstm");
    const Checkpoint best = load_checkpoint(base / "run" / "best.ckpt");
    const EvaluationReport report_data =
        evaluate(best.network, best.normalization, dataset.test, "test");

    std::ostringstream detail8;
    detail8 << "pooled test MSE " << report_data.pooled_mse_normalized
            << " (band <= 1e-2)";
    bool band8 = report_data.pooled_mse_normalized <= 1e-2;
    if (report_data.per_ticker.count("FTSE") == 1) {
      const Scalar ftse_mape = report_data.per_ticker.at("FTSE").mape_overall;
      detail8 << ", FTSE overall MAPE " << ftse_mape << "% (band <= 3%)";
      band8 = band8 && ftse_mape <= 3.0;
    } else {
      detail8 << ", FTSE absent from dataset";
    }
    report_band(8, band8, detail8.str());

    Scalar best_open_trend = 0;
    std::string best_ticker;
    for (const auto& [ticker, metrics] : report_data.per_ticker) {
      if (metrics.trend.open > best_open_trend) {
        best_open_trend = metrics.trend.open;
        best_ticker = ticker;
      }
    }
    std::ostringstream detail9;
    detail9 << "best open-price trend accuracy " << best_open_trend << "% (" << best_ticker
            << "), band > 55% on at least one ticker";
    report_band(9, best_open_trend > 55.0, detail9.str());
  } catch (const Error& e) {
    report_skip(8, std::string("reproduction data unusable: ") + e.what());
    report_skip(9, "reproduction data unusable");
  }
}

}  // namespace

int main() {
  criterion_gradient_correctness();
  criterion_equation_fidelity();
  criterion_indicator_oracles();
  criterion_normalization();
  criterion_determinism();
  criterion_convergence();
  criterion_metric_fidelity();
  criteria_reproduction_bands();

  if (g_failures > 0) {
    std::cout << g_failures << " required criteria FAILED\n";
    return 1;
  }
  std::cout << "all required criteria passed\n";
  return 0;
}
