#include "alstm/metrics.hpp"

#include "alstm/errors.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace alstm;
namespace fs = std::filesystem;

namespace {

Vector vec(std::initializer_list<Scalar> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (Scalar x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("mse and mae fixtures") {
  CHECK(mse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(mae(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(mse(vec({1, 3}), vec({2, 2})) == 1.0);
  CHECK(mae(vec({1, 3}), vec({2, 2})) == 1.0);

  CHECK_THROWS_AS(mse(vec({1}), vec({1, 2})), DimensionError);
  CHECK_THROWS_AS(mae(Vector(0), Vector(0)), NoDataError);
}

TEST_CASE("scaling errors scales mae linearly and mse quadratically") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<Scalar> uniform(-5.0, 5.0);
  Vector actual(50), error(50);
  for (Index i = 0; i < 50; ++i) {
    actual[i] = uniform(rng);
    error[i] = uniform(rng);
  }
  const Scalar k = 3.5;
  const Vector pred1 = actual + error;
  const Vector predk = actual + k * error;
  CHECK(mae(predk, actual) == doctest::Approx(k * mae(pred1, actual)).epsilon(1e-12));
  CHECK(mse(predk, actual) == doctest::Approx(k * k * mse(pred1, actual)).epsilon(1e-12));
}

TEST_CASE("mape fixtures") {
  CHECK(mape(vec({5, 5}), vec({5, 5})) == 0.0);
  CHECK(mape(vec({110, 180}), vec({100, 200})) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(mape(vec({1}), vec({0})), Error);
}

TEST_CASE("trend accuracy fixtures") {
  // prev 100, actual 105, pred 101: both moved up -> correct.
  CHECK(trend_accuracy(vec({101}), vec({105}), vec({100})) == 100.0);
  // prev 100, actual 95, pred 102: predicted up, moved down -> incorrect.
  CHECK(trend_accuracy(vec({102}), vec({95}), vec({100})) == 0.0);

  // Hand-enumerated 3-day fixture with one tie (zero variation = positive):
  // day1: prev 10, actual 11 (up), pred 9 (down)   -> wrong
  // day2: prev 11, actual 11 (tie=up), pred 12 (up) -> correct
  // day3: prev 11, actual 10 (down), pred 10.5 (down) -> correct
  const Scalar acc = trend_accuracy(vec({9, 12, 10.5}), vec({11, 11, 10}), vec({10, 11, 11}));
  CHECK(acc == doctest::Approx(200.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("trend accuracy is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<Scalar> uniform(10.0, 20.0);
  Vector pred(40), actual(40), prev(40);
  for (Index i = 0; i < 40; ++i) {
    pred[i] = uniform(rng);
    actual[i] = uniform(rng);
    prev[i] = uniform(rng);
  }
  const Scalar base = trend_accuracy(pred, actual, prev);

  auto cube = [](const Vector& v) { return v.array().cube().matrix().eval(); };
  CHECK(trend_accuracy(cube(pred), cube(actual), cube(prev)) == base);

  auto affine = [](const Vector& v) { return (2.0 * v.array() + 5.0).matrix().eval(); };
  CHECK(trend_accuracy(affine(pred), affine(actual), affine(prev)) == base);
}

TEST_CASE("persistence forecast mape equals the mean absolute one-day return") {
  const Vector actual = vec({100, 104, 102, 108});
  const Vector prev = vec({98, 100, 104, 102});
  const Vector pred = prev;  // always predicts yesterday's value
  Scalar expected = 0;
  for (Index i = 0; i < actual.size(); ++i) {
    expected += std::abs(actual[i] - prev[i]) / actual[i];
  }
  expected *= 100.0 / static_cast<Scalar>(actual.size());
  CHECK(mape(pred, actual) == doctest::Approx(expected).epsilon(1e-12));
}

namespace {

/// A dataset and a rigged network whose prediction always equals the
/// normalized constant (0,0,0); samples put the targets at exactly that
/// value, so every error metric must vanish.
struct RiggedFixture {
  AssociatedNetwork net;
  std::map<std::string, NormalizationParams> normalization;
  std::vector<WindowedSample> samples;

  RiggedFixture() {
    ArchitectureConfig arch;
    arch.n_window = 7;
    arch.input_dim = kFeatureCount;
    arch.lstm_units = 3;
    arch.dense_hidden = 2;
    std::mt19937_64 rng(1);
    net = make_network(arch, rng);
    for (auto& ref : parameter_refs(net)) Eigen::Map<Vector>(ref.data, ref.size).setZero();

    NormalizationParams params;
    params.min = Vector::Zero(kFeatureCount);
    params.max = Vector::Ones(kFeatureCount);
    params.min[kOpen] = 100.0;
    params.max[kOpen] = 200.0;
    params.min[kLow] = 95.0;
    params.max[kLow] = 195.0;
    params.min[kHigh] = 105.0;
    params.max[kHigh] = 205.0;
    normalization.emplace("RIG", params);

    for (int i = 0; i < 5; ++i) {
      WindowedSample sample;
      // Window rows sit above the targets, so the realized move is "down"
      // on every day and never ties.
      sample.inputs = Matrix::Constant(7, kFeatureCount, 0.3);
      sample.targets.setZero();  // equals the rigged prediction
      sample.ticker = "RIG";
      sample.target_date = Date::from_epoch_days(18000 + i);
      samples.push_back(sample);
    }
  }
};

}  // namespace

TEST_CASE("rigged identity model scores zero error and full trend accuracy") {
  const RiggedFixture fixture;
  const EvaluationReport report =
      evaluate(fixture.net, fixture.normalization, fixture.samples, "test");

  CHECK(report.total_samples == 5);
  CHECK(report.pooled_mse_normalized == 0.0);
  REQUIRE(report.per_ticker.count("RIG") == 1);
  const TickerMetrics& m = report.per_ticker.at("RIG");
  CHECK(m.samples == 5);
  CHECK(m.mse_normalized == 0.0);
  CHECK(m.mae_overall == 0.0);
  CHECK(m.mape_overall == 0.0);
  CHECK(m.mape.open == 0.0);
  CHECK(m.trend.open == 100.0);
  CHECK(m.trend.low == 100.0);
  CHECK(m.trend.high == 100.0);
}

TEST_CASE("report carries one row per distinct ticker") {
  const RiggedFixture fixture;
  auto samples = fixture.samples;
  auto normalization = fixture.normalization;
  normalization.emplace("OTHER", normalization.at("RIG"));
  for (int i = 0; i < 3; ++i) {
    WindowedSample s = fixture.samples[static_cast<std::size_t>(i)];
    s.ticker = "OTHER";
    samples.push_back(s);
  }
  const EvaluationReport report = evaluate(fixture.net, normalization, samples, "test");
  CHECK(report.per_ticker.size() == 2);
  CHECK(report.per_ticker.at("OTHER").samples == 3);

  CHECK_THROWS_AS(evaluate(fixture.net, normalization, {}, "test"), NoDataError);
}

TEST_CASE("report labels normalized and denormalized scales") {
  const RiggedFixture fixture;
  const EvaluationReport report =
      evaluate(fixture.net, fixture.normalization, fixture.samples, "validation");
  const std::string json_text = report_to_json(report);
  CHECK(json_text.find("\"mse_normalized\"") != std::string::npos);
  CHECK(json_text.find("\"pooled_mse_normalized\"") != std::string::npos);
  CHECK(json_text.find("\"partition\": \"validation\"") != std::string::npos);
  CHECK(json_text.find("\"mape\"") != std::string::npos);

  const std::string table = render_report_table(report);
  CHECK(table.find("MSE(norm)") != std::string::npos);
  CHECK(table.find("RIG") != std::string::npos);
}

TEST_CASE("export writes a parseable date-ascending series") {
  const RiggedFixture fixture;
  const fs::path path = fs::temp_directory_path() / "alstm_plot_test.csv";
  export_prediction_series(fixture.net, fixture.normalization, fixture.samples, "RIG", path);

  std::ifstream in(path);
  REQUIRE(in);
  std::string header;
  std::getline(in, header);
  CHECK(header == "date,actual_open,pred_open,actual_low,pred_low,actual_high,pred_high");

  int rows = 0;
  std::string line, prev_date;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string date, cell;
    std::getline(fields, date, ',');
    CHECK(date > prev_date);
    prev_date = date;
    // actual_open denormalizes back to the raw target price.
    std::getline(fields, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(100.0).epsilon(1e-9));
    std::getline(fields, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(100.0).epsilon(1e-9));
  }
  CHECK(rows == 5);

  CHECK_THROWS_AS(export_prediction_series(fixture.net, fixture.normalization, fixture.samples,
                                           "MISSING", path),
                  MissingParamsError);
  fs::remove(path);
}
