#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace alstm {

// All numerics run in 64-bit; squared-error magnitudes around 1e-4 sit too
// close to float32 resolution.
using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vector3 = Eigen::Vector3d;
using Index = Eigen::Index;

using MatrixRef = Eigen::Ref<Matrix>;
using ConstMatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<Vector>;
using ConstVectorRef = Eigen::Ref<const Vector>;

/// Calendar date (no time component), stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;
  static Date from_ymd(int year, int month, int day);
  static Date from_epoch_days(std::int32_t days) { return Date(days); }

  /// Parses "YYYY-MM-DD". Returns nullopt on malformed input.
  static std::optional<Date> try_parse(std::string_view iso);
  /// Parses "YYYY-MM-DD"; throws FormatError on malformed input.
  static Date parse(std::string_view iso);

  std::int32_t epoch_days() const { return days_; }
  std::string to_string() const;  // ISO-8601

  auto operator<=>(const Date&) const = default;

 private:
  explicit Date(std::int32_t days) : days_(days) {}
  std::int32_t days_ = 0;
};

}  // namespace alstm
