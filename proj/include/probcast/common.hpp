#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace probcast {

inline constexpr int kHours = 24;
inline constexpr int kPercentiles = 99;  // grid 1..99
inline constexpr int kPriceLags = 4;     // d-1, d-2, d-3, d-7
inline constexpr int kWeekdays = 7;
inline constexpr int kNumFeatures = kPriceLags * kHours + 2 * kHours + kWeekdays;  // 151

// Feature layout offsets inside a DailyRow.
inline constexpr int kLoadOffset = kPriceLags * kHours;          // 96
inline constexpr int kRenewableOffset = kLoadOffset + kHours;    // 120
inline constexpr int kWeekdayOffset = kRenewableOffset + kHours; // 144

static_assert(kNumFeatures == 151);

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error categories; the CLI maps them onto process exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace probcast
