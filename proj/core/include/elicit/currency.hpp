#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace elicit {

/// Label-budget currency held as an integer count of micro-units, so sums of
/// label costs are exact and associative.
class Currency {
 public:
  static constexpr std::int64_t kMicrosPerUnit = 1'000'000;

  constexpr Currency() = default;

  static constexpr Currency from_micros(std::int64_t micros) { return Currency(micros); }

  /// Rounds to the nearest micro-unit. Throws ValidationError on a negative or
  /// non-finite amount.
  static Currency from_units(double units);

  constexpr std::int64_t micros() const { return micros_; }
  double units() const { return static_cast<double>(micros_) / kMicrosPerUnit; }

  /// Shortest exact decimal form, e.g. "257", "0.1", "40.96".
  std::string to_string() const;

  /// Inverse of to_string; accepts any decimal with at most six fraction digits.
  static Currency parse(const std::string& text);

  constexpr Currency operator+(Currency o) const { return Currency(micros_ + o.micros_); }
  constexpr Currency operator-(Currency o) const { return Currency(micros_ - o.micros_); }
  constexpr Currency operator*(std::int64_t n) const { return Currency(micros_ * n); }
  constexpr Currency& operator+=(Currency o) {
    micros_ += o.micros_;
    return *this;
  }

  constexpr auto operator<=>(const Currency&) const = default;

 private:
  constexpr explicit Currency(std::int64_t micros) : micros_(micros) {}

  std::int64_t micros_ = 0;
};

}  // namespace elicit
