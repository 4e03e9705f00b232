#include "elicit/currency.hpp"

#include <cmath>
#include <cstdlib>

#include "elicit/error.hpp"

namespace elicit {

Currency Currency::from_units(double units) {
  if (!std::isfinite(units) || units < 0.0) {
    throw ValidationError("", "currency amount must be finite and nonnegative");
  }
  return Currency(std::llround(units * kMicrosPerUnit));
}

std::string Currency::to_string() const {
  const std::int64_t whole = micros_ / kMicrosPerUnit;
  std::int64_t frac = std::llabs(micros_ % kMicrosPerUnit);
  std::string out = (micros_ < 0 && whole == 0 ? "-" : "") + std::to_string(whole);
  if (frac == 0) {
    return out;
  }
  std::string digits = std::to_string(frac);
  digits.insert(0, 6 - digits.size(), '0');
  while (!digits.empty() && digits.back() == '0') {
    digits.pop_back();
  }
  return out + "." + digits;
}

Currency Currency::parse(const std::string& text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && text[pos] == '-') {
    negative = true;
    ++pos;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    whole = whole * 10 + (text[pos] - '0');
    ++pos;
    ++digits;
  }
  std::int64_t frac = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t frac_digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (++frac_digits > 6) {
        throw FormatError("currency has more than six fraction digits: " + text);
      }
      frac = frac * 10 + (text[pos] - '0');
      ++pos;
    }
    for (; frac_digits < 6; ++frac_digits) {
      frac *= 10;
    }
    digits += 1;
  }
  if (digits == 0 || pos != text.size()) {
    throw FormatError("not a currency amount: '" + text + "'");
  }
  const std::int64_t micros = whole * kMicrosPerUnit + frac;
  return Currency(negative ? -micros : micros);
}

}  // namespace elicit
