#include "latrans/format.h"

#include <charconv>
#include <cstdio>
#include <system_error>

#include "latrans/errors.h"

namespace latrans {

std::string FormatDouble(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw InvalidInputError("cannot format double");
  return std::string(buf, end);
}

double ParseDouble(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInputError("not a decimal number: '" + text + "'");
  }
  return value;
}

std::string FormatFixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace latrans
