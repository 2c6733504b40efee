#ifndef LATRANS_FORMAT_H_
#define LATRANS_FORMAT_H_

#include <string>

namespace latrans {

// Shortest decimal string that parses back to exactly `value`.
std::string FormatDouble(double value);

// Inverse of FormatDouble; throws InvalidInputError on trailing garbage.
double ParseDouble(const std::string& text);

// Fixed-point with `decimals` digits after the point.
std::string FormatFixed(double value, int decimals);

}  // namespace latrans

#endif  // LATRANS_FORMAT_H_
