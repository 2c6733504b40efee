#ifndef LATRANS_MATH_UTIL_H_
#define LATRANS_MATH_UTIL_H_

#include <span>
#include <vector>

namespace latrans {

// log(sum(exp(v))) with max shifting. Returns kLogZero for an empty input or
// when every entry is a structural zero.
double LogSumExp(std::span<const double> values);

// Normalized probabilities from log-weights via max-shifted exponentiation.
// Structural zeros (IsLogZero) get weight exactly 0. Throws InvalidInputError
// when the input is empty or every entry is a structural zero.
std::vector<double> NormalizeLogWeights(std::span<const double> log_weights);

// In-place log-softmax of logits.
void LogSoftmaxInPlace(std::span<double> logits);

}  // namespace latrans

#endif  // LATRANS_MATH_UTIL_H_
