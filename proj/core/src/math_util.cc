#include "latrans/math_util.h"

#include <algorithm>
#include <cmath>

#include "latrans/errors.h"
#include "latrans/vocabulary.h"

namespace latrans {

double LogSumExp(std::span<const double> values) {
  double max_value = kLogZero;
  for (double v : values) max_value = std::max(max_value, v);
  if (IsLogZero(max_value)) return kLogZero;
  double acc = 0.0;
  for (double v : values) {
    if (!IsLogZero(v)) acc += std::exp(v - max_value);
  }
  return max_value + std::log(acc);
}

std::vector<double> NormalizeLogWeights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw InvalidInputError("no log-weights to normalize");
  double max_value = kLogZero;
  for (double v : log_weights) max_value = std::max(max_value, v);
  if (IsLogZero(max_value)) {
    throw InvalidInputError("every log-weight is a structural zero");
  }
  std::vector<double> out(log_weights.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (IsLogZero(log_weights[i])) continue;
    out[i] = std::exp(log_weights[i] - max_value);
    total += out[i];
  }
  for (double& w : out) w /= total;
  return out;
}

void LogSoftmaxInPlace(std::span<double> logits) {
  const double lse = LogSumExp(logits);
  for (double& v : logits) v = IsLogZero(v) ? kLogZero : v - lse;
}

}  // namespace latrans
