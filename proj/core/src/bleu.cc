#include "latrans/bleu.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "latrans/errors.h"
#include "latrans/format.h"

namespace latrans {

namespace {

using NGramCounts = std::map<Sequence, int>;

NGramCounts CountNGrams(const Sequence& seq, int n) {
  NGramCounts counts;
  if (static_cast<int>(seq.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[Sequence(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double CorpusBleu(std::span<const Sequence> hypotheses,
                  std::span<const Sequence> references) {
  if (hypotheses.empty()) throw InvalidInputError("BLEU needs a non-empty corpus");
  if (hypotheses.size() != references.size()) {
    throw InvalidInputError("BLEU needs one reference per hypothesis");
  }
  std::array<long, kBleuMaxOrder> matches{};
  std::array<long, kBleuMaxOrder> totals{};
  long hyp_len = 0;
  long ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const Sequence& hyp = hypotheses[s];
    const Sequence& ref = references[s];
    hyp_len += static_cast<long>(hyp.size());
    ref_len += static_cast<long>(ref.size());
    for (int n = 1; n <= kBleuMaxOrder; ++n) {
      const NGramCounts hyp_counts = CountNGrams(hyp, n);
      const NGramCounts ref_counts = CountNGrams(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
        totals[n - 1] += count;
      }
    }
  }
  if (ref_len == 0) throw InvalidInputError("BLEU references are all empty");
  if (hyp_len == 0 || matches[0] == 0) return 0.0;
  if (matches == totals && hyp_len == ref_len && matches[0] == hyp_len) {
    bool identical = true;
    for (std::size_t s = 0; s < hypotheses.size() && identical; ++s) {
      identical = hypotheses[s] == references[s];
    }
    if (identical) return 100.0;
  }

  double log_precision = 0.0;
  double smooth = 1.0;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    double p;
    if (matches[n] > 0) {
      p = static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
    } else {
      // Also covers orders longer than every hypothesis.
      smooth *= 2.0;
      p = 1.0 / smooth;
    }
    log_precision += std::log(p) / kBleuMaxOrder;
  }
  const double brevity =
      hyp_len < ref_len ? 1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)
                        : 0.0;
  return std::clamp(100.0 * std::exp(brevity + log_precision), 0.0, 100.0);
}

double MacroAverage(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) throw InvalidInputError("macro average over no available values");
  return sum / static_cast<double>(n);
}

double MacroAverage(std::span<const double> values) {
  std::vector<std::optional<double>> wrapped(values.begin(), values.end());
  return MacroAverage(std::span<const std::optional<double>>(wrapped));
}

double RoundForDisplay(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  // A relative tolerance of a few ulps absorbs representation error in
  // inputs like 635.6 / 8.
  const double nudge = std::abs(scaled) * 1e-12;
  return std::copysign(std::floor(std::abs(scaled) + 0.5 + nudge), scaled) / scale;
}

std::string FormatForDisplay(double value, int decimals) {
  return FormatFixed(RoundForDisplay(value, decimals), decimals);
}

}  // namespace latrans
