#ifndef LATRANS_BLEU_H_
#define LATRANS_BLEU_H_

#include <optional>
#include <span>
#include <string>

#include "latrans/vocabulary.h"

namespace latrans {

inline constexpr int kBleuMaxOrder = 4;

// Corpus BLEU in [0, 100]: geometric mean of clipped n-gram precisions for
// n = 1..4 times the brevity penalty exp(1 - ref_len / hyp_len) when the
// hypotheses are shorter. The m-th order without any match gets precision
// 1/2^m instead of 0; no unigram match at all gives 0, and a corpus identical
// to its references gives 100 even when sentences are shorter than 4 tokens.
// Throws InvalidInputError for empty or unequal-length corpora.
double CorpusBleu(std::span<const Sequence> hypotheses,
                  std::span<const Sequence> references);

// Mean of the available values; nullopt entries are excluded. Throws
// InvalidInputError when nothing is available.
double MacroAverage(std::span<const std::optional<double>> values);
double MacroAverage(std::span<const double> values);

// Half-up rounding to `decimals` places, robust to the binary representation
// of values such as 79.45 that sit just below the halfway point.
double RoundForDisplay(double value, int decimals = 1);
std::string FormatForDisplay(double value, int decimals = 1);

}  // namespace latrans

#endif  // LATRANS_BLEU_H_
