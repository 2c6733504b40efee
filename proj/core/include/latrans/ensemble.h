#ifndef LATRANS_ENSEMBLE_H_
#define LATRANS_ENSEMBLE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "latrans/classifier.h"
#include "latrans/seq_model.h"

namespace latrans {

enum class SampleMode { kKBest, kStochastic };

std::string SampleModeName(SampleMode mode);
SampleMode ParseSampleMode(const std::string& name);

// Translations of one source segment.
struct TranslationSampleSet {
  Sequence source;
  std::vector<ScoredTranslation> samples;
  SampleMode mode = SampleMode::kKBest;

  // Throws InvalidInputError if empty, or if a k-best set lacks ranks 1..k.
  void Validate() const;
  bool operator==(const TranslationSampleSet&) const = default;
};

struct DecodeOptions {
  SampleMode mode = SampleMode::kKBest;
  std::size_t k = 12;
  std::size_t beam_width = 12;
  double temperature = 1.0;
};

// k-best (beam width max(k, beam_width)) or k stochastic samples.
TranslationSampleSet DecodeSegment(const ConditionalSeqModel& model, const Sequence& x,
                                   const DecodeOptions& options, std::uint64_t seed);

std::vector<TranslationSampleSet> DecodeSegments(const ConditionalSeqModel& model,
                                                 std::span<const Sequence> segments,
                                                 const DecodeOptions& options,
                                                 std::uint64_t seed);

enum class Weighting { kUniform, kScoreWeighted };
enum class SegmentCombination { kByRank, kCrossProduct };

std::string WeightingName(Weighting w);
Weighting ParseWeighting(const std::string& name);
std::string CombinationName(SegmentCombination c);
SegmentCombination ParseCombination(const std::string& name);

struct EnsembleConfig {
  Weighting weighting = Weighting::kUniform;
  SegmentCombination combine = SegmentCombination::kByRank;
};

// One ensemble member: a choice of sample per segment, the composed
// classifier input, and the summed log-score of the chosen samples.
struct EnsembleMember {
  std::vector<std::size_t> picks;
  Sequence input;
  double log_score = 0.0;
};

// By-rank pairs the j-th sample of every segment (all sets must be equally
// sized); cross-product takes every tuple, last segment varying fastest.
std::vector<EnsembleMember> BuildMembers(std::span<const TranslationSampleSet> segments,
                                         SegmentCombination combine,
                                         const Vocabulary& vocab);

// Member weights: 1/k for uniform, softmax of member log-scores otherwise.
std::vector<double> MemberWeights(std::span<const EnsembleMember> members,
                                  Weighting weighting);

LabelDistribution EnsemblePredict(const LinearTextClassifier& clf,
                                  std::span<const TranslationSampleSet> segments,
                                  const EnsembleConfig& config);

struct EnsembleItem {
  std::vector<TranslationSampleSet> segments;
  int gold = 0;
};

struct EnsembleLoss {
  double value = 0.0;
  // Items whose ensemble gold probability was exactly zero. Each contributes
  // -kLogZero (a +infinity stand-in) to value.
  std::size_t zero_gold_items = 0;
};

// Sum over items of -log(ensemble probability of gold). The gradient (when
// requested) is taken through the average of member softmaxes; it is
// overwritten, and zero-gold items contribute nothing to it.
EnsembleLoss EnsembleNllLoss(const LinearTextClassifier& clf,
                             std::span<const EnsembleItem> batch,
                             const EnsembleConfig& config,
                             ParameterVector* grad = nullptr);

// Expectation of the classifier distribution under the exact product
// distribution of per-segment translations. Throws ResourceError when a
// segment or the product of supports exceeds `budget`.
LabelDistribution ExactMarginalPredict(const LinearTextClassifier& clf,
                                       const ConditionalSeqModel& model,
                                       std::span<const Sequence> segments,
                                       std::size_t max_len,
                                       std::size_t budget = kDefaultEnumerationBudget);

// JSONL cache of sample sets, one set per line:
// {"source": [tokens], "mode": "kbest"|"stochastic",
//  "samples": [{"tokens": [...], "log_score": x, "rank": r|null}]}
// Token strings come from the given vocabularies; log-scores are written in
// shortest round-trip form.
void WriteSampleSets(std::ostream& out, std::span<const TranslationSampleSet> sets,
                     const Vocabulary& input_vocab, const Vocabulary& output_vocab);
std::vector<TranslationSampleSet> ReadSampleSets(std::istream& in,
                                                 const Vocabulary& input_vocab,
                                                 const Vocabulary& output_vocab);

}  // namespace latrans

#endif  // LATRANS_ENSEMBLE_H_
