#ifndef LATRANS_SEQ_MODEL_H_
#define LATRANS_SEQ_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latrans/parameter_vector.h"
#include "latrans/vocabulary.h"

namespace latrans {

enum class ModelKind {
  // |h| == |x|; position t emits an output token from a softmax over the
  // logit row of input token x_t.
  kLexicalChannel,
};

std::string ModelKindName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

// A candidate translation with its unnormalized log-score. `rank` is set for
// k-best output (1 = best) and empty for stochastic samples.
struct ScoredTranslation {
  Sequence tokens;
  double log_score = 0.0;
  std::optional<int> rank;

  bool operator==(const ScoredTranslation&) const = default;
};

struct SupportEntry {
  Sequence tokens;
  double log_prob = 0.0;
};

inline constexpr std::size_t kDefaultEnumerationBudget = std::size_t{1} << 20;

// Orders candidates best-first: higher score, then lexicographically smaller
// token ids. Exact comparison on scores; equal-score candidates are ties.
bool BetterCandidate(double score_a, const Sequence& a, double score_b,
                     const Sequence& b);

// The translator: maps an input-language sequence x to a distribution over
// output-language sequences h. "Input" is the language being translated
// from, "output" the language the classifier reads.
class ConditionalSeqModel {
 public:
  static constexpr const char* kEmissionSlice = "emission_logits";

  // Lexical channel with a |input| x |output| row-major logit table. An empty
  // table means all zeros (uniform emissions).
  static ConditionalSeqModel LexicalChannel(Vocabulary input_vocab,
                                            Vocabulary output_vocab,
                                            std::vector<double> logits = {});

  ModelKind kind() const { return kind_; }
  const Vocabulary& input_vocab() const { return input_vocab_; }
  const Vocabulary& output_vocab() const { return output_vocab_; }
  const ParameterVector& params() const { return params_; }
  // Throws InvalidInputError on a layout mismatch.
  void set_params(ParameterVector params);

  double emission_logit(TokenId in, TokenId out) const;
  void set_emission_logit(TokenId in, TokenId out, double value);
  // Log-softmax of the logit row of `in`.
  std::vector<double> EmissionLogProbs(TokenId in) const;

  // ln p*(h | x). For the lexical channel this is the normalized
  // log-probability; kLogZero when |h| != |x| or h crosses a zero-probability
  // emission.
  double LogScore(const Sequence& x, const Sequence& h) const;

  // Gradient of LogScore with respect to params(). Throws DomainError when
  // LogScore(x, h) is a structural zero.
  ParameterVector GradLogScore(const Sequence& x, const Sequence& h) const;

  // min(k, |support|) best candidates, best first, ranks 1..n. Requires
  // k >= 1 and beam_width >= k. Scores are raw summed log-probabilities.
  std::vector<ScoredTranslation> BeamSearchKBest(const Sequence& x, std::size_t k,
                                                 std::size_t beam_width) const;

  // k ancestral samples from per-step softmax(logits / temperature).
  // Structural-zero emissions are never drawn. Each sample carries its
  // temperature-1 LogScore. Deterministic in (model, x, k, temperature, seed).
  std::vector<ScoredTranslation> Sample(const Sequence& x, std::size_t k,
                                        double temperature, std::uint64_t seed) const;

  // Every positive-probability h with |h| <= max_len, best first. Throws
  // ResourceError when |output vocab|^max_len exceeds `budget`.
  std::vector<SupportEntry> EnumerateSupport(
      const Sequence& x, std::size_t max_len,
      std::size_t budget = kDefaultEnumerationBudget) const;

  // Per-input-token log-probability tables for the positions of x, reused by
  // the decoders.
  std::vector<std::vector<double>> PositionLogProbs(const Sequence& x) const;

 private:
  ConditionalSeqModel(ModelKind kind, Vocabulary input_vocab, Vocabulary output_vocab,
                      ParameterVector params);

  void CheckInput(const Sequence& x) const;
  std::size_t LogitIndex(TokenId in, TokenId out) const {
    return static_cast<std::size_t>(in) * output_vocab_.size() +
           static_cast<std::size_t>(out);
  }

  ModelKind kind_;
  Vocabulary input_vocab_;
  Vocabulary output_vocab_;
  ParameterVector params_;
};

}  // namespace latrans

#endif  // LATRANS_SEQ_MODEL_H_
