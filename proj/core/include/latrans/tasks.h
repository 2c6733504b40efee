#ifndef LATRANS_TASKS_H_
#define LATRANS_TASKS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "latrans/dataset.h"
#include "latrans/rng.h"
#include "latrans/seq_model.h"
#include "latrans/vocabulary.h"

namespace latrans {

enum class TaskShape { kNli, kParaphrase, kCopa };
enum class LabelRule { kKeywordOverlap, kParity, kPairMatch };

std::string TaskShapeName(TaskShape shape);
TaskShape ParseTaskShape(const std::string& name);
std::string LabelRuleName(LabelRule rule);
LabelRule ParseLabelRule(const std::string& name);

// nli and paraphrase: 2 segments; copa: premise + 2 hypotheses.
int SegmentCount(TaskShape shape);
// nli: 3, paraphrase and copa: 2.
int NumLabels(TaskShape shape);

// Content token i of a synthetic vocabulary has TokenId i + kFirstContentId.
inline constexpr TokenId kFirstContentId = 2;
inline TokenId ContentId(int index) { return static_cast<TokenId>(index) + kFirstContentId; }

// Token-level substitution cipher from the source language (the one the
// classifier reads) into a synthetic target language, with noise.
struct CipherSpec {
  int src_vocab_size = 0;  // content tokens, specials excluded
  int tgt_vocab_size = 0;
  std::vector<int> mapping;  // source content index -> target content index
  // Probability that a token is replaced by a uniformly random target token.
  double noise_eps = 0.0;
  // Source content indices that share their target token with another one.
  std::vector<int> ambiguous_tokens;

  static CipherSpec Identity(int size);
  static CipherSpec RandomPermutation(int size, std::uint64_t seed);
  // Sends `token` to the target of `onto`; both are recorded as ambiguous.
  void Merge(int token, int onto);
  void Validate() const;

  bool operator==(const CipherSpec&) const = default;
};

struct TaskSizes {
  std::size_t train = 500;
  std::size_t dev = 100;
  std::size_t test = 200;
  std::size_t parallel = 1000;
};

struct GenerationOptions {
  int segment_length = 6;
  // Unigram weights over source content tokens; empty means uniform.
  std::vector<double> token_weights;
  // Weights for the parallel corpus; empty means token_weights.
  std::vector<double> parallel_token_weights;
  // parity: label = count(designated) mod num_labels, counted over all
  // segments.
  int designated_token = 0;
  // pair-match, paraphrase: label 1 iff overlap >= match_threshold.
  int match_threshold = 3;
  // pair-match, nli: 0 below low, 1 in [low, high), 2 at or above high.
  int nli_low = 2;
  int nli_high = 4;
  std::string source_lang = "src";
  std::string target_lang = "tgt";
};

struct TaskBundle {
  TaskShape shape = TaskShape::kParaphrase;
  LabelRule rule = LabelRule::kParity;
  int num_labels = 2;
  std::uint64_t seed = 0;
  CipherSpec cipher;
  GenerationOptions options;
  Vocabulary source_vocab = Vocabulary::Synthetic("s", 1);
  Vocabulary target_vocab = Vocabulary::Synthetic("t", 1);

  std::vector<Example> train_src;
  std::vector<Example> dev_src;
  std::vector<Example> dev_tgt;   // few-shot set
  std::vector<Example> test_tgt;  // evaluation set
  // Source-language originals of dev_tgt / test_tgt (BLEU references).
  std::vector<Example> dev_tgt_reference;
  std::vector<Example> test_tgt_reference;
  std::vector<ParallelPair> parallel;  // source: source language, target: target language
};

// The label `rule` assigns to source-language segments. Throws
// InvalidInputError if the rule does not apply to the shape.
int RuleLabel(LabelRule rule, TaskShape shape, const GenerationOptions& options,
              const std::vector<Sequence>& segments);

// Synthetic task with planted labels (stratified, then shuffled) and
// independently ciphered target splits. Deterministic in all arguments.
// Throws ResourceError if a split keeps coming out with a constant label
// after 100 regenerations or an example cannot be planted.
TaskBundle GenerateTask(TaskShape shape, const TaskSizes& sizes, const CipherSpec& cipher,
                        LabelRule rule, const GenerationOptions& options,
                        std::uint64_t seed);

// Applies the cipher (and its noise) to one source-language segment.
Sequence ApplyCipher(const CipherSpec& cipher, const Sequence& source, Rng& rng);

struct TranslatorTrainConfig {
  int iterations = 500;
  double step = 1.0;
};

// Maximum-likelihood fit of the emission logits of p(pair.source |
// pair.target) by full-batch gradient ascent. Each logit row follows the
// gradient of its own mean log-likelihood, so rows converge at the same
// rate regardless of token frequency; rows of unseen input tokens are left
// untouched. Throws InvalidInputError for length-mismatched pairs.
ConditionalSeqModel TrainTranslatorOnParallel(ConditionalSeqModel model,
                                              const std::vector<ParallelPair>& parallel,
                                              const TranslatorTrainConfig& config);

// JSONL, one record per line: {"segments": [[token...]...], "label": n,
// "lang": "xx"}. Loading checks the segment count against the shape.
void SaveExamplesJsonl(std::ostream& out, const std::vector<Example>& examples,
                       const Vocabulary& vocab);
std::vector<Example> LoadExamplesJsonl(std::istream& in, TaskShape shape,
                                       const Vocabulary& vocab);
void SaveExamplesJsonl(const std::filesystem::path& path,
                       const std::vector<Example>& examples, const Vocabulary& vocab);
std::vector<Example> LoadExamplesJsonl(const std::filesystem::path& path, TaskShape shape,
                                       const Vocabulary& vocab);

// {"src": [tokens], "tgt": [tokens]} per line.
void SaveParallelJsonl(std::ostream& out, const std::vector<ParallelPair>& pairs,
                       const Vocabulary& source_vocab, const Vocabulary& target_vocab);
std::vector<ParallelPair> LoadParallelJsonl(std::istream& in, const Vocabulary& source_vocab,
                                            const Vocabulary& target_vocab);

// A bundle directory: bundle.json (shape, rule, cipher, vocabularies) plus
// one JSONL file per split and parallel.jsonl.
void SaveBundle(const std::filesystem::path& dir, const TaskBundle& bundle);
TaskBundle LoadBundle(const std::filesystem::path& dir);

}  // namespace latrans

#endif  // LATRANS_TASKS_H_
