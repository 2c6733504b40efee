#ifndef LATRANS_CLASSIFIER_H_
#define LATRANS_CLASSIFIER_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "latrans/dataset.h"
#include "latrans/parameter_vector.h"
#include "latrans/vocabulary.h"

namespace latrans {

// Hashed feature extraction for the log-linear classifier.
struct FeatureSpec {
  int max_ngram = 2;             // n-grams of order 1..max_ngram
  std::size_t hashing_dim = 4096;
  bool include_segment_tags = true;  // n-grams keyed by segment index
  // One-hot (token, min(count, kCountCap)) features over the whole input.
  bool count_indicators = true;
  // For each segment j >= 1, a feature whose value is the multiset overlap
  // between segment 0 and segment j.
  bool overlap_features = true;
  // For each segment j >= 1, a one-hot of min(overlap with segment 0,
  // kCountCap).
  bool overlap_levels = true;

  static constexpr int kCountCap = 6;

  bool operator==(const FeatureSpec&) const = default;
};

// Sorted by bucket, buckets unique.
using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;

SparseFeatures ExtractFeatures(const FeatureSpec& spec, const Vocabulary& vocab,
                               const Sequence& input);

// Joins segments with vocab.separator_id() between consecutive segments.
// Throws InvalidInputError for an empty segment list.
Sequence ComposeInput(std::span<const Sequence> segments, const Vocabulary& vocab);
Sequence ComposeInput(std::span<const Sequence* const> segments, const Vocabulary& vocab);

struct LabelDistribution {
  std::vector<double> probs;

  int Argmax() const;
};

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double step = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int epochs = 5;
  int batch_size = 24;
  double clip_norm = 1.0;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// f_theta: softmax over per-label scores W f(x) + b, with W stored row-major
// as num_labels x hashing_dim followed by the num_labels biases.
class LinearTextClassifier {
 public:
  static constexpr const char* kWeightSlice = "weights";
  static constexpr const char* kBiasSlice = "bias";

  LinearTextClassifier(Vocabulary vocab, FeatureSpec spec, int num_labels);

  const Vocabulary& vocab() const { return vocab_; }
  const FeatureSpec& feature_spec() const { return spec_; }
  int num_labels() const { return num_labels_; }
  const ParameterVector& theta() const { return theta_; }
  void set_theta(ParameterVector theta);
  ParameterVector& mutable_theta() { return theta_; }

  SparseFeatures Features(const Sequence& input) const;
  std::vector<double> Scores(const SparseFeatures& features) const;
  LabelDistribution PredictFeatures(const SparseFeatures& features) const;
  LabelDistribution Predict(const Sequence& input) const;
  LabelDistribution PredictSegments(std::span<const Sequence> segments) const;

  // grad += d(objective)/d(theta) given d(objective)/d(scores).
  void AccumulateScoreGradient(const SparseFeatures& features,
                               std::span<const double> score_grad,
                               ParameterVector& grad) const;

 private:
  Vocabulary vocab_;
  FeatureSpec spec_;
  int num_labels_;
  ParameterVector theta_;
};

// Mean cross-entropy over the examples plus (l2 / 2) ||theta||^2. When grad
// is non-null it receives the gradient (overwritten).
double CrossEntropyObjective(const LinearTextClassifier& clf,
                             std::span<const Example> examples, double l2,
                             ParameterVector* grad = nullptr);

// First-order optimizer state for one parameter vector. The quadratic
// penalty is applied as an exact proximal shrink after each step, which stays
// stable for very large penalties.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, std::size_t size);
  // Clips `grad` to config.clip_norm, takes one step, then shrinks params
  // toward `center` (zero when null) by 1 / (1 + step * l2).
  void Step(ParameterVector& params, ParameterVector grad,
            const ParameterVector* center = nullptr);

 private:
  OptimizerConfig config_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  long steps_ = 0;
};

// Mini-batch training on mean cross-entropy + (l2 / 2) ||theta||^2. Batch
// order is shuffled per epoch from config.seed.
LinearTextClassifier TrainClassifier(LinearTextClassifier clf, const LabeledDataset& data,
                                     const OptimizerConfig& config);

double Accuracy(const LinearTextClassifier& clf, std::span<const Example> examples);

}  // namespace latrans

#endif  // LATRANS_CLASSIFIER_H_
