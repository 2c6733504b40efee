#include "latrans/classifier.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "latrans/errors.h"
#include "latrans/math_util.h"
#include "latrans/rng.h"

namespace latrans {

namespace {

enum FeatureFamily : std::uint64_t { kNgram = 1, kCount = 2, kOverlap = 3, kOverlapLevel = 4 };
constexpr std::uint64_t kUntagged = ~std::uint64_t{0};

// FNV-1a over 64-bit words.
class KeyHasher {
 public:
  KeyHasher& Add(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (word >> (8 * i)) & 0xffu;
      hash_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  std::uint32_t Bucket(std::size_t dim) const {
    return static_cast<std::uint32_t>(hash_ % dim);
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::vector<Sequence> SplitSegments(const Sequence& input, TokenId separator) {
  std::vector<Sequence> segments(1);
  for (TokenId t : input) {
    if (t == separator) {
      segments.emplace_back();
    } else {
      segments.back().push_back(t);
    }
  }
  return segments;
}

}  // namespace

SparseFeatures ExtractFeatures(const FeatureSpec& spec, const Vocabulary& vocab,
                               const Sequence& input) {
  if (spec.hashing_dim < 1 || spec.max_ngram < 1) {
    throw InvalidInputError("feature spec needs hashing_dim >= 1 and max_ngram >= 1");
  }
  std::map<std::uint32_t, double> acc;
  const auto segments = SplitSegments(input, vocab.separator_id());

  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    const std::uint64_t tag = spec.include_segment_tags ? s : kUntagged;
    for (int n = 1; n <= spec.max_ngram; ++n) {
      for (std::size_t i = 0; i + n <= seg.size(); ++i) {
        KeyHasher h;
        h.Add(kNgram).Add(tag).Add(static_cast<std::uint64_t>(n));
        for (int j = 0; j < n; ++j) h.Add(static_cast<std::uint64_t>(seg[i + j]));
        acc[h.Bucket(spec.hashing_dim)] += 1.0;
      }
    }
  }

  if (spec.count_indicators) {
    std::map<TokenId, int> counts;
    for (const auto& seg : segments) {
      for (TokenId t : seg) ++counts[t];
    }
    for (const auto& [token, count] : counts) {
      KeyHasher h;
      h.Add(kCount).Add(static_cast<std::uint64_t>(token))
          .Add(static_cast<std::uint64_t>(std::min(count, FeatureSpec::kCountCap)));
      acc[h.Bucket(spec.hashing_dim)] += 1.0;
    }
  }

  if (spec.overlap_features || spec.overlap_levels) {
    for (std::size_t j = 1; j < segments.size(); ++j) {
      const int overlap = MultisetOverlap(segments[0], segments[j]);
      if (spec.overlap_levels) {
        KeyHasher level;
        level.Add(kOverlapLevel).Add(static_cast<std::uint64_t>(j))
            .Add(static_cast<std::uint64_t>(std::min(overlap, FeatureSpec::kCountCap)));
        acc[level.Bucket(spec.hashing_dim)] += 1.0;
      }
      if (!spec.overlap_features || overlap == 0) continue;
      KeyHasher h;
      h.Add(kOverlap).Add(static_cast<std::uint64_t>(j));
      acc[h.Bucket(spec.hashing_dim)] += overlap;
    }
  }

  return SparseFeatures(acc.begin(), acc.end());
}

Sequence ComposeInput(std::span<const Sequence* const> segments, const Vocabulary& vocab) {
  if (segments.empty()) throw InvalidInputError("no segments to compose");
  Sequence out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0) out.push_back(vocab.separator_id());
    out.insert(out.end(), segments[i]->begin(), segments[i]->end());
  }
  return out;
}

Sequence ComposeInput(std::span<const Sequence> segments, const Vocabulary& vocab) {
  std::vector<const Sequence*> ptrs;
  ptrs.reserve(segments.size());
  for (const auto& s : segments) ptrs.push_back(&s);
  return ComposeInput(std::span<const Sequence* const>(ptrs), vocab);
}

int LabelDistribution::Argmax() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

LinearTextClassifier::LinearTextClassifier(Vocabulary vocab, FeatureSpec spec,
                                           int num_labels)
    : vocab_(std::move(vocab)), spec_(spec), num_labels_(num_labels) {
  if (num_labels_ < 2) throw InvalidInputError("classifier needs at least 2 labels");
  if (spec_.hashing_dim < 1 || spec_.max_ngram < 1) {
    throw InvalidInputError("feature spec needs hashing_dim >= 1 and max_ngram >= 1");
  }
  theta_ = ParameterVector::Zeros(
      {{kWeightSlice, static_cast<std::size_t>(num_labels_) * spec_.hashing_dim},
       {kBiasSlice, static_cast<std::size_t>(num_labels_)}});
}

void LinearTextClassifier::set_theta(ParameterVector theta) {
  if (!theta.SameLayout(theta_)) throw InvalidInputError("classifier layout mismatch");
  if (!theta.AllFinite()) throw InvalidInputError("non-finite classifier parameters");
  theta_ = std::move(theta);
}

SparseFeatures LinearTextClassifier::Features(const Sequence& input) const {
  if (!vocab_.ContainsAll(input)) {
    throw InvalidInputError("classifier input has ids outside its vocabulary");
  }
  return ExtractFeatures(spec_, vocab_, input);
}

std::vector<double> LinearTextClassifier::Scores(const SparseFeatures& features) const {
  const auto weights = theta_.slice(kWeightSlice);
  const auto bias = theta_.slice(kBiasSlice);
  std::vector<double> scores(bias.begin(), bias.end());
  for (int c = 0; c < num_labels_; ++c) {
    const std::size_t row = static_cast<std::size_t>(c) * spec_.hashing_dim;
    for (const auto& [bucket, value] : features) scores[c] += weights[row + bucket] * value;
  }
  return scores;
}

LabelDistribution LinearTextClassifier::PredictFeatures(const SparseFeatures& features) const {
  auto scores = Scores(features);
  const double max_score = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max_score);
    total += s;
  }
  for (double& s : scores) s /= total;
  return {std::move(scores)};
}

LabelDistribution LinearTextClassifier::Predict(const Sequence& input) const {
  return PredictFeatures(Features(input));
}

LabelDistribution LinearTextClassifier::PredictSegments(
    std::span<const Sequence> segments) const {
  return Predict(ComposeInput(segments, vocab_));
}

void LinearTextClassifier::AccumulateScoreGradient(const SparseFeatures& features,
                                                   std::span<const double> score_grad,
                                                   ParameterVector& grad) const {
  auto weights = grad.mutable_slice(kWeightSlice);
  auto bias = grad.mutable_slice(kBiasSlice);
  for (int c = 0; c < num_labels_; ++c) {
    const double g = score_grad[c];
    if (g == 0.0) continue;
    const std::size_t row = static_cast<std::size_t>(c) * spec_.hashing_dim;
    for (const auto& [bucket, value] : features) weights[row + bucket] += g * value;
    bias[c] += g;
  }
}

double CrossEntropyObjective(const LinearTextClassifier& clf,
                             std::span<const Example> examples, double l2,
                             ParameterVector* grad) {
  if (examples.empty()) throw InvalidInputError("cross-entropy over an empty batch");
  if (grad != nullptr) *grad = clf.theta().ZerosLike();
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  double loss = 0.0;
  std::vector<double> score_grad(clf.num_labels());
  for (const auto& ex : examples) {
    const auto features = clf.Features(ComposeInput(ex.segments, clf.vocab()));
    const auto dist = clf.PredictFeatures(features);
    if (ex.label < 0 || ex.label >= clf.num_labels()) {
      throw InvalidInputError("label outside classifier range");
    }
    loss -= std::log(std::max(dist.probs[ex.label], 1e-300)) * inv_n;
    if (grad != nullptr) {
      for (int c = 0; c < clf.num_labels(); ++c) {
        score_grad[c] = (dist.probs[c] - (c == ex.label ? 1.0 : 0.0)) * inv_n;
      }
      clf.AccumulateScoreGradient(features, score_grad, *grad);
    }
  }
  loss += 0.5 * l2 * clf.theta().SquaredNorm();
  if (grad != nullptr) grad->Axpy(l2, clf.theta());
  return loss;
}

Optimizer::Optimizer(const OptimizerConfig& config, std::size_t size) : config_(config) {
  if (config_.kind == OptimizerKind::kAdam) {
    first_moment_.assign(size, 0.0);
    second_moment_.assign(size, 0.0);
  }
}

void Optimizer::Step(ParameterVector& params, ParameterVector grad,
                     const ParameterVector* center) {
  if (config_.clip_norm > 0.0) grad.ClipNorm(config_.clip_norm);
  auto p = params.mutable_values();
  auto g = grad.values();
  ++steps_;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= config_.step * g[i];
  } else {
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < p.size(); ++i) {
      first_moment_[i] = b1 * first_moment_[i] + (1.0 - b1) * g[i];
      second_moment_[i] = b2 * second_moment_[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = first_moment_[i] / c1;
      const double v_hat = second_moment_[i] / c2;
      p[i] -= config_.step * m_hat / (std::sqrt(v_hat) + config_.adam_epsilon);
    }
  }
  if (config_.l2 > 0.0) {
    const double shrink = 1.0 / (1.0 + config_.step * config_.l2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double c = center != nullptr ? (*center)[i] : 0.0;
      p[i] = c + (p[i] - c) * shrink;
    }
  }
}

LinearTextClassifier TrainClassifier(LinearTextClassifier clf, const LabeledDataset& data,
                                     const OptimizerConfig& config) {
  if (data.examples.empty()) throw InvalidInputError("training set is empty");
  if (data.num_labels != clf.num_labels()) {
    throw InvalidInputError("dataset and classifier disagree on the number of labels");
  }
  ValidateDataset(data);
  if (config.batch_size < 1) throw InvalidInputError("batch size must be positive");

  Optimizer optimizer(config, clf.theta().size());
  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Example> batch;
  ParameterVector grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(MixSeed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data.examples[order[i]]);
      CrossEntropyObjective(clf, batch, 0.0, &grad);
      optimizer.Step(clf.mutable_theta(), std::move(grad));
    }
  }
  return clf;
}

double Accuracy(const LinearTextClassifier& clf, std::span<const Example> examples) {
  if (examples.empty()) throw InvalidInputError("accuracy over an empty set");
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    if (clf.PredictSegments(ex.segments).Argmax() == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace latrans
