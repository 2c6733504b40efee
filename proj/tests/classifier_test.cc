#include <cmath>

#include <gtest/gtest.h>

#include "latrans/classifier.h"
#include "latrans/errors.h"
#include "latrans/mrt.h"
#include "test_util.h"

namespace latrans {
namespace {

using testing::RandomClassifier;
using testing::RandomSequence;

Vocabulary Vocab() { return Vocabulary::Synthetic("w", 6); }

TEST(ComposeInput, KeepsSeparatorsAroundEmptySegments) {
  const auto v = Vocab();
  const std::vector<Sequence> segs = {{2, 3}, {}, {4}};
  const Sequence joined = ComposeInput(segs, v);
  EXPECT_EQ(joined.size(), 5u);
  EXPECT_EQ(joined, (Sequence{2, 3, 0, 0, 4}));
}

TEST(ComposeInput, SingleSegmentIsUnchanged) {
  const auto v = Vocab();
  const std::vector<Sequence> segs = {{5, 6, 7}};
  EXPECT_EQ(ComposeInput(segs, v), (Sequence{5, 6, 7}));
  EXPECT_THROW(ComposeInput(std::span<const Sequence>{}, v), InvalidInputError);
}

TEST(ExtractFeatures, SortedUniqueBuckets) {
  FeatureSpec spec;
  spec.hashing_dim = 16;
  const auto f = ExtractFeatures(spec, Vocab(), {2, 3, 2, 0, 2, 3});
  ASSERT_FALSE(f.empty());
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_LT(f[i - 1].first, f[i].first);
  for (const auto& [bucket, value] : f) EXPECT_LT(bucket, 16u);
}

TEST(Predict, LogisticOfScoreDifference) {
  LinearTextClassifier clf(Vocab(), FeatureSpec{}, 2);
  ParameterVector theta = clf.theta();
  theta.mutable_slice(LinearTextClassifier::kBiasSlice)[0] = std::log(3.0);
  clf.set_theta(theta);
  const auto p = clf.Predict({2, 3, 4}).probs;
  EXPECT_NEAR(p[0], 0.75, 1e-12);
  EXPECT_NEAR(p[1], 0.25, 1e-12);
}

TEST(Predict, EmptyInputIsSoftmaxOfBiases) {
  Rng rng(5);
  const auto clf = RandomClassifier(Vocab(), 3, rng);
  const auto b = clf.theta().slice(LinearTextClassifier::kBiasSlice);
  const double z = std::exp(b[0]) + std::exp(b[1]) + std::exp(b[2]);
  const auto p = clf.Predict({}).probs;
  for (int y = 0; y < 3; ++y) EXPECT_NEAR(p[y], std::exp(b[y]) / z, 1e-12);
}

TEST(Predict, InvariantToCommonBiasShift) {
  Rng rng(6);
  auto clf = RandomClassifier(Vocab(), 3, rng);
  const Sequence x = {2, 4, 0, 5, 7};
  const auto before = clf.Predict(x).probs;
  ParameterVector theta = clf.theta();
  for (double& b : theta.mutable_slice(LinearTextClassifier::kBiasSlice)) b += 17.5;
  clf.set_theta(theta);
  const auto after = clf.Predict(x).probs;
  for (int y = 0; y < 3; ++y) EXPECT_NEAR(before[y], after[y], 1e-12);
}

TEST(Predict, ProbabilitiesSumToOne) {
  Rng rng(7);
  const auto clf = RandomClassifier(Vocab(), 3, rng, 3.0);
  for (int i = 0; i < 50; ++i) {
    const auto p = clf.Predict(RandomSequence(8, 1 + rng.UniformIndex(9), rng)).probs;
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  }
}

LabeledDataset SeparableData(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset data;
  for (std::size_t i = 0; i < n; ++i) {
    Sequence s(5);
    for (auto& t : s) t = static_cast<TokenId>(3 + rng.UniformIndex(5));
    const bool has = rng.Bernoulli(0.5);
    if (has) s[rng.UniformIndex(5)] = 2;
    data.examples.push_back({{s}, has ? 1 : 0, "src"});
  }
  return data;
}

TEST(TrainClassifier, FitsSeparableData) {
  const auto data = SeparableData(200, 1);
  OptimizerConfig cfg;
  cfg.epochs = 5;
  const auto clf = TrainClassifier(LinearTextClassifier(Vocab(), FeatureSpec{}, 2), data, cfg);
  EXPECT_EQ(Accuracy(clf, data.examples), 1.0);
}

TEST(TrainClassifier, HugePenaltyKeepsWeightsNearZero) {
  const auto data = SeparableData(200, 2);
  OptimizerConfig cfg;
  cfg.l2 = 1e6;
  const auto clf = TrainClassifier(LinearTextClassifier(Vocab(), FeatureSpec{}, 2), data, cfg);
  EXPECT_LE(clf.theta().Norm(), 1e-2);
}

TEST(TrainClassifier, ZeroEpochsLeavesThetaUnchanged) {
  Rng rng(3);
  const auto start = RandomClassifier(Vocab(), 2, rng);
  OptimizerConfig cfg;
  cfg.epochs = 0;
  const auto clf = TrainClassifier(start, SeparableData(50, 3), cfg);
  EXPECT_EQ(clf.theta(), start.theta());
}

TEST(TrainClassifier, DeterministicInSeed) {
  const auto data = SeparableData(100, 4);
  OptimizerConfig cfg;
  cfg.seed = 9;
  const LinearTextClassifier init(Vocab(), FeatureSpec{}, 2);
  EXPECT_EQ(TrainClassifier(init, data, cfg).theta(), TrainClassifier(init, data, cfg).theta());
}

TEST(TrainClassifier, SgdAlsoLowersTheObjective) {
  const auto data = SeparableData(100, 5);
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgd;
  cfg.step = 0.5;
  const LinearTextClassifier init(Vocab(), FeatureSpec{}, 2);
  const auto trained = TrainClassifier(init, data, cfg);
  EXPECT_LT(CrossEntropyObjective(trained, data.examples, cfg.l2),
            CrossEntropyObjective(init, data.examples, cfg.l2));
}

TEST(CrossEntropyObjective, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  auto clf = RandomClassifier(Vocab(), 3, rng, 0.5, 32);
  std::vector<Example> examples;
  for (int i = 0; i < 12; ++i) {
    examples.push_back({{RandomSequence(8, 4, rng), RandomSequence(8, 3, rng)},
                        static_cast<int>(rng.UniformIndex(3)), "src"});
  }
  ParameterVector grad;
  CrossEntropyObjective(clf, examples, 0.01, &grad);
  auto fn = [&](const ParameterVector& theta) {
    LinearTextClassifier probe = clf;
    probe.set_theta(theta);
    return CrossEntropyObjective(probe, examples, 0.01);
  };
  EXPECT_LE(FiniteDifferenceCheck(fn, grad, clf.theta(), 1e-6, 10000, 1), 1e-5);
}

TEST(CrossEntropyObjective, RejectsOutOfRangeLabels) {
  const LinearTextClassifier clf(Vocab(), FeatureSpec{}, 2);
  const std::vector<Example> bad = {{{{2}}, 2, "src"}};
  EXPECT_THROW(CrossEntropyObjective(clf, bad, 0.0), InvalidInputError);
}

}  // namespace
}  // namespace latrans
