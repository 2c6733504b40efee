#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "latrans/errors.h"
#include "latrans/mrt.h"
#include "latrans/seq_model.h"
#include "test_util.h"

namespace latrans {
namespace {

using testing::BernoulliChannel;
using testing::IdentityChannel;
using testing::Plain;
using testing::RandomChannel;
using testing::RandomSequence;

// Independent oracle: probability of h given x from the raw logit table.
double OracleProb(const ConditionalSeqModel& m, const Sequence& x, const Sequence& h) {
  const std::size_t out = m.output_vocab().size();
  const auto logits = m.params().values();
  double p = 1.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    double z = 0.0;
    for (std::size_t v = 0; v < out; ++v) z += std::exp(logits[x[t] * out + v]);
    p *= std::exp(logits[x[t] * out + h[t]]) / z;
  }
  return p;
}

TEST(LogScore, IdentityChannelScoresItsOwnCopyAtZero) {
  const auto m = IdentityChannel(4);
  EXPECT_EQ(m.LogScore({0, 3, 2}, {0, 3, 2}), 0.0);
}

TEST(LogScore, IdentityChannelGivesSentinelForAnyOtherSequence) {
  const auto m = IdentityChannel(4);
  EXPECT_TRUE(IsLogZero(m.LogScore({0, 3, 2}, {0, 2, 2})));
}

TEST(LogScore, UniformTwoTokenChannel) {
  const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 3), Plain("t", 2));
  EXPECT_NEAR(m.LogScore({0, 1, 2}, {1, 0, 1}), 3.0 * std::log(0.5), 1e-12);
  EXPECT_NEAR(m.LogScore({0, 1, 2}, {1, 0, 1}), -2.0794, 1e-4);
}

TEST(LogScore, LengthMismatchIsStructuralZero) {
  const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 3), Plain("t", 2));
  EXPECT_TRUE(IsLogZero(m.LogScore({0, 1}, {0})));
}

TEST(LogScore, RejectsIdsOutsideTheVocabularies) {
  const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 3), Plain("t", 2));
  EXPECT_THROW(m.LogScore({0, 5}, {0, 1}), InvalidInputError);
  EXPECT_THROW(m.LogScore({0, 1}, {0, 2}), InvalidInputError);
}

TEST(LogScore, MatchesOracleOnRandomChannels) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = RandomChannel(4, 3, rng);
    const auto x = RandomSequence(4, 3, rng);
    const auto h = RandomSequence(3, 3, rng);
    EXPECT_NEAR(m.LogScore(x, h), std::log(OracleProb(m, x, h)), 1e-12);
  }
}

TEST(GradLogScore, UniformBinaryChannelHandValues) {
  const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 2), Plain("t", 2));
  const auto g = m.GradLogScore({0}, {0});
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_DOUBLE_EQ(g[1], -0.5);
}

TEST(GradLogScore, RowsOfAbsentInputTokensAreExactlyZero) {
  Rng rng(3);
  const auto m = RandomChannel(4, 3, rng);
  const auto g = m.GradLogScore({1, 1, 3}, {0, 2, 1});
  for (int in : {0, 2}) {
    for (int out = 0; out < 3; ++out) EXPECT_EQ(g[in * 3 + out], 0.0);
  }
}

TEST(GradLogScore, ThrowsOnStructuralZero) {
  const auto m = IdentityChannel(3);
  EXPECT_THROW(m.GradLogScore({0, 1}, {1, 1}), DomainError);
}

TEST(GradLogScore, MatchesCentralDifferencesOnRandomInstances) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    const int in = 2 + static_cast<int>(rng.UniformIndex(3));
    const int out = 2 + static_cast<int>(rng.UniformIndex(3));
    auto m = RandomChannel(in, out, rng);
    const auto x = RandomSequence(in, 1 + rng.UniformIndex(4), rng);
    const auto h = RandomSequence(out, x.size(), rng);
    auto fn = [&](const ParameterVector& p) {
      auto copy = m;
      copy.set_params(p);
      return copy.LogScore(x, h);
    };
    worst = std::max(worst, FiniteDifferenceCheck(fn, m.GradLogScore(x, h), m.params(), 1e-6,
                                                  m.params().size(), trial));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(BeamSearch, DeterministicChannelHasOneCandidate) {
  const auto m = IdentityChannel(3);
  const auto out = m.BeamSearchKBest({2, 0, 1}, 3, 3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].tokens, (Sequence{2, 0, 1}));
  EXPECT_EQ(out[0].rank, 1);
  EXPECT_EQ(out[0].log_score, 0.0);
}

TEST(BeamSearch, BernoulliChannelOrdering) {
  const auto m = BernoulliChannel(1, 0.6);
  const auto out = m.BeamSearchKBest({0, 0}, 4, 4);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].tokens, (Sequence{0, 0}));
  EXPECT_NEAR(out[0].log_score, std::log(0.36), 1e-12);
  EXPECT_NEAR(out[0].log_score, -1.0217, 1e-4);
  // The two mixed sequences tie; lexicographic order decides.
  EXPECT_EQ(out[1].tokens, (Sequence{0, 1}));
  EXPECT_EQ(out[2].tokens, (Sequence{1, 0}));
  EXPECT_EQ(out[3].tokens, (Sequence{1, 1}));
  EXPECT_NEAR(out[3].log_score, std::log(0.16), 1e-12);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(out[r].rank, r + 1);
}

TEST(BeamSearch, TiesBreakLexicographically) {
  const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 2), Plain("t", 2));
  const auto out = m.BeamSearchKBest({0}, 2, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].tokens, Sequence{0});
  EXPECT_EQ(out[1].tokens, Sequence{1});
}

TEST(BeamSearch, RejectsInvalidWidths) {
  const auto m = BernoulliChannel(1, 0.6);
  EXPECT_THROW(m.BeamSearchKBest({0}, 0, 1), InvalidInputError);
  EXPECT_THROW(m.BeamSearchKBest({0}, 3, 2), InvalidInputError);
}

TEST(BeamSearch, SaturatedBeamEqualsTopOfEnumeration) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    // Coarse logits create exact score ties that exercise the tie rule.
    std::vector<double> logits(3 * 3);
    for (auto& v : logits) v = static_cast<double>(rng.UniformIndex(3));
    const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 3), Plain("t", 3), logits);
    const auto x = RandomSequence(3, 1 + rng.UniformIndex(3), rng);
    const auto support = m.EnumerateSupport(x, x.size());
    const std::size_t k = 1 + rng.UniformIndex(support.size());
    const auto beam = m.BeamSearchKBest(x, k, support.size());
    ASSERT_EQ(beam.size(), k);
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_EQ(beam[i].tokens, support[i].tokens);
      EXPECT_EQ(beam[i].log_score, support[i].log_prob);
    }
  }
}

TEST(Sampling, DeterministicChannelRepeatsTheSingleton) {
  const auto m = IdentityChannel(3);
  for (const auto& s : m.Sample({1, 2}, 5, 1.0, 9)) {
    EXPECT_EQ(s.tokens, (Sequence{1, 2}));
    EXPECT_FALSE(s.rank.has_value());
  }
}

TEST(Sampling, SameSeedSameSamples) {
  Rng rng(5);
  const auto m = RandomChannel(3, 4, rng);
  EXPECT_EQ(m.Sample({0, 1, 2}, 20, 1.0, 42), m.Sample({0, 1, 2}, 20, 1.0, 42));
  EXPECT_NE(m.Sample({0, 1, 2}, 20, 1.0, 42), m.Sample({0, 1, 2}, 20, 1.0, 43));
}

TEST(Sampling, FairCoinFrequency) {
  const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 2), Plain("t", 2));
  const auto samples = m.Sample({0}, 10000, 1.0, 1234);
  const double freq = static_cast<double>(std::count_if(samples.begin(), samples.end(),
                                                        [](const auto& s) { return s.tokens[0] == 0; })) /
                      10000.0;
  EXPECT_GE(freq, 0.48);
  EXPECT_LE(freq, 0.52);
}

TEST(Sampling, CarriesTemperatureOneScores) {
  Rng rng(8);
  const auto m = RandomChannel(3, 3, rng);
  for (const auto& s : m.Sample({0, 2}, 10, 3.0, 1)) {
    EXPECT_EQ(s.log_score, m.LogScore({0, 2}, s.tokens));
  }
}

TEST(Sampling, NeverDrawsStructuralZeros) {
  const auto m = IdentityChannel(3);
  for (const auto& s : m.Sample({0, 1, 2}, 200, 5.0, 3)) {
    EXPECT_EQ(s.tokens, (Sequence{0, 1, 2}));
  }
}

TEST(Sampling, EmpiricalDistributionConvergesToSupport) {
  Rng rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const auto m = RandomChannel(2, 2, rng);
    const Sequence x = {0, 1, 0};
    const auto support = m.EnumerateSupport(x, 3);
    std::map<Sequence, double> freq;
    for (const auto& s : m.Sample(x, 20000, 1.0, trial)) freq[s.tokens] += 1.0 / 20000.0;
    double tv = 0.0;
    for (const auto& e : support) tv += std::abs(std::exp(e.log_prob) - freq[e.tokens]);
    EXPECT_LE(tv / 2.0, 0.02);
  }
}

TEST(EnumerateSupport, BinaryChannelLengthThreeHasEightEntries) {
  Rng rng(4);
  const auto m = RandomChannel(3, 2, rng);
  const auto support = m.EnumerateSupport({0, 1, 2}, 3);
  ASSERT_EQ(support.size(), 8u);
  double total = 0.0;
  for (const auto& e : support) total += std::exp(e.log_prob);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(EnumerateSupport, IdentityChannelSingleEntry) {
  const auto support = IdentityChannel(3).EnumerateSupport({2, 1}, 2);
  ASSERT_EQ(support.size(), 1u);
  EXPECT_EQ(support[0].tokens, (Sequence{2, 1}));
  EXPECT_EQ(support[0].log_prob, 0.0);
}

TEST(EnumerateSupport, BernoulliProducts) {
  const auto support = BernoulliChannel(1, 0.6).EnumerateSupport({0, 0}, 2);
  ASSERT_EQ(support.size(), 4u);
  const double expected[] = {0.36, 0.24, 0.24, 0.16};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::exp(support[i].log_prob), expected[i], 1e-12);
}

TEST(EnumerateSupport, MatchesOracleAndNormalizes) {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = RandomChannel(3, 3, rng);
    const auto x = RandomSequence(3, 1 + rng.UniformIndex(3), rng);
    const auto support = m.EnumerateSupport(x, x.size());
    EXPECT_EQ(support.size(), static_cast<std::size_t>(std::pow(3.0, x.size())));
    double total = 0.0;
    for (const auto& e : support) {
      EXPECT_NEAR(std::exp(e.log_prob), OracleProb(m, x, e.tokens), 1e-12);
      total += std::exp(e.log_prob);
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(EnumerateSupport, BudgetIsEnforced) {
  const auto m = ConditionalSeqModel::LexicalChannel(Plain("s", 2), Plain("t", 10));
  EXPECT_THROW(m.EnumerateSupport({0, 1, 0, 1}, 4, 1000), ResourceError);
}

}  // namespace
}  // namespace latrans
