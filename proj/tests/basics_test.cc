#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "latrans/errors.h"
#include "latrans/format.h"
#include "latrans/math_util.h"
#include "latrans/parameter_vector.h"
#include "latrans/rng.h"
#include "latrans/vocabulary.h"

namespace latrans {
namespace {

TEST(Vocabulary, SyntheticLayout) {
  const auto v = Vocabulary::Synthetic("s", 3);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.token(0), "<sep>");
  EXPECT_EQ(v.token(1), "</s>");
  EXPECT_EQ(v.Id("s2"), 4);
  EXPECT_EQ(v.separator_id(), 0);
  EXPECT_EQ(v.eos_id(), 1);
}

TEST(Vocabulary, EncodeDecodeRoundTrip) {
  const auto v = Vocabulary::WithSpecials({"a", "b", "c"});
  const Sequence s = v.Encode({"c", "a", "b"});
  EXPECT_EQ(s, (Sequence{4, 2, 3}));
  EXPECT_EQ(v.Decode(s), (std::vector<std::string>{"c", "a", "b"}));
}

TEST(Vocabulary, RejectsDuplicatesAndUnknowns) {
  EXPECT_THROW(Vocabulary({"a", "a"}, 0, 1), InvalidInputError);
  EXPECT_THROW(Vocabulary({"a", "b"}, 0, 2), InvalidInputError);
  const auto v = Vocabulary::WithSpecials({"a"});
  EXPECT_THROW(v.Id("zzz"), InvalidInputError);
  EXPECT_FALSE(v.Find("zzz").has_value());
  EXPECT_FALSE(v.ContainsAll(Sequence{0, 3}));
}

TEST(ParameterVector, LayoutMustTileValues) {
  EXPECT_THROW(ParameterVector({{"a", 0, 2}}, {1.0}), InvalidInputError);
  EXPECT_THROW(ParameterVector({{"a", 0, 1}, {"b", 2, 1}}, {1.0, 2.0, 3.0}),
               InvalidInputError);
  EXPECT_NO_THROW(ParameterVector({{"a", 0, 1}, {"b", 1, 2}}, {1.0, 2.0, 3.0}));
}

TEST(ParameterVector, RejectsNonFiniteValues) {
  EXPECT_THROW(ParameterVector({{"a", 0, 1}}, {std::numeric_limits<double>::quiet_NaN()}),
               InvalidInputError);
}

TEST(ParameterVector, SlicesAndArithmetic) {
  auto p = ParameterVector::Zeros({{"w", 2}, {"b", 1}});
  p.mutable_slice("w")[1] = 3.0;
  p.mutable_slice("b")[0] = 4.0;
  EXPECT_EQ(p[1], 3.0);
  EXPECT_EQ(p[2], 4.0);
  EXPECT_DOUBLE_EQ(p.Norm(), 5.0);
  auto q = p.ZerosLike();
  q.Axpy(2.0, p);
  EXPECT_DOUBLE_EQ(q.Dot(p), 50.0);
  EXPECT_DOUBLE_EQ(q.ClipNorm(1.0), 10.0);
  EXPECT_NEAR(q.Norm(), 1.0, 1e-15);
}

TEST(ParameterVector, IncompatibleLayoutsThrow) {
  auto a = ParameterVector::Zeros({{"w", 2}});
  const auto b = ParameterVector::Zeros({{"v", 2}});
  EXPECT_THROW(a.Axpy(1.0, b), InvalidInputError);
}

TEST(MathUtil, LogSumExpAndNormalization) {
  const std::vector<double> v = {std::log(2.0), 0.0};
  EXPECT_NEAR(LogSumExp(v), std::log(3.0), 1e-15);
  const auto w = NormalizeLogWeights(v);
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);
}

TEST(MathUtil, StructuralZerosGetNoWeight) {
  const std::vector<double> v = {kLogZero, 1.0};
  const auto w = NormalizeLogWeights(v);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_EQ(w[1], 1.0);
  const std::vector<double> all_zero = {kLogZero, kLogZero};
  EXPECT_THROW(NormalizeLogWeights(all_zero), InvalidInputError);
  EXPECT_THROW(NormalizeLogWeights(std::vector<double>{}), InvalidInputError);
}

TEST(MathUtil, LargeShiftsDoNotOverflow) {
  const std::vector<double> v = {1000.0, 1000.0};
  EXPECT_NEAR(LogSumExp(v), 1000.0 + std::log(2.0), 1e-12);
}

TEST(Format, ShortestRoundTripIsBitExact) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.Uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.UniformIndex(40)) - 20);
    EXPECT_EQ(ParseDouble(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_THROW(ParseDouble("1.5x"), InvalidInputError);
}

TEST(Rng, DeterministicStreams) {
  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.Next(), b.Next());
  EXPECT_NE(MixSeed(7, 1), MixSeed(7, 2));
}

TEST(Rng, CategoricalSkipsZeroWeights) {
  Rng rng(3);
  const std::vector<double> w = {0.0, 1.0, 0.0, 3.0};
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4000; ++i) ++counts[rng.Categorical(w)];
  EXPECT_EQ(counts[0], 0);
  EXPECT_EQ(counts[2], 0);
  EXPECT_NEAR(counts[3] / 4000.0, 0.75, 0.03);
}

}  // namespace
}  // namespace latrans
