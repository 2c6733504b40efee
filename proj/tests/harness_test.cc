#include <cmath>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "latrans/bleu.h"
#include "latrans/checkpoint.h"
#include "latrans/errors.h"
#include "latrans/harness.h"
#include "latrans/json_schema.h"

namespace latrans {
namespace {

using nlohmann::json;

const std::filesystem::path kSourceDir = LATRANS_SOURCE_DIR;

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.name = "small";
  c.generation.shape = TaskShape::kParaphrase;
  c.generation.rule = LabelRule::kParity;
  c.generation.vocab_size = 8;
  c.generation.sizes.train = 200;
  c.generation.sizes.dev = 16;
  c.generation.sizes.test = 40;
  c.generation.sizes.parallel = 300;
  LanguageSpec a;
  a.tag = "aa";
  a.noise_eps = 0.1;
  a.merges = {{1, 0}};
  LanguageSpec b;
  b.tag = "bb";
  b.noise_eps = 0.0;
  c.languages = {a, b};
  c.seeds = {0, 1};
  c.k = 4;
  c.beam_width = 4;
  c.map.epochs = 1;
  c.map.batch_size = 8;
  c.translator.iterations = 100;
  return c;
}

ExperimentConfig IdentityConfig() {
  ExperimentConfig c = SmallConfig();
  LanguageSpec id;
  id.tag = "id";
  id.permute = false;
  c.languages = {id};
  c.seeds = {3};
  return c;
}

// --- BLEU and aggregation arithmetic -------------------------------------

TEST(CorpusBleu, IdenticalCorpusIsExactlyHundred) {
  const std::vector<Sequence> c = {{1, 2, 3, 4, 5}, {6, 7}, {8}};
  EXPECT_EQ(CorpusBleu(c, c), 100.0);
}

TEST(CorpusBleu, BrevityPenaltyHandCase) {
  const std::vector<Sequence> hyp = {{1, 2, 3, 4}};
  const std::vector<Sequence> ref = {{1, 2, 3, 4, 5}};
  const double oracle = 100.0 * std::exp(1.0 - 5.0 / 4.0);
  EXPECT_NEAR(CorpusBleu(hyp, ref), oracle, 1e-9);
  EXPECT_NEAR(CorpusBleu(hyp, ref), 77.88, 0.01);
}

TEST(CorpusBleu, DisjointCorpusIsZero) {
  const std::vector<Sequence> hyp = {{1, 2, 3}};
  const std::vector<Sequence> ref = {{4, 5, 6}};
  EXPECT_EQ(CorpusBleu(hyp, ref), 0.0);
}

TEST(CorpusBleu, SmoothsMissingHigherOrders) {
  const std::vector<Sequence> hyp = {{1, 2, 3, 4, 5}};
  const std::vector<Sequence> ref = {{1, 2, 3, 9, 5}};
  // Precisions 4/5, 2/4, 1/3 and a smoothed 1/2 for the empty fourth order.
  const double oracle = 100.0 * std::pow(0.8 * 0.5 * (1.0 / 3.0) * 0.5, 0.25);
  EXPECT_NEAR(CorpusBleu(hyp, ref), oracle, 1e-9);
}

TEST(CorpusBleu, RejectsMismatchedCorpora) {
  const std::vector<Sequence> one = {{1}};
  const std::vector<Sequence> two = {{1}, {2}};
  EXPECT_THROW(CorpusBleu(one, two), InvalidInputError);
  EXPECT_THROW(CorpusBleu(std::span<const Sequence>{}, std::span<const Sequence>{}),
               InvalidInputError);
}

TEST(MacroAverage, GoogleColumn) {
  const std::vector<double> col = {82.2, 75.4, 83.8, 85.8, 76.6, 81.8, 76.4, 83.4, 83.0, 85.2};
  const double avg = MacroAverage(col);
  EXPECT_NEAR(avg, 81.4, 0.05);
  EXPECT_EQ(FormatForDisplay(avg), "81.4");
}

TEST(MacroAverage, MarianColumnRoundsHalfUp) {
  const std::vector<double> col = {84.4, 61.6, 85.2, 79.8, 77.2, 83.0, 79.2, 85.2};
  const double avg = MacroAverage(col);
  EXPECT_NEAR(avg, 635.6 / 8.0, 1e-12);
  EXPECT_EQ(RoundForDisplay(avg), 79.5);
  EXPECT_EQ(FormatForDisplay(avg), "79.5");
}

TEST(MacroAverage, SingleValueAndExclusions) {
  EXPECT_EQ(MacroAverage(std::vector<double>{42.5}), 42.5);
  const std::vector<std::optional<double>> with_gap = {80.0, std::nullopt, 70.0};
  EXPECT_EQ(MacroAverage(with_gap), 75.0);
  const std::vector<std::optional<double>> none = {std::nullopt};
  EXPECT_THROW(MacroAverage(none), InvalidInputError);
}

TEST(RoundForDisplay, HalfUpAndNegative) {
  EXPECT_EQ(RoundForDisplay(0.25), 0.3);
  EXPECT_EQ(RoundForDisplay(-0.25), -0.3);
  EXPECT_EQ(RoundForDisplay(12.34, 0), 12.0);
  EXPECT_EQ(FormatForDisplay(7.0, 2), "7.00");
}

// --- configuration -------------------------------------------------------

TEST(Config, SchemaRejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ExperimentConfigFromJson(json{{"bogus", 1}}), InvalidInputError);
  try {
    ExperimentConfigFromJson(json{{"k", 0}});
    FAIL() << "k = 0 accepted";
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("/k"), std::string::npos);
  }
  EXPECT_THROW(ExperimentConfigFromJson(json{{"sampling", "beam"}}), InvalidInputError);
  EXPECT_THROW(ExperimentConfigFromJson(json{{"languages", json::array({{{"noise_eps", 0.1}}})}}),
               InvalidInputError);
}

TEST(Config, SchemaValidatorReportsPointers) {
  const json schema = json::parse(ExperimentConfigSchema());
  const auto errors =
      ValidateAgainstSchema(schema, json{{"map", {{"lambda", "big"}}}, {"seeds", json::array()}});
  ASSERT_EQ(errors.size(), 2u);
  EXPECT_EQ(errors[0].rfind("/map/lambda", 0), 0u);
  EXPECT_EQ(errors[1].rfind("/seeds", 0), 0u);
}

TEST(Config, JsonRoundTrip) {
  for (const auto& c : {SmallConfig(), NoisyToySuite(), BiasedChannelSuite()}) {
    const json doc = ExperimentConfigToJson(c);
    EXPECT_EQ(ExperimentConfigToJson(ExperimentConfigFromJson(doc)), doc);
  }
}

TEST(Config, ShippedFilesMatchPresets) {
  const auto noisy = LoadExperimentConfig(kSourceDir / "configs" / "noisy_toy.json");
  EXPECT_EQ(ExperimentConfigToJson(noisy), ExperimentConfigToJson(NoisyToySuite()));
  const auto biased = LoadExperimentConfig(kSourceDir / "configs" / "biased_channel.json");
  EXPECT_EQ(ExperimentConfigToJson(biased), ExperimentConfigToJson(BiasedChannelSuite()));
  EXPECT_NO_THROW(LoadExperimentConfig(kSourceDir / "configs" / "defaults.json"));
}

TEST(Config, PresetsDescribeTheSuites) {
  const auto noisy = NoisyToySuite();
  EXPECT_EQ(noisy.seeds.size(), 10u);
  ASSERT_EQ(noisy.languages.size(), 1u);
  EXPECT_EQ(noisy.languages[0].noise_eps, 0.3);
  EXPECT_FALSE(noisy.languages[0].merges.empty());
  const auto biased = BiasedChannelSuite();
  EXPECT_EQ(biased.seeds.size(), 10u);
  EXPECT_EQ(biased.languages[0].merges.size(), 1u);
  EXPECT_EQ(biased.mode, RunMode::kFewShotMrt);
}

TEST(Config, ValidateRejectsInconsistentSettings) {
  auto c = SmallConfig();
  c.k = 0;
  EXPECT_THROW(c.Validate(), InvalidInputError);
  c = SmallConfig();
  c.languages[0].merges = {{20, 0}};
  EXPECT_THROW(c.Validate(), InvalidInputError);
  c = SmallConfig();
  c.seeds.clear();
  EXPECT_THROW(c.Validate(), InvalidInputError);
}

// --- runs ---------------------------------------------------------------

class HarnessRuns : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    runs_ = new std::vector<LanguageRun>(PrepareRuns(SmallConfig()));
  }
  static void TearDownTestSuite() {
    delete runs_;
    runs_ = nullptr;
  }
  static std::vector<LanguageRun>* runs_;
};

std::vector<LanguageRun>* HarnessRuns::runs_ = nullptr;

TEST_F(HarnessRuns, LanguageBySeedOrder) {
  ASSERT_EQ(runs_->size(), 4u);
  EXPECT_EQ((*runs_)[0].tag, "aa");
  EXPECT_EQ((*runs_)[1].seed, 1u);
  EXPECT_EQ((*runs_)[2].tag, "bb");
  EXPECT_EQ((*runs_)[2].bundle.test_tgt.front().lang, "bb");
}

TEST_F(HarnessRuns, ZeroShotRowsAreWellFormed) {
  const auto rows = RunZeroShot(SmallConfig(), *runs_);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.mode, "zero-shot");
    EXPECT_EQ(r.k, 4u);
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    EXPECT_GT(r.bleu_1best, 0.0);
    EXPECT_EQ(r.timestamp, "1970-01-01T00:00:00Z");
  }
}

TEST_F(HarnessRuns, FewShotWithoutEpochsEqualsZeroShot) {
  auto c = SmallConfig();
  c.mode = RunMode::kFewShotMrt;
  c.map.epochs = 0;
  const auto few = RunFewShot(c, *runs_);
  const auto zero = RunZeroShot(c, *runs_);
  for (std::size_t i = 0; i < zero.size(); ++i) {
    EXPECT_EQ(few.rows[i].accuracy, zero[i].accuracy);
    EXPECT_EQ(few.rows[i].bleu_1best, zero[i].bleu_1best);
    EXPECT_EQ(few.rows[i].mode, "few-shot+mrt");
  }
}

TEST_F(HarnessRuns, MrtWithOneSampleLeavesTranslatorUnchanged) {
  auto c = SmallConfig();
  c.mode = RunMode::kFewShotMrt;
  c.k = 1;
  c.beam_width = 1;
  c.map.lambda = 0.0;
  const auto out = RunFewShot(c, *runs_);
  for (std::size_t i = 0; i < runs_->size(); ++i) {
    EXPECT_EQ(out.results[i].model.params(), (*runs_)[i].translator.params());
    EXPECT_NE(out.results[i].clf.theta(), (*runs_)[i].classifier.theta());
  }
}

TEST_F(HarnessRuns, FewShotKeepsTranslatorFixed) {
  auto c = SmallConfig();
  c.mode = RunMode::kFewShot;
  c.dev_subsample = 5;
  const auto out = RunFewShot(c, *runs_);
  for (std::size_t i = 0; i < runs_->size(); ++i) {
    EXPECT_EQ(out.results[i].model.params(), (*runs_)[i].translator.params());
    EXPECT_EQ(out.results[i].trace.size(), 2u);
  }
}

TEST_F(HarnessRuns, SweepCoversEveryCombination) {
  auto c = SmallConfig();
  const std::vector<std::size_t> ks = {1, 2, 4};
  const std::vector<SampleMode> modes = {SampleMode::kKBest, SampleMode::kStochastic};
  const auto rows = SweepK(c, *runs_, ks, modes);
  ASSERT_EQ(rows.size(), runs_->size() * ks.size() * modes.size());
  c.k = 1;
  const auto zero = RunZeroShot(c, *runs_);
  EXPECT_EQ(rows[0].accuracy, zero[0].accuracy);
  EXPECT_EQ(rows[0].sampling, SampleMode::kKBest);
  EXPECT_EQ(rows[3].sampling, SampleMode::kStochastic);
  std::ostringstream a, b;
  WriteSweepCsv(a, rows);
  WriteSweepCsv(b, SweepK(SmallConfig(), *runs_, ks, modes));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "language_tag,sampling,k,seed,accuracy");
}

TEST_F(HarnessRuns, RankProfileRowsAreRanked) {
  const auto rows = RankProfile(SmallConfig(), *runs_);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0].rank, 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].language_tag == rows[i - 1].language_tag && rows[i].seed == rows[i - 1].seed) {
      EXPECT_EQ(rows[i].rank, rows[i - 1].rank + 1);
      EXPECT_LE(rows[i].mean_log_score, rows[i - 1].mean_log_score);
    }
  }
  auto c = SmallConfig();
  c.k = 1;
  EXPECT_THROW(RankProfile(c, *runs_), InvalidInputError);
}

TEST_F(HarnessRuns, BleuVsGainHasOneRowPerLanguage) {
  const auto rows = BleuVsGain(SmallConfig(), *runs_);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].language_tag, "aa");
  EXPECT_EQ(rows[1].language_tag, "bb");
  // The noise-free language translates better than the noisy, merged one.
  EXPECT_GT(rows[1].bleu_1best, rows[0].bleu_1best);
}

TEST_F(HarnessRuns, SaveAndLoadRunRoundTrips) {
  const auto out = std::filesystem::path(::testing::TempDir()) / "latrans_run_test";
  std::filesystem::remove_all(out);
  const auto& run = (*runs_)[0];
  SaveRun(out, run);
  const auto back = LoadRun(out, run.tag, run.seed);
  EXPECT_EQ(back.translator.params(), run.translator.params());
  EXPECT_EQ(back.classifier.theta(), run.classifier.theta());
  EXPECT_EQ(back.bundle.test_tgt, run.bundle.test_tgt);
  std::filesystem::remove(RunDirectory(out, run.tag, run.seed) / "translator.json");
  try {
    LoadRun(out, run.tag, run.seed);
    FAIL() << "missing checkpoint accepted";
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("translator.json"), std::string::npos);
  }
  try {
    LoadRun(out, "zz", 0);
    FAIL() << "missing bundle accepted";
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("gen-data"), std::string::npos);
  }
  std::filesystem::remove_all(out);
}

TEST(Harness, IdentityLanguageMatchesSourceAccuracy) {
  const auto c = IdentityConfig();
  const auto runs = PrepareRuns(c);
  auto one = c;
  one.k = 1;
  const auto rows = RunZeroShot(one, runs);
  const auto& run = runs[0];
  EXPECT_EQ(rows[0].accuracy, Accuracy(run.classifier, run.bundle.test_tgt_reference));
  EXPECT_EQ(rows[0].bleu_1best, 100.0);
}

TEST(Harness, DeterministicChannelHasOnlyRankOne) {
  const auto c = IdentityConfig();
  auto runs = PrepareRuns(c);
  ParameterVector phi = runs[0].translator.params();
  for (double& v : phi.mutable_values()) v = kLogZero;
  const std::size_t n = runs[0].translator.output_vocab().size();
  for (std::size_t i = 0; i < n; ++i) phi[i * n + i] = 0.0;
  runs[0].translator.set_params(phi);
  const auto rows = RankProfile(c, runs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].rank, 1);
  EXPECT_EQ(rows[0].mean_log_score, 0.0);
  EXPECT_EQ(rows[0].examples, runs[0].bundle.test_tgt.size());
}

// --- report --------------------------------------------------------------

std::vector<ReportRow> SampleRows() {
  return {{"aa", "zero-shot", 12, 0, 0.8, 50.0, "t"},
          {"aa", "zero-shot", 12, 1, 0.6, 40.0, "t"},
          {"bb", "zero-shot", 12, 0, 0.9, 70.0, "t"},
          {"aa", "few-shot", 12, 0, 0.85, 50.0, "t"}};
}

TEST(Report, CsvRoundTripWithExactHeader) {
  const auto rows = SampleRows();
  std::stringstream buf;
  WriteReportCsv(buf, rows);
  const std::string text = buf.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "language_tag,mode,k,seed,accuracy,bleu_1best,timestamp");
  EXPECT_EQ(ReadReportCsv(buf), rows);
}

TEST(Report, RejectsOutOfRangeAndBadHeaders) {
  std::vector<ReportRow> bad = {{"aa", "zero-shot", 1, 0, 1.5, 0.0, "t"}};
  std::ostringstream out;
  EXPECT_THROW(WriteReportCsv(out, bad), DomainError);
  std::istringstream in("lang,mode\n");
  EXPECT_THROW(ReadReportCsv(in), ParseError);
  std::istringstream short_row("language_tag,mode,k,seed,accuracy,bleu_1best,timestamp\naa,1\n");
  try {
    ReadReportCsv(short_row);
    FAIL() << "short row accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Report, SummaryMacroAveragesPerMode) {
  const json s = SummarizeReport(SampleRows());
  const json& zero = s.at("modes").at("zero-shot");
  EXPECT_NEAR(zero.at("languages").at("aa").at("accuracy").get<double>(), 70.0, 1e-12);
  EXPECT_EQ(zero.at("languages").at("aa").at("seeds").get<int>(), 2);
  EXPECT_NEAR(zero.at("macro_accuracy").get<double>(), 80.0, 1e-12);
  EXPECT_EQ(zero.at("macro_accuracy_display").get<std::string>(), "80.0");
  EXPECT_NEAR(zero.at("macro_bleu_1best").get<double>(), 57.5, 1e-12);
  EXPECT_NEAR(s.at("modes").at("few-shot").at("macro_accuracy").get<double>(), 85.0, 1e-12);
}

TEST(Report, TimestampResolution) {
  EXPECT_EQ(ResolveTimestamp("2020-01-01T00:00:00Z"), "2020-01-01T00:00:00Z");
  EXPECT_TRUE(std::regex_match(ResolveTimestamp("now"),
                               std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));
}

// --- checkpoints ---------------------------------------------------------

TEST(Checkpoint, TranslatorAndClassifierAreBitExact) {
  const auto runs = PrepareRuns(IdentityConfig());
  std::stringstream t, c;
  SaveTranslator(t, runs[0].translator);
  SaveClassifier(c, runs[0].classifier);
  const auto translator = LoadTranslator(t);
  const auto clf = LoadClassifier(c);
  EXPECT_EQ(translator.params(), runs[0].translator.params());
  EXPECT_EQ(translator.input_vocab(), runs[0].translator.input_vocab());
  EXPECT_EQ(clf.theta(), runs[0].classifier.theta());
  EXPECT_EQ(clf.feature_spec(), runs[0].classifier.feature_spec());
}

TEST(Checkpoint, MissingFileNamesTheRemedy) {
  try {
    LoadTranslator(std::filesystem::path("/nonexistent/translator.json"));
    FAIL() << "missing checkpoint accepted";
  } catch (const InvalidInputError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("missing translator checkpoint"), std::string::npos);
    EXPECT_NE(what.find("/nonexistent/translator.json"), std::string::npos);
  }
  EXPECT_THROW(LoadClassifier(std::filesystem::path("/nonexistent/classifier.json")),
               InvalidInputError);
}

TEST(Checkpoint, KindMismatchIsRejected) {
  const auto runs = PrepareRuns(IdentityConfig());
  std::stringstream t;
  SaveTranslator(t, runs[0].translator);
  EXPECT_ANY_THROW(LoadClassifier(t));
}

}  // namespace
}  // namespace latrans
