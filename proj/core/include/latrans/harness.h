#ifndef LATRANS_HARNESS_H_
#define LATRANS_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "latrans/classifier.h"
#include "latrans/ensemble.h"
#include "latrans/mrt.h"
#include "latrans/seq_model.h"
#include "latrans/tasks.h"

namespace latrans {

enum class RunMode { kZeroShot, kFewShot, kFewShotMrt };
std::string RunModeName(RunMode mode);  // zero-shot, few-shot, few-shot+mrt
RunMode ParseRunMode(const std::string& name);

// One synthetic target language: a random permutation cipher over the source
// vocabulary, optional many-to-one merges, and token noise.
struct LanguageSpec {
  std::string tag;
  double noise_eps = 0.0;
  std::vector<std::pair<int, int>> merges;  // (token, onto), source indices
  bool permute = true;
};

struct GenerationSpec {
  TaskShape shape = TaskShape::kCopa;
  LabelRule rule = LabelRule::kKeywordOverlap;
  int vocab_size = 8;
  TaskSizes sizes;
  GenerationOptions options;
};

struct ExperimentConfig {
  std::string name = "experiment";
  // A saved bundle directory; when set it replaces generation and defines
  // the single language (tagged with its target_lang).
  std::optional<std::filesystem::path> bundle_path;
  GenerationSpec generation;
  std::vector<LanguageSpec> languages;
  std::size_t k = 12;
  std::size_t beam_width = 12;
  SampleMode sampling = SampleMode::kKBest;
  double temperature = 1.0;
  EnsembleConfig ensemble;
  RunMode mode = RunMode::kZeroShot;
  MapConfig map;
  OptimizerConfig classifier;
  FeatureSpec features;
  TranslatorTrainConfig translator;
  std::vector<std::uint64_t> seeds = {0};
  // 0 keeps the full dev split for few-shot fine-tuning.
  std::size_t dev_subsample = 0;
  std::vector<std::size_t> k_values = {1, 2, 4, 8, 12};
  std::filesystem::path output_dir = "out";
  // Written verbatim into report rows so that reports are reproducible;
  // "now" stamps the wall-clock time (UTC) instead.
  std::string timestamp = "1970-01-01T00:00:00Z";

  // Throws InvalidInputError when k < 1, seeds or languages are empty, or a
  // language spec does not fit the vocabulary.
  void Validate() const;
};

// The JSON Schema (draft-07 subset) that config files must satisfy.
const std::string& ExperimentConfigSchema();
// Validates against the schema, then fills unspecified fields with defaults.
// Without "languages" (and without "bundle") there is one language, "tgt",
// with default settings. Throws InvalidInputError naming the offending JSON
// pointer.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& doc);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);

// Shipped presets.
ExperimentConfig NoisyToySuite();
ExperimentConfig BiasedChannelSuite();

// Everything one (language, seed) run needs.
struct LanguageRun {
  std::string tag;
  std::uint64_t seed = 0;
  TaskBundle bundle;
  LinearTextClassifier classifier;
  ConditionalSeqModel translator;
};

TaskBundle BuildBundle(const ExperimentConfig& config, const LanguageSpec& language,
                       std::uint64_t seed);
LinearTextClassifier TrainTaskClassifier(const ExperimentConfig& config,
                                         const TaskBundle& bundle, std::uint64_t seed);
ConditionalSeqModel TrainTaskTranslator(const ExperimentConfig& config,
                                        const TaskBundle& bundle);
LanguageRun PrepareRun(const ExperimentConfig& config, const LanguageSpec& language,
                       std::uint64_t seed);
// All (language, seed) runs in (language, seed) order.
std::vector<LanguageRun> PrepareRuns(const ExperimentConfig& config);

// Artifact layout: <out>/<tag>/seed-<seed>/ holding the bundle files,
// translator.json and classifier.json.
std::filesystem::path RunDirectory(const std::filesystem::path& out, const std::string& tag,
                                   std::uint64_t seed);
void SaveRun(const std::filesystem::path& out, const LanguageRun& run);
// Throws InvalidInputError naming the first missing bundle or checkpoint.
LanguageRun LoadRun(const std::filesystem::path& out, const std::string& tag,
                    std::uint64_t seed);

struct ReportRow {
  std::string language_tag;
  std::string mode;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;    // [0, 1]
  double bleu_1best = 0.0;  // [0, 100]
  std::string timestamp;

  bool operator==(const ReportRow&) const = default;
};

struct EvalOptions {
  std::size_t k = 12;
  std::size_t beam_width = 12;
  SampleMode sampling = SampleMode::kKBest;
  double temperature = 1.0;
  EnsembleConfig ensemble;
};
EvalOptions EvalOptionsFrom(const ExperimentConfig& config);

// Accuracy of ensemble prediction over decoded translations of `examples`.
double EvaluateTranslateTest(const LinearTextClassifier& clf,
                             const ConditionalSeqModel& translator,
                             std::span<const Example> examples, const EvalOptions& options,
                             std::uint64_t seed);
// Corpus BLEU of the 1-best translation of every segment against the
// source-language references.
double OneBestBleu(const ConditionalSeqModel& translator, std::span<const Example> examples,
                   std::span<const Example> references);

std::vector<ReportRow> RunZeroShot(const ExperimentConfig& config,
                                   std::span<const LanguageRun> runs);
std::vector<ReportRow> RunZeroShot(const ExperimentConfig& config);

struct FewShotOutcome {
  std::vector<ReportRow> rows;
  std::vector<FinetuneResult> results;  // parallel to rows
};
// Fine-tunes on dev_tgt (subsampled when configured) in config.mode, then
// evaluates as RunZeroShot. Zero-shot mode skips fine-tuning.
FewShotOutcome RunFewShot(const ExperimentConfig& config, std::span<const LanguageRun> runs);
std::vector<ReportRow> RunFewShot(const ExperimentConfig& config);

struct SweepRow {
  std::string language_tag;
  SampleMode sampling = SampleMode::kKBest;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};
// Zero-shot accuracy for every (language, sampling mode, k, seed).
std::vector<SweepRow> SweepK(const ExperimentConfig& config, std::span<const LanguageRun> runs,
                             std::span<const std::size_t> k_values,
                             std::span<const SampleMode> modes);
void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows);

struct RankRow {
  std::string language_tag;
  std::uint64_t seed = 0;
  int rank = 0;
  std::size_t examples = 0;  // examples whose every segment has this rank
  double accuracy = 0.0;
  double mean_log_score = 0.0;
};
// Classifies with the rank-r k-best translation of each segment alone. A
// rank appears only if some example has it for every segment.
std::vector<RankRow> RankProfile(const ExperimentConfig& config,
                                 std::span<const LanguageRun> runs);
void WriteRankCsv(std::ostream& out, std::span<const RankRow> rows);

struct BleuGainRow {
  std::string language_tag;
  double bleu_1best = 0.0;
  double delta_accuracy_k12_minus_k1 = 0.0;
};
// Seed-averaged BLEU and k-best accuracy gain of k = 12 over k = 1, one row
// per language.
std::vector<BleuGainRow> BleuVsGain(const ExperimentConfig& config,
                                    std::span<const LanguageRun> runs);
void WriteBleuGainCsv(std::ostream& out, std::span<const BleuGainRow> rows);

// CSV with header language_tag,mode,k,seed,accuracy,bleu_1best,timestamp.
void WriteReportCsv(std::ostream& out, std::span<const ReportRow> rows);
std::vector<ReportRow> ReadReportCsv(std::istream& in);
// Per mode: macro average over languages of the seed-mean accuracy (x100),
// raw and rounded for display, plus the same for BLEU.
nlohmann::json SummarizeReport(std::span<const ReportRow> rows);

std::string ResolveTimestamp(const std::string& configured);

}  // namespace latrans

#endif  // LATRANS_HARNESS_H_
