#include "latrans/harness.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "latrans/bleu.h"
#include "latrans/checkpoint.h"
#include "latrans/errors.h"
#include "latrans/format.h"
#include "latrans/json_schema.h"

namespace latrans {

using nlohmann::json;

extern const char* const kExperimentSchemaText;

namespace {

constexpr std::uint64_t kCipherTag = 0xc1f3;
constexpr std::uint64_t kClassifierTag = 0xc1a5;
constexpr std::uint64_t kEvalTag = 0xe7a1;
constexpr std::uint64_t kFinetuneTag = 0xf1e7;
constexpr std::uint64_t kSubsampleTag = 0xd5b5;

std::uint64_t TagHash(const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string RunModeName(RunMode mode) {
  switch (mode) {
    case RunMode::kZeroShot:
      return "zero-shot";
    case RunMode::kFewShot:
      return "few-shot";
    case RunMode::kFewShotMrt:
      return "few-shot+mrt";
  }
  return "unknown";
}

RunMode ParseRunMode(const std::string& name) {
  if (name == "zero-shot") return RunMode::kZeroShot;
  if (name == "few-shot") return RunMode::kFewShot;
  if (name == "few-shot+mrt") return RunMode::kFewShotMrt;
  throw InvalidInputError("unknown mode '" + name + "'");
}

void ExperimentConfig::Validate() const {
  if (k < 1) throw InvalidInputError("k must be at least 1");
  if (beam_width < 1) throw InvalidInputError("beam_width must be at least 1");
  if (seeds.empty()) throw InvalidInputError("seeds must be non-empty");
  if (k_values.empty()) throw InvalidInputError("k_values must be non-empty");
  if (std::find(k_values.begin(), k_values.end(), std::size_t{0}) != k_values.end()) {
    throw InvalidInputError("k_values entries must be at least 1");
  }
  if (bundle_path) return;
  if (languages.empty()) throw InvalidInputError("languages must be non-empty");
  std::vector<std::string> tags;
  for (const auto& lang : languages) {
    if (lang.tag.empty()) throw InvalidInputError("language tags must be non-empty");
    if (lang.tag.find_first_of(",/\\\n\"") != std::string::npos) {
      throw InvalidInputError("language tag '" + lang.tag + "' has a reserved character");
    }
    if (std::find(tags.begin(), tags.end(), lang.tag) != tags.end()) {
      throw InvalidInputError("duplicate language tag '" + lang.tag + "'");
    }
    tags.push_back(lang.tag);
    for (const auto& [token, onto] : lang.merges) {
      if (token < 0 || onto < 0 || token >= generation.vocab_size ||
          onto >= generation.vocab_size) {
        throw InvalidInputError("merge in language '" + lang.tag +
                                "' is outside the vocabulary");
      }
    }
    if (!(lang.noise_eps >= 0.0 && lang.noise_eps < 1.0)) {
      throw InvalidInputError("noise_eps must lie in [0, 1)");
    }
  }
}

const std::string& ExperimentConfigSchema() {
  static const std::string schema = kExperimentSchemaText;
  return schema;
}

namespace {

template <typename T>
void Read(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfigFromJson(const json& doc) {
  static const json schema = json::parse(ExperimentConfigSchema());
  const auto errors = ValidateAgainstSchema(schema, doc);
  if (!errors.empty()) {
    std::string message = "config does not match the schema:";
    for (const auto& e : errors) message += "\n  " + e;
    throw InvalidInputError(message);
  }
  ExperimentConfig c;
  Read(doc, "name", c.name);
  if (doc.contains("bundle")) c.bundle_path = doc.at("bundle").get<std::string>();
  if (doc.contains("generation")) {
    const json& g = doc.at("generation");
    if (g.contains("shape")) c.generation.shape = ParseTaskShape(g.at("shape"));
    if (g.contains("rule")) c.generation.rule = ParseLabelRule(g.at("rule"));
    Read(g, "vocab_size", c.generation.vocab_size);
    if (g.contains("sizes")) {
      const json& s = g.at("sizes");
      Read(s, "train", c.generation.sizes.train);
      Read(s, "dev", c.generation.sizes.dev);
      Read(s, "test", c.generation.sizes.test);
      Read(s, "parallel", c.generation.sizes.parallel);
    }
    GenerationOptions& o = c.generation.options;
    Read(g, "segment_length", o.segment_length);
    Read(g, "token_weights", o.token_weights);
    Read(g, "parallel_token_weights", o.parallel_token_weights);
    Read(g, "designated_token", o.designated_token);
    Read(g, "match_threshold", o.match_threshold);
    Read(g, "nli_low", o.nli_low);
    Read(g, "nli_high", o.nli_high);
  }
  if (doc.contains("languages")) {
    c.languages.clear();
    for (const auto& l : doc.at("languages")) {
      LanguageSpec spec;
      spec.tag = l.at("tag").get<std::string>();
      Read(l, "noise_eps", spec.noise_eps);
      Read(l, "permute", spec.permute);
      if (l.contains("merges")) {
        for (const auto& m : l.at("merges")) spec.merges.emplace_back(m[0].get<int>(), m[1].get<int>());
      }
      c.languages.push_back(std::move(spec));
    }
  }
  Read(doc, "k", c.k);
  Read(doc, "beam_width", c.beam_width);
  if (doc.contains("sampling")) c.sampling = ParseSampleMode(doc.at("sampling"));
  Read(doc, "temperature", c.temperature);
  if (doc.contains("ensemble")) {
    const json& e = doc.at("ensemble");
    if (e.contains("weighting")) c.ensemble.weighting = ParseWeighting(e.at("weighting"));
    if (e.contains("combine")) c.ensemble.combine = ParseCombination(e.at("combine"));
  }
  if (doc.contains("mode")) c.mode = ParseRunMode(doc.at("mode"));
  if (doc.contains("map")) {
    const json& m = doc.at("map");
    Read(m, "lambda", c.map.lambda);
    Read(m, "epochs", c.map.epochs);
    Read(m, "batch_size", c.map.batch_size);
    Read(m, "clf_step", c.map.clf_step);
    Read(m, "mt_step", c.map.mt_step);
    Read(m, "clip_norm", c.map.clip_norm);
    if (m.contains("prior_center")) c.map.prior_center = ParsePriorCenter(m.at("prior_center"));
  }
  if (doc.contains("classifier")) {
    const json& o = doc.at("classifier");
    if (o.contains("optimizer")) {
      c.classifier.kind = o.at("optimizer") == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdam;
    }
    Read(o, "step", c.classifier.step);
    Read(o, "beta1", c.classifier.adam_beta1);
    Read(o, "beta2", c.classifier.adam_beta2);
    Read(o, "epsilon", c.classifier.adam_epsilon);
    Read(o, "epochs", c.classifier.epochs);
    Read(o, "batch_size", c.classifier.batch_size);
    Read(o, "clip_norm", c.classifier.clip_norm);
    Read(o, "l2", c.classifier.l2);
  }
  if (doc.contains("features")) {
    const json& f = doc.at("features");
    Read(f, "max_ngram", c.features.max_ngram);
    Read(f, "hashing_dim", c.features.hashing_dim);
    Read(f, "include_segment_tags", c.features.include_segment_tags);
    Read(f, "count_indicators", c.features.count_indicators);
    Read(f, "overlap_features", c.features.overlap_features);
    Read(f, "overlap_levels", c.features.overlap_levels);
  }
  if (doc.contains("translator")) {
    Read(doc.at("translator"), "iterations", c.translator.iterations);
    Read(doc.at("translator"), "step", c.translator.step);
  }
  Read(doc, "seeds", c.seeds);
  Read(doc, "dev_subsample", c.dev_subsample);
  Read(doc, "k_values", c.k_values);
  if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
  Read(doc, "timestamp", c.timestamp);
  if (!c.bundle_path && !doc.contains("languages")) {
    LanguageSpec tgt;
    tgt.tag = "tgt";
    c.languages = {tgt};
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return ExperimentConfigFromJson(doc);
}

json ExperimentConfigToJson(const ExperimentConfig& c) {
  const GenerationOptions& o = c.generation.options;
  json languages = json::array();
  for (const auto& l : c.languages) {
    json merges = json::array();
    for (const auto& [a, b] : l.merges) merges.push_back({a, b});
    languages.push_back(
        {{"tag", l.tag}, {"noise_eps", l.noise_eps}, {"merges", merges}, {"permute", l.permute}});
  }
  json doc = {
      {"name", c.name},
      {"generation",
       {{"shape", TaskShapeName(c.generation.shape)},
        {"rule", LabelRuleName(c.generation.rule)},
        {"vocab_size", c.generation.vocab_size},
        {"sizes",
         {{"train", c.generation.sizes.train},
          {"dev", c.generation.sizes.dev},
          {"test", c.generation.sizes.test},
          {"parallel", c.generation.sizes.parallel}}},
        {"segment_length", o.segment_length},
        {"token_weights", o.token_weights},
        {"parallel_token_weights", o.parallel_token_weights},
        {"designated_token", o.designated_token},
        {"match_threshold", o.match_threshold},
        {"nli_low", o.nli_low},
        {"nli_high", o.nli_high}}},
      {"languages", languages},
      {"k", c.k},
      {"beam_width", c.beam_width},
      {"sampling", SampleModeName(c.sampling)},
      {"temperature", c.temperature},
      {"ensemble",
       {{"weighting", WeightingName(c.ensemble.weighting)},
        {"combine", CombinationName(c.ensemble.combine)}}},
      {"mode", RunModeName(c.mode)},
      {"map",
       {{"lambda", c.map.lambda},
        {"epochs", c.map.epochs},
        {"batch_size", c.map.batch_size},
        {"clf_step", c.map.clf_step},
        {"mt_step", c.map.mt_step},
        {"clip_norm", c.map.clip_norm},
        {"prior_center", PriorCenterName(c.map.prior_center)}}},
      {"classifier",
       {{"optimizer", c.classifier.kind == OptimizerKind::kSgd ? "sgd" : "adam"},
        {"step", c.classifier.step},
        {"beta1", c.classifier.adam_beta1},
        {"beta2", c.classifier.adam_beta2},
        {"epsilon", c.classifier.adam_epsilon},
        {"epochs", c.classifier.epochs},
        {"batch_size", c.classifier.batch_size},
        {"clip_norm", c.classifier.clip_norm},
        {"l2", c.classifier.l2}}},
      {"features",
       {{"max_ngram", c.features.max_ngram},
        {"hashing_dim", c.features.hashing_dim},
        {"include_segment_tags", c.features.include_segment_tags},
        {"count_indicators", c.features.count_indicators},
        {"overlap_features", c.features.overlap_features},
        {"overlap_levels", c.features.overlap_levels}}},
      {"translator",
       {{"iterations", c.translator.iterations}, {"step", c.translator.step}}},
      {"seeds", c.seeds},
      {"dev_subsample", c.dev_subsample},
      {"k_values", c.k_values},
      {"output_dir", c.output_dir.string()},
      {"timestamp", c.timestamp}};
  if (c.bundle_path) doc["bundle"] = c.bundle_path->string();
  return doc;
}

TaskBundle BuildBundle(const ExperimentConfig& config, const LanguageSpec& language,
                       std::uint64_t seed) {
  if (config.bundle_path) return LoadBundle(*config.bundle_path);
  const int v = config.generation.vocab_size;
  CipherSpec cipher =
      language.permute
          ? CipherSpec::RandomPermutation(v, MixSeed(MixSeed(seed, kCipherTag), TagHash(language.tag)))
          : CipherSpec::Identity(v);
  for (const auto& [token, onto] : language.merges) cipher.Merge(token, onto);
  cipher.noise_eps = language.noise_eps;
  GenerationOptions options = config.generation.options;
  options.target_lang = language.tag;
  return GenerateTask(config.generation.shape, config.generation.sizes, cipher,
                      config.generation.rule, options, seed);
}

LinearTextClassifier TrainTaskClassifier(const ExperimentConfig& config,
                                         const TaskBundle& bundle, std::uint64_t seed) {
  LinearTextClassifier clf(bundle.source_vocab, config.features, bundle.num_labels);
  OptimizerConfig opt = config.classifier;
  opt.seed = MixSeed(seed, kClassifierTag);
  return TrainClassifier(std::move(clf), LabeledDataset{bundle.train_src, bundle.num_labels},
                         opt);
}

ConditionalSeqModel TrainTaskTranslator(const ExperimentConfig& config,
                                        const TaskBundle& bundle) {
  auto model = ConditionalSeqModel::LexicalChannel(bundle.target_vocab, bundle.source_vocab);
  return TrainTranslatorOnParallel(std::move(model), bundle.parallel, config.translator);
}

LanguageRun PrepareRun(const ExperimentConfig& config, const LanguageSpec& language,
                       std::uint64_t seed) {
  TaskBundle bundle = BuildBundle(config, language, seed);
  LinearTextClassifier clf = TrainTaskClassifier(config, bundle, seed);
  ConditionalSeqModel translator = TrainTaskTranslator(config, bundle);
  const std::string tag = config.bundle_path ? bundle.options.target_lang : language.tag;
  return LanguageRun{tag, seed, std::move(bundle), std::move(clf), std::move(translator)};
}

namespace {

std::vector<LanguageSpec> EffectiveLanguages(const ExperimentConfig& config) {
  if (config.bundle_path) return {LanguageSpec{}};
  return config.languages;
}

}  // namespace

std::vector<LanguageRun> PrepareRuns(const ExperimentConfig& config) {
  config.Validate();
  std::vector<LanguageRun> runs;
  for (const auto& lang : EffectiveLanguages(config)) {
    for (std::uint64_t seed : config.seeds) runs.push_back(PrepareRun(config, lang, seed));
  }
  return runs;
}

std::filesystem::path RunDirectory(const std::filesystem::path& out, const std::string& tag,
                                   std::uint64_t seed) {
  return out / tag / ("seed-" + std::to_string(seed));
}

void SaveRun(const std::filesystem::path& out, const LanguageRun& run) {
  const auto dir = RunDirectory(out, run.tag, run.seed);
  SaveBundle(dir, run.bundle);
  SaveTranslator(dir / "translator.json", run.translator);
  SaveClassifier(dir / "classifier.json", run.classifier);
}

LanguageRun LoadRun(const std::filesystem::path& out, const std::string& tag,
                    std::uint64_t seed) {
  const auto dir = RunDirectory(out, tag, seed);
  if (!std::filesystem::exists(dir / "bundle.json")) {
    throw InvalidInputError("missing task bundle " + (dir / "bundle.json").string() +
                            "; run gen-data first");
  }
  TaskBundle bundle = LoadBundle(dir);
  ConditionalSeqModel translator = LoadTranslator(dir / "translator.json");
  LinearTextClassifier clf = LoadClassifier(dir / "classifier.json");
  return LanguageRun{tag, seed, std::move(bundle), std::move(clf), std::move(translator)};
}

EvalOptions EvalOptionsFrom(const ExperimentConfig& config) {
  return EvalOptions{config.k, config.beam_width, config.sampling, config.temperature,
                     config.ensemble};
}

namespace {

std::vector<TranslationSampleSet> DecodeExample(const ConditionalSeqModel& translator,
                                                const Example& ex, const EvalOptions& options,
                                                std::uint64_t seed) {
  DecodeOptions decode{options.sampling, options.k, options.beam_width, options.temperature};
  auto sets = DecodeSegments(translator, ex.segments, decode, seed);
  if (options.ensemble.combine == SegmentCombination::kByRank) {
    std::size_t n = sets.front().samples.size();
    for (const auto& s : sets) n = std::min(n, s.samples.size());
    for (auto& s : sets) s.samples.resize(n);
  }
  return sets;
}

}  // namespace

double EvaluateTranslateTest(const LinearTextClassifier& clf,
                             const ConditionalSeqModel& translator,
                             std::span<const Example> examples, const EvalOptions& options,
                             std::uint64_t seed) {
  if (examples.empty()) throw InvalidInputError("evaluation set is empty");
  const std::uint64_t base = MixSeed(seed, kEvalTag);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto sets = DecodeExample(translator, examples[i], options, MixSeed(base, i));
    if (EnsemblePredict(clf, sets, options.ensemble).Argmax() == examples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double OneBestBleu(const ConditionalSeqModel& translator, std::span<const Example> examples,
                   std::span<const Example> references) {
  if (examples.size() != references.size()) {
    throw InvalidInputError("BLEU references do not align with the examples");
  }
  std::vector<Sequence> hyps;
  std::vector<Sequence> refs;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].segments.size() != references[i].segments.size()) {
      throw InvalidInputError("BLEU reference has a different segment count");
    }
    for (std::size_t s = 0; s < examples[i].segments.size(); ++s) {
      hyps.push_back(translator.BeamSearchKBest(examples[i].segments[s], 1, 1).front().tokens);
      refs.push_back(references[i].segments[s]);
    }
  }
  return CorpusBleu(hyps, refs);
}

std::string ResolveTimestamp(const std::string& configured) {
  if (configured != "now") return configured;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream out;
  out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

namespace {

ReportRow MakeRow(const ExperimentConfig& config, const LanguageRun& run, RunMode mode,
                  const LinearTextClassifier& clf, const ConditionalSeqModel& translator,
                  const std::string& timestamp) {
  const double accuracy = EvaluateTranslateTest(clf, translator, run.bundle.test_tgt,
                                                EvalOptionsFrom(config), run.seed);
  const double bleu =
      OneBestBleu(translator, run.bundle.test_tgt, run.bundle.test_tgt_reference);
  return ReportRow{run.tag, RunModeName(mode), config.k, run.seed, accuracy, bleu, timestamp};
}

std::vector<Example> FewShotSet(const ExperimentConfig& config, const LanguageRun& run) {
  const auto& dev = run.bundle.dev_tgt;
  if (config.dev_subsample == 0 || config.dev_subsample >= dev.size()) return dev;
  std::vector<std::size_t> index(dev.size());
  std::iota(index.begin(), index.end(), 0);
  Rng rng(MixSeed(run.seed, kSubsampleTag));
  rng.Shuffle(index);
  index.resize(config.dev_subsample);
  std::sort(index.begin(), index.end());
  std::vector<Example> out;
  for (std::size_t i : index) out.push_back(dev[i]);
  return out;
}

}  // namespace

std::vector<ReportRow> RunZeroShot(const ExperimentConfig& config,
                                   std::span<const LanguageRun> runs) {
  config.Validate();
  const std::string ts = ResolveTimestamp(config.timestamp);
  std::vector<ReportRow> rows;
  for (const auto& run : runs) {
    rows.push_back(MakeRow(config, run, RunMode::kZeroShot, run.classifier, run.translator, ts));
  }
  return rows;
}

std::vector<ReportRow> RunZeroShot(const ExperimentConfig& config) {
  const auto runs = PrepareRuns(config);
  return RunZeroShot(config, runs);
}

FewShotOutcome RunFewShot(const ExperimentConfig& config, std::span<const LanguageRun> runs) {
  config.Validate();
  const std::string ts = ResolveTimestamp(config.timestamp);
  MapConfig map = config.map;
  map.k = config.k;
  map.beam_width = config.beam_width;
  map.sampling = config.sampling;
  map.temperature = config.temperature;
  map.ensemble = config.ensemble;
  map.update_translator = config.mode == RunMode::kFewShotMrt;
  if (config.mode == RunMode::kZeroShot) map.epochs = 0;

  FewShotOutcome outcome;
  for (const auto& run : runs) {
    const auto dev = FewShotSet(config, run);
    FinetuneResult result = FewShotFinetune(run.classifier, run.translator, dev, map,
                                            MixSeed(run.seed, kFinetuneTag));
    outcome.rows.push_back(
        MakeRow(config, run, config.mode, result.clf, result.model, ts));
    outcome.results.push_back(std::move(result));
  }
  return outcome;
}

std::vector<ReportRow> RunFewShot(const ExperimentConfig& config) {
  const auto runs = PrepareRuns(config);
  return RunFewShot(config, runs).rows;
}

std::vector<SweepRow> SweepK(const ExperimentConfig& config, std::span<const LanguageRun> runs,
                             std::span<const std::size_t> k_values,
                             std::span<const SampleMode> modes) {
  if (k_values.empty()) throw InvalidInputError("k_values must be non-empty");
  std::vector<SweepRow> rows;
  for (const auto& run : runs) {
    for (SampleMode mode : modes) {
      for (std::size_t k : k_values) {
        EvalOptions options = EvalOptionsFrom(config);
        options.k = k;
        options.sampling = mode;
        const double acc = EvaluateTranslateTest(run.classifier, run.translator,
                                                 run.bundle.test_tgt, options, run.seed);
        rows.push_back(SweepRow{run.tag, mode, k, run.seed, acc});
      }
    }
  }
  return rows;
}

void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "language_tag,sampling,k,seed,accuracy\n";
  for (const auto& r : rows) {
    out << r.language_tag << ',' << SampleModeName(r.sampling) << ',' << r.k << ',' << r.seed
        << ',' << FormatDouble(r.accuracy) << '\n';
  }
}

std::vector<RankRow> RankProfile(const ExperimentConfig& config,
                                 std::span<const LanguageRun> runs) {
  if (config.k < 2) throw InvalidInputError("rank profile needs k >= 2");
  std::vector<RankRow> rows;
  for (const auto& run : runs) {
    const int k = static_cast<int>(config.k);
    std::vector<std::size_t> count(k, 0), correct(k, 0), segments(k, 0);
    std::vector<double> score_sum(k, 0.0);
    for (const auto& ex : run.bundle.test_tgt) {
      std::vector<std::vector<ScoredTranslation>> kbest;
      for (const auto& seg : ex.segments) {
        kbest.push_back(
            run.translator.BeamSearchKBest(seg, config.k, std::max(config.k, config.beam_width)));
      }
      for (int r = 0; r < k; ++r) {
        const bool available = std::all_of(kbest.begin(), kbest.end(),
                                           [&](const auto& s) { return s.size() > std::size_t(r); });
        if (!available) break;
        std::vector<Sequence> input;
        for (const auto& s : kbest) {
          input.push_back(s[r].tokens);
          score_sum[r] += s[r].log_score;
          ++segments[r];
        }
        ++count[r];
        if (run.classifier.PredictSegments(input).Argmax() == ex.label) ++correct[r];
      }
    }
    for (int r = 0; r < k; ++r) {
      if (count[r] == 0) break;
      rows.push_back(RankRow{run.tag, run.seed, r + 1, count[r],
                             static_cast<double>(correct[r]) / static_cast<double>(count[r]),
                             score_sum[r] / static_cast<double>(segments[r])});
    }
  }
  return rows;
}

void WriteRankCsv(std::ostream& out, std::span<const RankRow> rows) {
  out << "language_tag,seed,rank,examples,accuracy,mean_log_score\n";
  for (const auto& r : rows) {
    out << r.language_tag << ',' << r.seed << ',' << r.rank << ',' << r.examples << ','
        << FormatDouble(r.accuracy) << ',' << FormatDouble(r.mean_log_score) << '\n';
  }
}

std::vector<BleuGainRow> BleuVsGain(const ExperimentConfig& config,
                                    std::span<const LanguageRun> runs) {
  std::vector<BleuGainRow> rows;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> counts;
  for (const auto& run : runs) {
    auto [it, inserted] = index.emplace(run.tag, rows.size());
    if (inserted) {
      rows.push_back(BleuGainRow{run.tag, 0.0, 0.0});
      counts.push_back(0);
    }
    EvalOptions options = EvalOptionsFrom(config);
    options.sampling = SampleMode::kKBest;
    options.k = 1;
    const double acc1 = EvaluateTranslateTest(run.classifier, run.translator,
                                              run.bundle.test_tgt, options, run.seed);
    options.k = 12;
    const double acc12 = EvaluateTranslateTest(run.classifier, run.translator,
                                               run.bundle.test_tgt, options, run.seed);
    BleuGainRow& row = rows[it->second];
    row.bleu_1best +=
        OneBestBleu(run.translator, run.bundle.test_tgt, run.bundle.test_tgt_reference);
    row.delta_accuracy_k12_minus_k1 += acc12 - acc1;
    ++counts[it->second];
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].bleu_1best /= static_cast<double>(counts[i]);
    rows[i].delta_accuracy_k12_minus_k1 /= static_cast<double>(counts[i]);
  }
  return rows;
}

void WriteBleuGainCsv(std::ostream& out, std::span<const BleuGainRow> rows) {
  out << "language_tag,bleu_1best,delta_accuracy_k12_minus_k1\n";
  for (const auto& r : rows) {
    out << r.language_tag << ',' << FormatDouble(r.bleu_1best) << ','
        << FormatDouble(r.delta_accuracy_k12_minus_k1) << '\n';
  }
}

namespace {

constexpr const char* kReportHeader = "language_tag,mode,k,seed,accuracy,bleu_1best,timestamp";

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void WriteReportCsv(std::ostream& out, std::span<const ReportRow> rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0) ||
        !(r.bleu_1best >= 0.0 && r.bleu_1best <= 100.0)) {
      throw DomainError("report row out of range for " + r.language_tag);
    }
    out << r.language_tag << ',' << r.mode << ',' << r.k << ',' << r.seed << ','
        << FormatDouble(r.accuracy) << ',' << FormatDouble(r.bleu_1best) << ',' << r.timestamp
        << '\n';
  }
}

std::vector<ReportRow> ReadReportCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw ParseError("report header must be " + std::string(kReportHeader), line_no);
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 7) throw ParseError("expected 7 fields", line_no);
    try {
      ReportRow r{f[0], f[1], std::stoul(f[2]), std::stoull(f[3]), ParseDouble(f[4]),
                  ParseDouble(f[5]), f[6]};
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return rows;
}

json SummarizeReport(std::span<const ReportRow> rows) {
  struct Acc {
    double accuracy = 0.0, bleu = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, std::map<std::string, Acc>> by_mode;
  for (const auto& r : rows) {
    Acc& a = by_mode[r.mode][r.language_tag];
    a.accuracy += 100.0 * r.accuracy;
    a.bleu += r.bleu_1best;
    ++a.n;
  }
  json modes = json::object();
  for (const auto& [mode, langs] : by_mode) {
    json per_lang = json::object();
    std::vector<double> accs, bleus;
    for (const auto& [tag, a] : langs) {
      const double acc = a.accuracy / static_cast<double>(a.n);
      const double bleu = a.bleu / static_cast<double>(a.n);
      per_lang[tag] = {{"accuracy", acc}, {"bleu_1best", bleu}, {"seeds", a.n}};
      accs.push_back(acc);
      bleus.push_back(bleu);
    }
    const double macro_acc = MacroAverage(std::span<const double>(accs));
    const double macro_bleu = MacroAverage(std::span<const double>(bleus));
    modes[mode] = {{"languages", per_lang},
                   {"macro_accuracy", macro_acc},
                   {"macro_accuracy_display", FormatForDisplay(macro_acc)},
                   {"macro_bleu_1best", macro_bleu},
                   {"macro_bleu_1best_display", FormatForDisplay(macro_bleu)}};
  }
  return json{{"modes", modes}};
}

}  // namespace latrans
