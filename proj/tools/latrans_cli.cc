// Command-line front end: data generation, training, evaluation and reports.
//
//   latrans gen-data --config cfg.json --out out/
//   latrans train-translator --config cfg.json --out out/
//   latrans train-classifier --config cfg.json --out out/
//   latrans eval-zero-shot --config cfg.json --out out/
//   latrans finetune-few-shot --config cfg.json --out out/ --mode few-shot+mrt
//   latrans sweep-k | rank-profile | bleu | report ...

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "latrans/bleu.h"
#include "latrans/checkpoint.h"
#include "latrans/errors.h"
#include "latrans/format.h"
#include "latrans/harness.h"

namespace fs = std::filesystem;
using namespace latrans;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> k;
  std::string sampling;
  std::string ensemble;
  std::optional<std::size_t> dev_subsample;
};

void AddCommonOptions(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "run a single seed instead of the configured list");
  cmd->add_option("--out", o.out, "output directory (overrides output_dir)");
  cmd->add_option("--k", o.k, "translation samples per segment")->check(CLI::PositiveNumber);
  cmd->add_option("--sampling", o.sampling, "kbest or stochastic")
      ->check(CLI::IsMember({"kbest", "stochastic"}));
  cmd->add_option("--ensemble", o.ensemble, "uniform or weighted")
      ->check(CLI::IsMember({"uniform", "weighted"}));
  cmd->add_option("--dev-subsample", o.dev_subsample,
                  "few-shot examples per run (0 = full dev split)");
}

ExperimentConfig ResolveConfig(const CommonOptions& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfigFromJson(nlohmann::json::object())
                                             : LoadExperimentConfig(o.config_path);
  if (o.seed) c.seeds = {*o.seed};
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.k) c.k = *o.k;
  if (!o.sampling.empty()) c.sampling = ParseSampleMode(o.sampling);
  if (!o.ensemble.empty()) c.ensemble.weighting = ParseWeighting(o.ensemble);
  if (o.dev_subsample) c.dev_subsample = *o.dev_subsample;
  c.Validate();
  return c;
}

// (tag, seed) pairs in the order reports are assembled.
std::vector<std::pair<std::string, std::uint64_t>> RunKeys(const ExperimentConfig& c) {
  std::vector<std::string> tags;
  if (c.bundle_path) {
    tags.push_back(LoadBundle(*c.bundle_path).options.target_lang);
  } else {
    for (const auto& lang : c.languages) tags.push_back(lang.tag);
  }
  std::vector<std::pair<std::string, std::uint64_t>> keys;
  for (const auto& tag : tags)
    for (std::uint64_t seed : c.seeds) keys.emplace_back(tag, seed);
  return keys;
}

const LanguageSpec& FindLanguage(const ExperimentConfig& c, const std::string& tag) {
  static const LanguageSpec kBundleLanguage;
  if (c.bundle_path) return kBundleLanguage;
  for (const auto& lang : c.languages)
    if (lang.tag == tag) return lang;
  throw InvalidInputError("unknown language tag " + tag);
}

std::vector<LanguageRun> LoadRuns(const ExperimentConfig& c) {
  std::vector<LanguageRun> runs;
  for (const auto& [tag, seed] : RunKeys(c)) runs.push_back(LoadRun(c.output_dir, tag, seed));
  return runs;
}

TaskBundle LoadRunBundle(const ExperimentConfig& c, const std::string& tag, std::uint64_t seed) {
  const fs::path dir = RunDirectory(c.output_dir, tag, seed);
  if (!fs::exists(dir / "bundle.json")) {
    throw InvalidInputError("missing task bundle " + (dir / "bundle.json").string() +
                            "; run gen-data first");
  }
  return LoadBundle(dir);
}

std::ofstream OpenOutput(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  return out;
}

void Announce(const fs::path& path) { std::cout << "wrote " << path.string() << '\n'; }

void GenData(const ExperimentConfig& c) {
  for (const auto& [tag, seed] : RunKeys(c)) {
    const fs::path dir = RunDirectory(c.output_dir, tag, seed);
    SaveBundle(dir, BuildBundle(c, FindLanguage(c, tag), seed));
    Announce(dir / "bundle.json");
  }
}

void TrainTranslatorCmd(const ExperimentConfig& c) {
  for (const auto& [tag, seed] : RunKeys(c)) {
    const auto bundle = LoadRunBundle(c, tag, seed);
    const fs::path path = RunDirectory(c.output_dir, tag, seed) / "translator.json";
    SaveTranslator(path, TrainTaskTranslator(c, bundle));
    Announce(path);
  }
}

void TrainClassifierCmd(const ExperimentConfig& c) {
  for (const auto& [tag, seed] : RunKeys(c)) {
    const auto bundle = LoadRunBundle(c, tag, seed);
    const fs::path path = RunDirectory(c.output_dir, tag, seed) / "classifier.json";
    SaveClassifier(path, TrainTaskClassifier(c, bundle, seed));
    Announce(path);
  }
}

void WriteRows(const fs::path& path, const std::vector<ReportRow>& rows) {
  auto out = OpenOutput(path);
  WriteReportCsv(out, rows);
  Announce(path);
}

std::string FileSafe(std::string name) {
  std::replace(name.begin(), name.end(), '+', '_');
  return name;
}

void EvalZeroShot(ExperimentConfig c) {
  c.mode = RunMode::kZeroShot;
  const auto runs = LoadRuns(c);
  const auto rows = RunZeroShot(c, runs);
  for (const auto& r : rows) {
    std::cout << r.language_tag << " seed " << r.seed << ": accuracy " << FormatFixed(r.accuracy, 4)
              << ", 1-best BLEU " << FormatFixed(r.bleu_1best, 2) << '\n';
  }
  WriteRows(c.output_dir / "rows-zero-shot.csv", rows);
}

void FinetuneFewShot(ExperimentConfig c, const std::string& mode) {
  if (!mode.empty()) {
    c.mode = ParseRunMode(mode);
  } else if (c.mode == RunMode::kZeroShot) {
    c.mode = RunMode::kFewShotMrt;
  }
  if (c.mode == RunMode::kZeroShot) {
    throw InvalidInputError("finetune-few-shot needs mode few-shot or few-shot+mrt");
  }
  const auto runs = LoadRuns(c);
  const auto outcome = RunFewShot(c, runs);
  const std::string suffix = FileSafe(RunModeName(c.mode));
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path dir = RunDirectory(c.output_dir, runs[i].tag, runs[i].seed);
    const auto& result = outcome.results[i];
    auto trace = OpenOutput(dir / ("trace-" + suffix + ".csv"));
    WriteTraceCsv(trace, result.trace);
    SaveClassifier(dir / ("classifier-" + suffix + ".json"), result.clf);
    SaveTranslator(dir / ("translator-" + suffix + ".json"), result.model);
    const auto& r = outcome.rows[i];
    std::cout << r.language_tag << " seed " << r.seed << ": accuracy " << FormatFixed(r.accuracy, 4)
              << ", 1-best BLEU " << FormatFixed(r.bleu_1best, 2) << '\n';
  }
  WriteRows(c.output_dir / ("rows-" + suffix + ".csv"), outcome.rows);
}

void SweepKCmd(const ExperimentConfig& c, bool sampling_given) {
  const auto runs = LoadRuns(c);
  std::vector<SampleMode> modes = {SampleMode::kKBest, SampleMode::kStochastic};
  if (sampling_given) modes = {c.sampling};
  const auto rows = SweepK(c, runs, c.k_values, modes);
  const fs::path path = c.output_dir / "sweep_k.csv";
  auto out = OpenOutput(path);
  WriteSweepCsv(out, rows);
  Announce(path);
}

void RankProfileCmd(const ExperimentConfig& c) {
  const auto rows = RankProfile(c, LoadRuns(c));
  const fs::path path = c.output_dir / "rank_profile.csv";
  auto out = OpenOutput(path);
  WriteRankCsv(out, rows);
  Announce(path);
}

// One whitespace-tokenized sentence per line; tokens share one id space.
std::vector<Sequence> ReadTokenized(const fs::path& path, std::map<std::string, TokenId>& ids) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read " + path.string());
  std::vector<Sequence> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    Sequence seq;
    std::string w;
    while (words >> w) {
      auto [it, inserted] = ids.emplace(w, static_cast<TokenId>(ids.size()));
      seq.push_back(it->second);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void BleuCmd(const ExperimentConfig* c, const std::string& hyp, const std::string& ref) {
  if (!hyp.empty() || !ref.empty()) {
    if (hyp.empty() || ref.empty()) throw InvalidInputError("--hyp and --ref go together");
    std::map<std::string, TokenId> ids;
    const auto h = ReadTokenized(hyp, ids);
    const auto r = ReadTokenized(ref, ids);
    std::cout << FormatFixed(CorpusBleu(h, r), 2) << '\n';
    return;
  }
  const auto rows = BleuVsGain(*c, LoadRuns(*c));
  const fs::path path = c->output_dir / "bleu_vs_gain.csv";
  auto out = OpenOutput(path);
  WriteBleuGainCsv(out, rows);
  Announce(path);
}

void ReportCmd(const ExperimentConfig& c, std::vector<std::string> inputs) {
  if (inputs.empty()) {
    for (const char* mode : {"zero-shot", "few-shot", "few-shot+mrt"}) {
      const fs::path p = c.output_dir / ("rows-" + FileSafe(mode) + ".csv");
      if (fs::exists(p)) inputs.push_back(p.string());
    }
  }
  if (inputs.empty()) {
    throw InvalidInputError("no row files under " + c.output_dir.string() +
                            "; run eval-zero-shot or finetune-few-shot first");
  }
  std::vector<ReportRow> rows;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot read " + path);
    const auto part = ReadReportCsv(in);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  // Deterministic merge: mode, then language in first-seen order, then seed.
  std::map<std::string, std::size_t> lang_order;
  for (const auto& r : rows) lang_order.emplace(r.language_tag, lang_order.size());
  std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow& a, const ReportRow& b) {
    const int ma = static_cast<int>(ParseRunMode(a.mode));
    const int mb = static_cast<int>(ParseRunMode(b.mode));
    if (ma != mb) return ma < mb;
    const auto la = lang_order.at(a.language_tag), lb = lang_order.at(b.language_tag);
    if (la != lb) return la < lb;
    return a.seed < b.seed;
  });
  WriteRows(c.output_dir / "report.csv", rows);
  const fs::path summary_path = c.output_dir / "summary.json";
  auto summary = OpenOutput(summary_path);
  summary << SummarizeReport(rows).dump(2) << '\n';
  Announce(summary_path);
  for (const auto& [mode, block] : SummarizeReport(rows).at("modes").items()) {
    std::cout << mode << ": macro accuracy " << block.at("macro_accuracy_display").get<std::string>()
              << ", macro BLEU " << block.at("macro_bleu_1best_display").get<std::string>() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent-translation experiments on synthetic cipher languages"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    AddCommonOptions(cmd, common);
    return cmd;
  };
  auto* gen = add("gen-data", "generate task bundles for every language and seed");
  auto* train_mt = add("train-translator", "fit translators on the parallel corpora");
  auto* train_clf = add("train-classifier", "train source-language classifiers");
  auto* zero = add("eval-zero-shot", "translate-test evaluation without target supervision");
  auto* few = add("finetune-few-shot", "fine-tune on the target dev split, then evaluate");
  std::string mode;
  few->add_option("--mode", mode, "few-shot or few-shot+mrt (default: config mode)")
      ->check(CLI::IsMember({"few-shot", "few-shot+mrt"}));
  auto* sweep = add("sweep-k", "accuracy for every k in k_values and sampling mode");
  auto* rank = add("rank-profile", "accuracy using only the rank-r translation");
  auto* bleu = add("bleu", "corpus BLEU of two files, or the BLEU-vs-gain table");
  std::string hyp, ref;
  bleu->add_option("--hyp", hyp, "hypothesis file, one tokenized sentence per line");
  bleu->add_option("--ref", ref, "reference file, one tokenized sentence per line");
  auto* report = add("report", "merge row files into report.csv and summary.json");
  std::vector<std::string> inputs;
  report->add_option("--rows", inputs, "row CSV files (default: rows-*.csv under --out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bleu->parsed() && !hyp.empty() && !ref.empty()) {
      BleuCmd(nullptr, hyp, ref);
      return 0;
    }
    const ExperimentConfig config = ResolveConfig(common);
    if (gen->parsed()) GenData(config);
    if (train_mt->parsed()) TrainTranslatorCmd(config);
    if (train_clf->parsed()) TrainClassifierCmd(config);
    if (zero->parsed()) EvalZeroShot(config);
    if (few->parsed()) FinetuneFewShot(config, mode);
    if (sweep->parsed()) SweepKCmd(config, !common.sampling.empty());
    if (rank->parsed()) RankProfileCmd(config);
    if (bleu->parsed()) BleuCmd(&config, hyp, ref);
    if (report->parsed()) ReportCmd(config, inputs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
