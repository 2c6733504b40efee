#include "latrans/tasks.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "latrans/errors.h"
#include "latrans/math_util.h"

namespace latrans {

using nlohmann::json;

std::string TaskShapeName(TaskShape shape) {
  switch (shape) {
    case TaskShape::kNli:
      return "nli";
    case TaskShape::kParaphrase:
      return "paraphrase";
    case TaskShape::kCopa:
      return "copa";
  }
  return "unknown";
}

TaskShape ParseTaskShape(const std::string& name) {
  if (name == "nli") return TaskShape::kNli;
  if (name == "paraphrase") return TaskShape::kParaphrase;
  if (name == "copa") return TaskShape::kCopa;
  throw InvalidInputError("unknown task shape '" + name + "'");
}

std::string LabelRuleName(LabelRule rule) {
  switch (rule) {
    case LabelRule::kKeywordOverlap:
      return "keyword_overlap";
    case LabelRule::kParity:
      return "parity";
    case LabelRule::kPairMatch:
      return "pair_match";
  }
  return "unknown";
}

LabelRule ParseLabelRule(const std::string& name) {
  if (name == "keyword_overlap") return LabelRule::kKeywordOverlap;
  if (name == "parity") return LabelRule::kParity;
  if (name == "pair_match") return LabelRule::kPairMatch;
  throw InvalidInputError("unknown label rule '" + name + "'");
}

int SegmentCount(TaskShape shape) { return shape == TaskShape::kCopa ? 3 : 2; }

int NumLabels(TaskShape shape) { return shape == TaskShape::kNli ? 3 : 2; }

CipherSpec CipherSpec::Identity(int size) {
  CipherSpec spec;
  spec.src_vocab_size = size;
  spec.tgt_vocab_size = size;
  spec.mapping.resize(size);
  std::iota(spec.mapping.begin(), spec.mapping.end(), 0);
  return spec;
}

CipherSpec CipherSpec::RandomPermutation(int size, std::uint64_t seed) {
  CipherSpec spec = Identity(size);
  Rng rng(seed);
  rng.Shuffle(spec.mapping);
  return spec;
}

void CipherSpec::Merge(int token, int onto) {
  if (token < 0 || token >= src_vocab_size || onto < 0 || onto >= src_vocab_size) {
    throw InvalidInputError("merge outside the source vocabulary");
  }
  mapping[token] = mapping[onto];
  for (int t : {token, onto}) {
    if (std::find(ambiguous_tokens.begin(), ambiguous_tokens.end(), t) ==
        ambiguous_tokens.end()) {
      ambiguous_tokens.push_back(t);
    }
  }
}

void CipherSpec::Validate() const {
  if (src_vocab_size < 1 || tgt_vocab_size < 1) {
    throw InvalidInputError("cipher vocabularies must be non-empty");
  }
  if (static_cast<int>(mapping.size()) != src_vocab_size) {
    throw InvalidInputError("cipher mapping must cover every source token");
  }
  for (int m : mapping) {
    if (m < 0 || m >= tgt_vocab_size) {
      throw InvalidInputError("cipher maps outside the target vocabulary");
    }
  }
  if (!(noise_eps >= 0.0 && noise_eps < 1.0)) {
    throw InvalidInputError("cipher noise must lie in [0, 1)");
  }
  for (int t : ambiguous_tokens) {
    if (t < 0 || t >= src_vocab_size) {
      throw InvalidInputError("ambiguous token outside the source vocabulary");
    }
  }
}

int RuleLabel(LabelRule rule, TaskShape shape, const GenerationOptions& options,
              const std::vector<Sequence>& segments) {
  if (static_cast<int>(segments.size()) != SegmentCount(shape)) {
    throw InvalidInputError("segment count does not match the task shape");
  }
  switch (rule) {
    case LabelRule::kParity: {
      const TokenId designated = ContentId(options.designated_token);
      int count = 0;
      for (const auto& seg : segments) {
        count += static_cast<int>(std::count(seg.begin(), seg.end(), designated));
      }
      return count % NumLabels(shape);
    }
    case LabelRule::kPairMatch: {
      const int overlap = MultisetOverlap(segments[0], segments[1]);
      if (shape == TaskShape::kParaphrase) return overlap >= options.match_threshold ? 1 : 0;
      if (shape == TaskShape::kNli) {
        if (overlap < options.nli_low) return 0;
        return overlap < options.nli_high ? 1 : 2;
      }
      throw InvalidInputError("pair-match applies to paraphrase and nli shapes");
    }
    case LabelRule::kKeywordOverlap: {
      if (shape != TaskShape::kCopa) {
        throw InvalidInputError("keyword-overlap applies to the copa shape");
      }
      const int first = MultisetOverlap(segments[0], segments[1]);
      const int second = MultisetOverlap(segments[0], segments[2]);
      if (first == second) return -1;
      return first > second ? 0 : 1;
    }
  }
  return -1;
}

Sequence ApplyCipher(const CipherSpec& cipher, const Sequence& source, Rng& rng) {
  Sequence out;
  out.reserve(source.size());
  for (TokenId t : source) {
    const int index = t - kFirstContentId;
    if (index < 0 || index >= cipher.src_vocab_size) {
      throw InvalidInputError("cipher input is not a source content token");
    }
    int mapped = cipher.mapping[index];
    if (cipher.noise_eps > 0.0 && rng.Bernoulli(cipher.noise_eps)) {
      mapped = static_cast<int>(rng.UniformIndex(cipher.tgt_vocab_size));
    }
    out.push_back(ContentId(mapped));
  }
  return out;
}

namespace {

constexpr int kPlantAttempts = 10000;
constexpr int kSplitAttempts = 100;

class Planter {
 public:
  Planter(TaskShape shape, LabelRule rule, const GenerationOptions& options,
          std::vector<double> weights)
      : shape_(shape), rule_(rule), options_(options), weights_(std::move(weights)) {}

  Sequence RandomSegment(Rng& rng, int length) const {
    Sequence seg(length);
    for (auto& t : seg) t = ContentId(static_cast<int>(rng.Categorical(weights_)));
    return seg;
  }

  // Segment of the configured length that copies `copies` tokens of `from`
  // (at distinct positions) and fills the rest randomly, in shuffled order.
  Sequence CopySegment(Rng& rng, const Sequence& from, int copies) const {
    std::vector<std::size_t> positions(from.size());
    std::iota(positions.begin(), positions.end(), 0);
    rng.Shuffle(positions);
    Sequence seg;
    for (int i = 0; i < copies; ++i) seg.push_back(from[positions[i]]);
    const Sequence fill = RandomSegment(rng, options_.segment_length - copies);
    seg.insert(seg.end(), fill.begin(), fill.end());
    rng.Shuffle(seg);
    return seg;
  }

  int RandomInRange(Rng& rng, int lo, int hi) const {
    lo = std::max(lo, 0);
    hi = std::min(hi, options_.segment_length);
    if (hi < lo) throw InvalidInputError("label rule thresholds exceed the segment length");
    return lo + static_cast<int>(rng.UniformIndex(static_cast<std::size_t>(hi - lo + 1)));
  }

  std::vector<Sequence> Propose(Rng& rng, int label) const {
    const int length = options_.segment_length;
    std::vector<Sequence> segments;
    switch (rule_) {
      case LabelRule::kParity:
        for (int s = 0; s < SegmentCount(shape_); ++s) {
          segments.push_back(RandomSegment(rng, length));
        }
        break;
      case LabelRule::kPairMatch: {
        int lo = 0, hi = length;
        if (shape_ == TaskShape::kParaphrase) {
          if (label == 1) lo = options_.match_threshold; else hi = options_.match_threshold - 1;
        } else {
          if (label == 0) hi = options_.nli_low - 1;
          if (label == 1) { lo = options_.nli_low; hi = options_.nli_high - 1; }
          if (label == 2) lo = options_.nli_high;
        }
        segments.push_back(RandomSegment(rng, length));
        segments.push_back(CopySegment(rng, segments[0], RandomInRange(rng, lo, hi)));
        break;
      }
      case LabelRule::kKeywordOverlap: {
        const int correct = RandomInRange(rng, 2, std::max(2, length / 2));
        const int wrong = RandomInRange(rng, 0, correct - 1);
        segments.push_back(RandomSegment(rng, length));
        Sequence right = CopySegment(rng, segments[0], correct);
        Sequence other = CopySegment(rng, segments[0], wrong);
        if (label == 0) {
          segments.push_back(std::move(right));
          segments.push_back(std::move(other));
        } else {
          segments.push_back(std::move(other));
          segments.push_back(std::move(right));
        }
        break;
      }
    }
    return segments;
  }

  Example Plant(Rng& rng, int label, const std::string& lang) const {
    for (int attempt = 0; attempt < kPlantAttempts; ++attempt) {
      auto segments = Propose(rng, label);
      if (RuleLabel(rule_, shape_, options_, segments) == label) {
        return Example{std::move(segments), label, lang};
      }
    }
    throw ResourceError("could not plant label " + std::to_string(label) + " with rule " +
                        LabelRuleName(rule_));
  }

 private:
  TaskShape shape_;
  LabelRule rule_;
  const GenerationOptions& options_;
  std::vector<double> weights_;
};

std::vector<Example> GenerateSplit(const Planter& planter, std::size_t n, int num_labels,
                                   const std::string& lang, std::uint64_t seed,
                                   const std::string& split_name) {
  for (int attempt = 0; attempt < kSplitAttempts; ++attempt) {
    Rng rng(MixSeed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % num_labels);
    rng.Shuffle(labels);
    std::vector<Example> out;
    out.reserve(n);
    for (int label : labels) out.push_back(planter.Plant(rng, label, lang));
    const bool constant =
        n > 1 && std::all_of(out.begin(), out.end(),
                             [&](const Example& e) { return e.label == out[0].label; });
    if (!constant) return out;
    std::cerr << "latrans: split '" << split_name << "' has a constant label, regenerating\n";
  }
  throw ResourceError("split '" + split_name + "' kept a constant label after " +
                      std::to_string(kSplitAttempts) + " attempts");
}

std::vector<Example> Encipher(const CipherSpec& cipher, const std::vector<Example>& source,
                              const std::string& lang, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> out;
  out.reserve(source.size());
  for (const auto& ex : source) {
    Example t{{}, ex.label, lang};
    for (const auto& seg : ex.segments) t.segments.push_back(ApplyCipher(cipher, seg, rng));
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<double> WeightsOrUniform(const std::vector<double>& weights, int size) {
  if (weights.empty()) return std::vector<double>(size, 1.0);
  if (static_cast<int>(weights.size()) != size) {
    throw InvalidInputError("token weights must cover the source vocabulary");
  }
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); }) ||
      std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) {
    throw InvalidInputError("token weights must be non-negative with a positive sum");
  }
  return weights;
}

}  // namespace

TaskBundle GenerateTask(TaskShape shape, const TaskSizes& sizes, const CipherSpec& cipher,
                        LabelRule rule, const GenerationOptions& options,
                        std::uint64_t seed) {
  cipher.Validate();
  if (sizes.train == 0 || sizes.dev == 0 || sizes.test == 0) {
    throw InvalidInputError("split sizes must be positive");
  }
  if (options.segment_length < 1) throw InvalidInputError("segment length must be positive");
  if (options.designated_token < 0 || options.designated_token >= cipher.src_vocab_size) {
    throw InvalidInputError("designated token outside the source vocabulary");
  }
  // Validates rule/shape compatibility up front.
  RuleLabel(rule, shape, options,
            std::vector<Sequence>(SegmentCount(shape), Sequence(options.segment_length,
                                                                ContentId(0))));

  TaskBundle b;
  b.shape = shape;
  b.rule = rule;
  b.num_labels = NumLabels(shape);
  b.seed = seed;
  b.cipher = cipher;
  b.options = options;
  b.source_vocab = Vocabulary::Synthetic("s", cipher.src_vocab_size);
  b.target_vocab = Vocabulary::Synthetic("t", cipher.tgt_vocab_size);

  const auto task_weights = WeightsOrUniform(options.token_weights, cipher.src_vocab_size);
  const Planter planter(shape, rule, options, task_weights);
  const std::string& src = options.source_lang;
  b.train_src = GenerateSplit(planter, sizes.train, b.num_labels, src, MixSeed(seed, 1), "train_src");
  b.dev_src = GenerateSplit(planter, sizes.dev, b.num_labels, src, MixSeed(seed, 2), "dev_src");
  b.dev_tgt_reference =
      GenerateSplit(planter, sizes.dev, b.num_labels, src, MixSeed(seed, 3), "dev_tgt");
  b.test_tgt_reference =
      GenerateSplit(planter, sizes.test, b.num_labels, src, MixSeed(seed, 4), "test_tgt");
  b.dev_tgt = Encipher(cipher, b.dev_tgt_reference, options.target_lang, MixSeed(seed, 6));
  b.test_tgt = Encipher(cipher, b.test_tgt_reference, options.target_lang, MixSeed(seed, 7));

  const auto parallel_weights = options.parallel_token_weights.empty()
                                    ? task_weights
                                    : WeightsOrUniform(options.parallel_token_weights,
                                                       cipher.src_vocab_size);
  Rng prng(MixSeed(seed, 5));
  Rng noise(MixSeed(seed, 8));
  b.parallel.reserve(sizes.parallel);
  for (std::size_t i = 0; i < sizes.parallel; ++i) {
    Sequence s(options.segment_length);
    for (auto& t : s) t = ContentId(static_cast<int>(prng.Categorical(parallel_weights)));
    Sequence t = ApplyCipher(cipher, s, noise);
    b.parallel.push_back({std::move(s), std::move(t)});
  }
  return b;
}

ConditionalSeqModel TrainTranslatorOnParallel(ConditionalSeqModel model,
                                              const std::vector<ParallelPair>& parallel,
                                              const TranslatorTrainConfig& config) {
  if (parallel.empty()) return model;
  const std::size_t width = model.output_vocab().size();
  const std::size_t rows = model.input_vocab().size();
  std::vector<std::vector<double>> counts(rows, std::vector<double>(width, 0.0));
  std::vector<double> totals(rows, 0.0);
  for (const auto& pair : parallel) {
    if (pair.source.size() != pair.target.size()) {
      throw InvalidInputError("parallel pair lengths differ; the lexical channel needs equal lengths");
    }
    if (!model.input_vocab().ContainsAll(pair.target) ||
        !model.output_vocab().ContainsAll(pair.source)) {
      throw InvalidInputError("parallel pair has ids outside the translator vocabularies");
    }
    for (std::size_t t = 0; t < pair.source.size(); ++t) {
      counts[pair.target[t]][pair.source[t]] += 1.0;
      totals[pair.target[t]] += 1.0;
    }
  }
  ParameterVector params = model.params();
  auto logits = params.mutable_values();
  std::vector<double> row(width);
  for (std::size_t a = 0; a < rows; ++a) {
    if (totals[a] == 0.0) continue;
    auto r = logits.subspan(a * width, width);
    for (int it = 0; it < config.iterations; ++it) {
      std::copy(r.begin(), r.end(), row.begin());
      LogSoftmaxInPlace(row);
      for (std::size_t v = 0; v < width; ++v) {
        r[v] += config.step * (counts[a][v] / totals[a] - std::exp(row[v]));
      }
    }
  }
  model.set_params(std::move(params));
  return model;
}

namespace {

json SequenceToJson(const Sequence& seq, const Vocabulary& vocab) {
  json arr = json::array();
  for (TokenId t : seq) arr.push_back(vocab.token(t));
  return arr;
}

Sequence SequenceFromJson(const json& arr, const Vocabulary& vocab) {
  if (!arr.is_array()) throw InvalidInputError("expected an array of tokens");
  Sequence out;
  for (const auto& t : arr) out.push_back(vocab.Id(t.get<std::string>()));
  return out;
}

template <typename Fn>
void ForEachJsonLine(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const InvalidInputError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  return out;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read " + path.string());
  return in;
}

}  // namespace

void SaveExamplesJsonl(std::ostream& out, const std::vector<Example>& examples,
                       const Vocabulary& vocab) {
  for (const auto& ex : examples) {
    json segments = json::array();
    for (const auto& seg : ex.segments) segments.push_back(SequenceToJson(seg, vocab));
    json record = {{"segments", std::move(segments)}, {"label", ex.label}, {"lang", ex.lang}};
    out << record.dump() << '\n';
  }
}

std::vector<Example> LoadExamplesJsonl(std::istream& in, TaskShape shape,
                                       const Vocabulary& vocab) {
  std::vector<Example> out;
  ForEachJsonLine(in, [&](const json& record) {
    if (!record.is_object()) throw InvalidInputError("record is not a JSON object");
    for (const char* key : {"segments", "label", "lang"}) {
      if (!record.contains(key)) {
        throw InvalidInputError(std::string("record is missing \"") + key + "\"");
      }
    }
    Example ex;
    for (const auto& seg : record.at("segments")) {
      ex.segments.push_back(SequenceFromJson(seg, vocab));
    }
    if (static_cast<int>(ex.segments.size()) != SegmentCount(shape)) {
      throw InvalidInputError("shape mismatch: " + TaskShapeName(shape) + " expects " +
                              std::to_string(SegmentCount(shape)) + " segments, got " +
                              std::to_string(ex.segments.size()));
    }
    ex.label = record.at("label").get<int>();
    if (ex.label < 0 || ex.label >= NumLabels(shape)) {
      throw InvalidInputError("label " + std::to_string(ex.label) + " outside the " +
                              TaskShapeName(shape) + " label range");
    }
    ex.lang = record.at("lang").get<std::string>();
    out.push_back(std::move(ex));
  });
  return out;
}

void SaveExamplesJsonl(const std::filesystem::path& path,
                       const std::vector<Example>& examples, const Vocabulary& vocab) {
  auto out = OpenForWrite(path);
  SaveExamplesJsonl(out, examples, vocab);
}

std::vector<Example> LoadExamplesJsonl(const std::filesystem::path& path, TaskShape shape,
                                       const Vocabulary& vocab) {
  auto in = OpenForRead(path);
  return LoadExamplesJsonl(in, shape, vocab);
}

void SaveParallelJsonl(std::ostream& out, const std::vector<ParallelPair>& pairs,
                       const Vocabulary& source_vocab, const Vocabulary& target_vocab) {
  for (const auto& p : pairs) {
    json record = {{"src", SequenceToJson(p.source, source_vocab)},
                   {"tgt", SequenceToJson(p.target, target_vocab)}};
    out << record.dump() << '\n';
  }
}

std::vector<ParallelPair> LoadParallelJsonl(std::istream& in, const Vocabulary& source_vocab,
                                            const Vocabulary& target_vocab) {
  std::vector<ParallelPair> out;
  ForEachJsonLine(in, [&](const json& record) {
    if (!record.is_object() || !record.contains("src") || !record.contains("tgt")) {
      throw InvalidInputError("parallel record needs \"src\" and \"tgt\"");
    }
    ParallelPair p{SequenceFromJson(record.at("src"), source_vocab),
                   SequenceFromJson(record.at("tgt"), target_vocab)};
    if (p.source.empty() || p.target.empty()) {
      throw InvalidInputError("parallel sides must be non-empty");
    }
    out.push_back(std::move(p));
  });
  return out;
}

namespace {

json CipherToJson(const CipherSpec& c) {
  return {{"src_vocab_size", c.src_vocab_size}, {"tgt_vocab_size", c.tgt_vocab_size},
          {"mapping", c.mapping},               {"noise_eps", c.noise_eps},
          {"ambiguous_tokens", c.ambiguous_tokens}};
}

CipherSpec CipherFromJson(const json& j) {
  CipherSpec c;
  c.src_vocab_size = j.at("src_vocab_size").get<int>();
  c.tgt_vocab_size = j.at("tgt_vocab_size").get<int>();
  c.mapping = j.at("mapping").get<std::vector<int>>();
  c.noise_eps = j.at("noise_eps").get<double>();
  c.ambiguous_tokens = j.value("ambiguous_tokens", std::vector<int>{});
  c.Validate();
  return c;
}

json OptionsToJson(const GenerationOptions& o) {
  return {{"segment_length", o.segment_length},
          {"token_weights", o.token_weights},
          {"parallel_token_weights", o.parallel_token_weights},
          {"designated_token", o.designated_token},
          {"match_threshold", o.match_threshold},
          {"nli_low", o.nli_low},
          {"nli_high", o.nli_high},
          {"source_lang", o.source_lang},
          {"target_lang", o.target_lang}};
}

GenerationOptions OptionsFromJson(const json& j) {
  GenerationOptions o;
  o.segment_length = j.value("segment_length", o.segment_length);
  o.token_weights = j.value("token_weights", o.token_weights);
  o.parallel_token_weights = j.value("parallel_token_weights", o.parallel_token_weights);
  o.designated_token = j.value("designated_token", o.designated_token);
  o.match_threshold = j.value("match_threshold", o.match_threshold);
  o.nli_low = j.value("nli_low", o.nli_low);
  o.nli_high = j.value("nli_high", o.nli_high);
  o.source_lang = j.value("source_lang", o.source_lang);
  o.target_lang = j.value("target_lang", o.target_lang);
  return o;
}

}  // namespace

void SaveBundle(const std::filesystem::path& dir, const TaskBundle& b) {
  std::filesystem::create_directories(dir);
  json meta = {{"shape", TaskShapeName(b.shape)},
               {"rule", LabelRuleName(b.rule)},
               {"num_labels", b.num_labels},
               {"seed", b.seed},
               {"cipher", CipherToJson(b.cipher)},
               {"options", OptionsToJson(b.options)},
               {"source_vocab", b.source_vocab.tokens()},
               {"target_vocab", b.target_vocab.tokens()}};
  OpenForWrite(dir / "bundle.json") << meta.dump(2) << '\n';
  SaveExamplesJsonl(dir / "train_src.jsonl", b.train_src, b.source_vocab);
  SaveExamplesJsonl(dir / "dev_src.jsonl", b.dev_src, b.source_vocab);
  SaveExamplesJsonl(dir / "dev_tgt.jsonl", b.dev_tgt, b.target_vocab);
  SaveExamplesJsonl(dir / "test_tgt.jsonl", b.test_tgt, b.target_vocab);
  SaveExamplesJsonl(dir / "dev_tgt_reference.jsonl", b.dev_tgt_reference, b.source_vocab);
  SaveExamplesJsonl(dir / "test_tgt_reference.jsonl", b.test_tgt_reference, b.source_vocab);
  auto out = OpenForWrite(dir / "parallel.jsonl");
  SaveParallelJsonl(out, b.parallel, b.source_vocab, b.target_vocab);
}

TaskBundle LoadBundle(const std::filesystem::path& dir) {
  json meta;
  try {
    meta = json::parse(OpenForRead(dir / "bundle.json"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bundle.json: ") + e.what(), 0);
  }
  TaskBundle b;
  try {
    b.shape = ParseTaskShape(meta.at("shape").get<std::string>());
    b.rule = ParseLabelRule(meta.at("rule").get<std::string>());
    b.num_labels = meta.at("num_labels").get<int>();
    b.seed = meta.at("seed").get<std::uint64_t>();
    b.cipher = CipherFromJson(meta.at("cipher"));
    b.options = OptionsFromJson(meta.at("options"));
    b.source_vocab =
        Vocabulary(meta.at("source_vocab").get<std::vector<std::string>>(), 0, 1);
    b.target_vocab =
        Vocabulary(meta.at("target_vocab").get<std::vector<std::string>>(), 0, 1);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bundle.json: ") + e.what(), 0);
  }
  b.train_src = LoadExamplesJsonl(dir / "train_src.jsonl", b.shape, b.source_vocab);
  b.dev_src = LoadExamplesJsonl(dir / "dev_src.jsonl", b.shape, b.source_vocab);
  b.dev_tgt = LoadExamplesJsonl(dir / "dev_tgt.jsonl", b.shape, b.target_vocab);
  b.test_tgt = LoadExamplesJsonl(dir / "test_tgt.jsonl", b.shape, b.target_vocab);
  b.dev_tgt_reference =
      LoadExamplesJsonl(dir / "dev_tgt_reference.jsonl", b.shape, b.source_vocab);
  b.test_tgt_reference =
      LoadExamplesJsonl(dir / "test_tgt_reference.jsonl", b.shape, b.source_vocab);
  auto in = OpenForRead(dir / "parallel.jsonl");
  b.parallel = LoadParallelJsonl(in, b.source_vocab, b.target_vocab);
  return b;
}

}  // namespace latrans
