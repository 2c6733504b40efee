#include "latrans/ensemble.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "latrans/errors.h"
#include "latrans/math_util.h"
#include "latrans/rng.h"

namespace latrans {

std::string SampleModeName(SampleMode mode) {
  return mode == SampleMode::kKBest ? "kbest" : "stochastic";
}

SampleMode ParseSampleMode(const std::string& name) {
  if (name == "kbest") return SampleMode::kKBest;
  if (name == "stochastic") return SampleMode::kStochastic;
  throw InvalidInputError("unknown sampling mode '" + name + "'");
}

std::string WeightingName(Weighting w) {
  return w == Weighting::kUniform ? "uniform" : "weighted";
}

Weighting ParseWeighting(const std::string& name) {
  if (name == "uniform") return Weighting::kUniform;
  if (name == "weighted") return Weighting::kScoreWeighted;
  throw InvalidInputError("unknown ensemble weighting '" + name + "'");
}

std::string CombinationName(SegmentCombination c) {
  return c == SegmentCombination::kByRank ? "by_rank" : "cross_product";
}

SegmentCombination ParseCombination(const std::string& name) {
  if (name == "by_rank") return SegmentCombination::kByRank;
  if (name == "cross_product") return SegmentCombination::kCrossProduct;
  throw InvalidInputError("unknown segment combination '" + name + "'");
}

void TranslationSampleSet::Validate() const {
  if (samples.empty()) throw InvalidInputError("translation sample set is empty");
  if (mode == SampleMode::kKBest) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].rank != static_cast<int>(i + 1)) {
        throw InvalidInputError("k-best sample set must carry ranks 1..k in order");
      }
    }
  }
}

TranslationSampleSet DecodeSegment(const ConditionalSeqModel& model, const Sequence& x,
                                   const DecodeOptions& options, std::uint64_t seed) {
  TranslationSampleSet set;
  set.source = x;
  set.mode = options.mode;
  if (options.mode == SampleMode::kKBest) {
    set.samples = model.BeamSearchKBest(x, options.k, std::max(options.k, options.beam_width));
  } else {
    set.samples = model.Sample(x, options.k, options.temperature, seed);
  }
  return set;
}

std::vector<TranslationSampleSet> DecodeSegments(const ConditionalSeqModel& model,
                                                 std::span<const Sequence> segments,
                                                 const DecodeOptions& options,
                                                 std::uint64_t seed) {
  std::vector<TranslationSampleSet> out;
  out.reserve(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    out.push_back(DecodeSegment(model, segments[s], options, MixSeed(seed, s)));
  }
  return out;
}

std::vector<EnsembleMember> BuildMembers(std::span<const TranslationSampleSet> segments,
                                         SegmentCombination combine,
                                         const Vocabulary& vocab) {
  if (segments.empty()) throw InvalidInputError("no segments to ensemble");
  for (const auto& s : segments) s.Validate();

  std::vector<std::vector<std::size_t>> tuples;
  if (combine == SegmentCombination::kByRank) {
    const std::size_t k = segments[0].samples.size();
    for (const auto& s : segments) {
      if (s.samples.size() != k) {
        throw InvalidInputError("by-rank combination needs equally sized sample sets");
      }
    }
    for (std::size_t j = 0; j < k; ++j) tuples.emplace_back(segments.size(), j);
  } else {
    std::vector<std::size_t> pick(segments.size(), 0);
    bool done = false;
    while (!done) {
      tuples.push_back(pick);
      done = true;
      for (std::size_t s = segments.size(); s-- > 0;) {
        if (++pick[s] < segments[s].samples.size()) {
          done = false;
          break;
        }
        pick[s] = 0;
      }
    }
  }

  std::vector<EnsembleMember> members;
  members.reserve(tuples.size());
  std::vector<const Sequence*> parts(segments.size());
  for (auto& tuple : tuples) {
    EnsembleMember m;
    double score = 0.0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const auto& sample = segments[s].samples[tuple[s]];
      parts[s] = &sample.tokens;
      score += sample.log_score;
    }
    m.input = ComposeInput(std::span<const Sequence* const>(parts), vocab);
    m.log_score = std::max(score, kLogZero);
    m.picks = std::move(tuple);
    members.push_back(std::move(m));
  }
  return members;
}

std::vector<double> MemberWeights(std::span<const EnsembleMember> members,
                                  Weighting weighting) {
  if (members.empty()) throw InvalidInputError("no ensemble members");
  if (weighting == Weighting::kUniform) {
    return std::vector<double>(members.size(), 1.0 / static_cast<double>(members.size()));
  }
  std::vector<double> scores;
  scores.reserve(members.size());
  for (const auto& m : members) scores.push_back(m.log_score);
  return NormalizeLogWeights(scores);
}

LabelDistribution EnsemblePredict(const LinearTextClassifier& clf,
                                  std::span<const TranslationSampleSet> segments,
                                  const EnsembleConfig& config) {
  const auto members = BuildMembers(segments, config.combine, clf.vocab());
  const auto weights = MemberWeights(members, config.weighting);
  LabelDistribution out{std::vector<double>(clf.num_labels(), 0.0)};
  for (std::size_t j = 0; j < members.size(); ++j) {
    const auto dist = clf.Predict(members[j].input);
    for (int c = 0; c < clf.num_labels(); ++c) out.probs[c] += weights[j] * dist.probs[c];
  }
  return out;
}

EnsembleLoss EnsembleNllLoss(const LinearTextClassifier& clf,
                             std::span<const EnsembleItem> batch,
                             const EnsembleConfig& config, ParameterVector* grad) {
  if (batch.empty()) throw InvalidInputError("ensemble loss over an empty batch");
  if (grad != nullptr) *grad = clf.theta().ZerosLike();
  EnsembleLoss loss;
  const int num_labels = clf.num_labels();
  std::vector<double> score_grad(num_labels);
  for (const auto& item : batch) {
    if (item.gold < 0 || item.gold >= num_labels) {
      throw InvalidInputError("gold label outside classifier range");
    }
    const auto members = BuildMembers(item.segments, config.combine, clf.vocab());
    const auto weights = MemberWeights(members, config.weighting);
    std::vector<SparseFeatures> features;
    std::vector<LabelDistribution> dists;
    features.reserve(members.size());
    dists.reserve(members.size());
    double gold_prob = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      features.push_back(clf.Features(members[j].input));
      dists.push_back(clf.PredictFeatures(features.back()));
      gold_prob += weights[j] * dists.back().probs[item.gold];
    }
    if (gold_prob <= 0.0) {
      ++loss.zero_gold_items;
      loss.value += -kLogZero;
      continue;
    }
    loss.value -= std::log(gold_prob);
    if (grad == nullptr) continue;
    for (std::size_t j = 0; j < members.size(); ++j) {
      const double share = weights[j] * dists[j].probs[item.gold] / gold_prob;
      if (share == 0.0) continue;
      for (int c = 0; c < num_labels; ++c) {
        score_grad[c] = -share * ((c == item.gold ? 1.0 : 0.0) - dists[j].probs[c]);
      }
      clf.AccumulateScoreGradient(features[j], score_grad, *grad);
    }
  }
  return loss;
}

LabelDistribution ExactMarginalPredict(const LinearTextClassifier& clf,
                                       const ConditionalSeqModel& model,
                                       std::span<const Sequence> segments,
                                       std::size_t max_len, std::size_t budget) {
  if (segments.empty()) throw InvalidInputError("no segments to marginalize");
  std::vector<std::vector<SupportEntry>> supports;
  double combos = 1.0;
  for (const auto& seg : segments) {
    supports.push_back(model.EnumerateSupport(seg, max_len, budget));
    if (supports.back().empty()) {
      throw InvalidInputError("segment has no translation of length <= max_len");
    }
    combos *= static_cast<double>(supports.back().size());
    if (combos > static_cast<double>(budget)) {
      throw ResourceError("product of translation supports exceeds the budget");
    }
  }

  LabelDistribution out{std::vector<double>(clf.num_labels(), 0.0)};
  double mass = 0.0;
  std::vector<std::size_t> pick(segments.size(), 0);
  std::vector<const Sequence*> parts(segments.size());
  while (true) {
    double log_prob = 0.0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      parts[s] = &supports[s][pick[s]].tokens;
      log_prob += supports[s][pick[s]].log_prob;
    }
    const double w = std::exp(log_prob);
    if (w > 0.0) {
      const auto dist = clf.Predict(ComposeInput(std::span<const Sequence* const>(parts),
                                                 clf.vocab()));
      for (int c = 0; c < clf.num_labels(); ++c) out.probs[c] += w * dist.probs[c];
      mass += w;
    }
    std::size_t s = segments.size();
    bool done = true;
    while (s > 0) {
      --s;
      if (++pick[s] < supports[s].size()) {
        done = false;
        break;
      }
      pick[s] = 0;
    }
    if (done) break;
  }
  for (double& p : out.probs) p /= mass;
  return out;
}

namespace {

using nlohmann::json;

json TokensToJson(const Sequence& seq, const Vocabulary& vocab) {
  json arr = json::array();
  for (TokenId t : seq) arr.push_back(vocab.token(t));
  return arr;
}

Sequence TokensFromJson(const json& arr, const Vocabulary& vocab) {
  Sequence out;
  for (const auto& t : arr) out.push_back(vocab.Id(t.get<std::string>()));
  return out;
}

}  // namespace

void WriteSampleSets(std::ostream& out, std::span<const TranslationSampleSet> sets,
                     const Vocabulary& input_vocab, const Vocabulary& output_vocab) {
  for (const auto& set : sets) {
    json samples = json::array();
    for (const auto& s : set.samples) {
      samples.push_back({{"tokens", TokensToJson(s.tokens, output_vocab)},
                         {"log_score", s.log_score},
                         {"rank", s.rank ? json(*s.rank) : json(nullptr)}});
    }
    json record = {{"source", TokensToJson(set.source, input_vocab)},
                   {"mode", SampleModeName(set.mode)},
                   {"samples", std::move(samples)}};
    out << record.dump() << '\n';
  }
}

std::vector<TranslationSampleSet> ReadSampleSets(std::istream& in,
                                                 const Vocabulary& input_vocab,
                                                 const Vocabulary& output_vocab) {
  std::vector<TranslationSampleSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json record = json::parse(line);
      TranslationSampleSet set;
      set.source = TokensFromJson(record.at("source"), input_vocab);
      set.mode = ParseSampleMode(record.at("mode").get<std::string>());
      for (const auto& s : record.at("samples")) {
        ScoredTranslation t;
        t.tokens = TokensFromJson(s.at("tokens"), output_vocab);
        t.log_score = s.at("log_score").get<double>();
        if (!s.at("rank").is_null()) t.rank = s.at("rank").get<int>();
        set.samples.push_back(std::move(t));
      }
      set.Validate();
      out.push_back(std::move(set));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const InvalidInputError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace latrans
