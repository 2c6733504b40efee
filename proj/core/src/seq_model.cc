#include "latrans/seq_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latrans/errors.h"
#include "latrans/math_util.h"
#include "latrans/rng.h"

namespace latrans {

std::string ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLexicalChannel:
      return "lexical_channel";
  }
  return "unknown";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "lexical_channel") return ModelKind::kLexicalChannel;
  throw InvalidInputError("unknown translator kind '" + name + "'");
}

bool BetterCandidate(double score_a, const Sequence& a, double score_b,
                     const Sequence& b) {
  if (score_a != score_b) return score_a > score_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

ConditionalSeqModel::ConditionalSeqModel(ModelKind kind, Vocabulary input_vocab,
                                         Vocabulary output_vocab,
                                         ParameterVector params)
    : kind_(kind),
      input_vocab_(std::move(input_vocab)),
      output_vocab_(std::move(output_vocab)),
      params_(std::move(params)) {}

ConditionalSeqModel ConditionalSeqModel::LexicalChannel(Vocabulary input_vocab,
                                                        Vocabulary output_vocab,
                                                        std::vector<double> logits) {
  const std::size_t n = input_vocab.size() * output_vocab.size();
  if (logits.empty()) logits.assign(n, 0.0);
  if (logits.size() != n) {
    throw InvalidInputError("lexical channel expects " + std::to_string(n) +
                            " logits, got " + std::to_string(logits.size()));
  }
  ParameterVector params({{kEmissionSlice, 0, n}}, std::move(logits));
  return ConditionalSeqModel(ModelKind::kLexicalChannel, std::move(input_vocab),
                             std::move(output_vocab), std::move(params));
}

void ConditionalSeqModel::set_params(ParameterVector params) {
  if (!params.SameLayout(params_)) {
    throw InvalidInputError("translator parameter layout mismatch");
  }
  if (!params.AllFinite()) throw InvalidInputError("non-finite translator parameters");
  params_ = std::move(params);
}

double ConditionalSeqModel::emission_logit(TokenId in, TokenId out) const {
  if (!input_vocab_.Contains(in) || !output_vocab_.Contains(out)) {
    throw InvalidInputError("emission index outside vocabulary");
  }
  return params_[LogitIndex(in, out)];
}

void ConditionalSeqModel::set_emission_logit(TokenId in, TokenId out, double value) {
  if (!input_vocab_.Contains(in) || !output_vocab_.Contains(out)) {
    throw InvalidInputError("emission index outside vocabulary");
  }
  if (!std::isfinite(value)) throw InvalidInputError("non-finite emission logit");
  params_[LogitIndex(in, out)] = value;
}

std::vector<double> ConditionalSeqModel::EmissionLogProbs(TokenId in) const {
  if (!input_vocab_.Contains(in)) throw InvalidInputError("input token outside vocabulary");
  const std::size_t width = output_vocab_.size();
  auto row = params_.values().subspan(LogitIndex(in, 0), width);
  std::vector<double> out(row.begin(), row.end());
  LogSoftmaxInPlace(out);
  return out;
}

void ConditionalSeqModel::CheckInput(const Sequence& x) const {
  if (!input_vocab_.ContainsAll(x)) {
    throw InvalidInputError("source sequence has ids outside the input vocabulary");
  }
}

std::vector<std::vector<double>> ConditionalSeqModel::PositionLogProbs(
    const Sequence& x) const {
  CheckInput(x);
  std::vector<std::vector<double>> rows;
  rows.reserve(x.size());
  for (TokenId in : x) rows.push_back(EmissionLogProbs(in));
  return rows;
}

double ConditionalSeqModel::LogScore(const Sequence& x, const Sequence& h) const {
  CheckInput(x);
  if (!output_vocab_.ContainsAll(h)) {
    throw InvalidInputError("translation has ids outside the output vocabulary");
  }
  if (h.size() != x.size()) return kLogZero;
  double score = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double lp = EmissionLogProbs(x[t])[h[t]];
    if (IsLogZero(lp)) return kLogZero;
    score += lp;
  }
  return std::max(score, kLogZero);
}

ParameterVector ConditionalSeqModel::GradLogScore(const Sequence& x,
                                                  const Sequence& h) const {
  if (IsLogZero(LogScore(x, h))) {
    throw DomainError("gradient of a zero-probability translation is undefined");
  }
  ParameterVector grad = params_.ZerosLike();
  const std::size_t width = output_vocab_.size();
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto logp = EmissionLogProbs(x[t]);
    const std::size_t base = LogitIndex(x[t], 0);
    for (std::size_t v = 0; v < width; ++v) grad[base + v] -= std::exp(logp[v]);
    grad[base + h[t]] += 1.0;
  }
  return grad;
}

namespace {

struct Partial {
  Sequence tokens;
  double score;
};

void SortBestFirst(std::vector<Partial>& items, std::size_t keep) {
  auto better = [](const Partial& a, const Partial& b) {
    return BetterCandidate(a.score, a.tokens, b.score, b.tokens);
  };
  if (keep < items.size()) {
    std::partial_sort(items.begin(), items.begin() + keep, items.end(), better);
    items.resize(keep);
  } else {
    std::sort(items.begin(), items.end(), better);
  }
}

}  // namespace

std::vector<ScoredTranslation> ConditionalSeqModel::BeamSearchKBest(
    const Sequence& x, std::size_t k, std::size_t beam_width) const {
  if (k < 1) throw InvalidInputError("k must be at least 1");
  if (beam_width < k) throw InvalidInputError("beam width must be at least k");
  const auto rows = PositionLogProbs(x);

  std::vector<Partial> beam = {{{}, 0.0}};
  for (const auto& logp : rows) {
    std::vector<Partial> expanded;
    expanded.reserve(beam.size() * logp.size());
    for (const auto& hyp : beam) {
      for (std::size_t v = 0; v < logp.size(); ++v) {
        if (IsLogZero(logp[v])) continue;
        Partial next{hyp.tokens, hyp.score + logp[v]};
        next.tokens.push_back(static_cast<TokenId>(v));
        expanded.push_back(std::move(next));
      }
    }
    SortBestFirst(expanded, beam_width);
    beam = std::move(expanded);
    if (beam.empty()) break;
  }

  std::vector<ScoredTranslation> out;
  const std::size_t n = std::min(k, beam.size());
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({std::move(beam[i].tokens), std::max(beam[i].score, kLogZero),
                   static_cast<int>(i + 1)});
  }
  return out;
}

std::vector<ScoredTranslation> ConditionalSeqModel::Sample(const Sequence& x,
                                                           std::size_t k,
                                                           double temperature,
                                                           std::uint64_t seed) const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidInputError("temperature must be positive and finite");
  }
  const auto rows = PositionLogProbs(x);
  const std::size_t width = output_vocab_.size();

  // Per-position sampling weights at the requested temperature.
  std::vector<std::vector<double>> weights(rows.size(), std::vector<double>(width, 0.0));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    auto logits = params_.values().subspan(LogitIndex(x[t], 0), width);
    double max_scaled = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < width; ++v) {
      if (!IsLogZero(rows[t][v])) max_scaled = std::max(max_scaled, logits[v] / temperature);
    }
    for (std::size_t v = 0; v < width; ++v) {
      if (!IsLogZero(rows[t][v])) {
        weights[t][v] = std::exp(logits[v] / temperature - max_scaled);
      }
    }
  }

  Rng rng(seed);
  std::vector<ScoredTranslation> out;
  out.reserve(k);
  for (std::size_t s = 0; s < k; ++s) {
    ScoredTranslation sample;
    double score = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const auto v = rng.Categorical(weights[t]);
      sample.tokens.push_back(static_cast<TokenId>(v));
      score += rows[t][v];
    }
    sample.log_score = std::max(score, kLogZero);
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<SupportEntry> ConditionalSeqModel::EnumerateSupport(
    const Sequence& x, std::size_t max_len, std::size_t budget) const {
  double total = 1.0;
  for (std::size_t i = 0; i < max_len; ++i) {
    total *= static_cast<double>(output_vocab_.size());
    if (total > static_cast<double>(budget)) {
      throw ResourceError("enumerating " + std::to_string(output_vocab_.size()) + "^" +
                          std::to_string(max_len) + " sequences exceeds the budget of " +
                          std::to_string(budget));
    }
  }
  const auto rows = PositionLogProbs(x);
  if (x.size() > max_len) return {};

  std::vector<Partial> layer = {{{}, 0.0}};
  for (const auto& logp : rows) {
    std::vector<Partial> next;
    for (const auto& p : layer) {
      for (std::size_t v = 0; v < logp.size(); ++v) {
        if (IsLogZero(logp[v])) continue;
        Partial q{p.tokens, p.score + logp[v]};
        q.tokens.push_back(static_cast<TokenId>(v));
        next.push_back(std::move(q));
      }
    }
    layer = std::move(next);
  }
  SortBestFirst(layer, layer.size());

  std::vector<SupportEntry> out;
  out.reserve(layer.size());
  for (auto& p : layer) out.push_back({std::move(p.tokens), p.score});
  return out;
}

}  // namespace latrans
