#include "latrans/mrt.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "latrans/errors.h"
#include "latrans/format.h"
#include "latrans/math_util.h"
#include "latrans/rng.h"

namespace latrans {

std::vector<double> MrtWeights(std::span<const double> log_scores) {
  return NormalizeLogWeights(log_scores);
}

double Reward(const LinearTextClassifier& clf, std::span<const Sequence> member_segments,
              int gold) {
  if (gold < 0 || gold >= clf.num_labels()) {
    throw InvalidInputError("gold label outside classifier range");
  }
  const double p = clf.PredictSegments(member_segments).probs[gold];
  return p > 0.0 ? std::max(std::log(p), kLogZero) : kLogZero;
}

std::string PriorCenterName(PriorCenter c) {
  return c == PriorCenter::kZero ? "zero" : "initialization";
}

PriorCenter ParsePriorCenter(const std::string& name) {
  if (name == "zero") return PriorCenter::kZero;
  if (name == "initialization") return PriorCenter::kInitialization;
  throw InvalidInputError("unknown prior center '" + name + "'");
}

namespace {

std::vector<TranslationSampleSet> Rescored(const ConditionalSeqModel& model,
                                           std::span<const TranslationSampleSet> sets) {
  std::vector<TranslationSampleSet> out(sets.begin(), sets.end());
  for (auto& set : out) {
    for (auto& s : set.samples) s.log_score = model.LogScore(set.source, s.tokens);
  }
  return out;
}

// Members, their rewards and risk weights for one item. `skipped` is set when
// a reward is a structural zero.
struct ItemRisk {
  std::vector<EnsembleMember> members;
  std::vector<double> rewards;
  std::vector<double> weights;
  bool skipped = false;
};

ItemRisk EvaluateItem(const LinearTextClassifier& clf,
                      std::span<const TranslationSampleSet> sets, int gold,
                      SegmentCombination combine) {
  if (gold < 0 || gold >= clf.num_labels()) {
    throw InvalidInputError("gold label outside classifier range");
  }
  ItemRisk risk;
  risk.members = BuildMembers(sets, combine, clf.vocab());
  std::vector<double> scores;
  for (const auto& m : risk.members) {
    const double p = clf.Predict(m.input).probs[gold];
    const double r = p > 0.0 ? std::max(std::log(p), kLogZero) : kLogZero;
    if (IsLogZero(r)) risk.skipped = true;
    risk.rewards.push_back(r);
    scores.push_back(m.log_score);
  }
  risk.weights = MrtWeights(scores);
  return risk;
}

MrtLoss AccumulateLoss(const LinearTextClassifier& clf,
                       std::span<const std::vector<TranslationSampleSet>> sets,
                       std::span<const MrtBatchItem> batch, SegmentCombination combine) {
  if (batch.empty()) throw InvalidInputError("MRT loss over an empty batch");
  MrtLoss loss;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto risk = EvaluateItem(clf, sets[i], batch[i].gold, combine);
    if (risk.skipped) {
      ++loss.skipped_items;
      continue;
    }
    for (std::size_t j = 0; j < risk.members.size(); ++j) {
      loss.value -= risk.weights[j] * risk.rewards[j];
    }
  }
  return loss;
}

double PenaltyTerm(const ParameterVector& params, const ParameterVector* center,
                   double lambda) {
  if (lambda == 0.0) return 0.0;
  if (center == nullptr) return 0.5 * lambda * params.SquaredNorm();
  ParameterVector diff = params;
  diff.Axpy(-1.0, *center);
  return 0.5 * lambda * diff.SquaredNorm();
}

}  // namespace

MrtLoss ComputeMrtLoss(const LinearTextClassifier& clf, std::span<const MrtBatchItem> batch,
                       SegmentCombination combine) {
  std::vector<std::vector<TranslationSampleSet>> sets;
  sets.reserve(batch.size());
  for (const auto& item : batch) sets.push_back(item.segment_samples);
  return AccumulateLoss(clf, sets, batch, combine);
}

MrtLoss ComputeMrtLoss(const ConditionalSeqModel& model, const LinearTextClassifier& clf,
                       std::span<const MrtBatchItem> batch, SegmentCombination combine) {
  std::vector<std::vector<TranslationSampleSet>> sets;
  sets.reserve(batch.size());
  for (const auto& item : batch) sets.push_back(Rescored(model, item.segment_samples));
  return AccumulateLoss(clf, sets, batch, combine);
}

ParameterVector MrtGradient(const ConditionalSeqModel& model,
                            const LinearTextClassifier& clf,
                            std::span<const MrtBatchItem> batch, SegmentCombination combine,
                            std::size_t* skipped_items) {
  if (batch.empty()) throw InvalidInputError("MRT gradient over an empty batch");
  ParameterVector grad = model.params().ZerosLike();
  std::size_t skipped = 0;
  for (const auto& item : batch) {
    const auto sets = Rescored(model, item.segment_samples);
    const auto risk = EvaluateItem(clf, sets, item.gold, combine);
    if (risk.skipped) {
      ++skipped;
      continue;
    }
    // Expected reward, measured from the first reward so that a constant
    // reward gives an exactly zero advantage.
    const double anchor = risk.rewards.front();
    double baseline = 0.0;
    for (std::size_t j = 0; j < risk.members.size(); ++j) {
      baseline += risk.weights[j] * (risk.rewards[j] - anchor);
    }
    // Coefficient per (segment, sample); a sample may appear in several
    // members under the cross-product combination.
    std::map<std::pair<std::size_t, std::size_t>, double> coefficients;
    for (std::size_t j = 0; j < risk.members.size(); ++j) {
      const double c = -risk.weights[j] * ((risk.rewards[j] - anchor) - baseline);
      if (c == 0.0) continue;
      for (std::size_t s = 0; s < sets.size(); ++s) {
        coefficients[{s, risk.members[j].picks[s]}] += c;
      }
    }
    for (const auto& [key, c] : coefficients) {
      const auto& set = sets[key.first];
      grad.Axpy(c, model.GradLogScore(set.source, set.samples[key.second].tokens));
    }
  }
  if (skipped_items != nullptr) *skipped_items = skipped;
  return grad;
}

MapObjectiveTerms MapObjective(const LinearTextClassifier& clf,
                               const ConditionalSeqModel& model,
                               std::span<const MrtBatchItem> batch, const MapConfig& config,
                               const PriorCenters& centers) {
  if (batch.empty()) throw InvalidInputError("MAP objective over an empty batch");
  std::vector<EnsembleItem> items;
  items.reserve(batch.size());
  for (const auto& item : batch) {
    items.push_back({Rescored(model, item.segment_samples), item.gold});
  }
  MapObjectiveTerms terms;
  terms.classifier_loss = EnsembleNllLoss(clf, items, config.ensemble).value;
  const auto mrt = ComputeMrtLoss(model, clf, batch, config.ensemble.combine);
  terms.mrt_loss = mrt.value;
  terms.skipped_items = mrt.skipped_items;
  terms.theta_penalty = PenaltyTerm(clf.theta(), centers.theta, config.lambda);
  terms.phi_penalty = PenaltyTerm(model.params(), centers.phi, config.lambda);
  return terms;
}

std::vector<MrtBatchItem> DecodeBatch(const ConditionalSeqModel& model,
                                      std::span<const Example> examples,
                                      const MapConfig& config, std::uint64_t seed) {
  DecodeOptions options;
  options.mode = config.sampling;
  options.k = config.k;
  options.beam_width = config.beam_width;
  options.temperature = config.temperature;
  std::vector<MrtBatchItem> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    MrtBatchItem item;
    item.gold = examples[i].label;
    item.source_segments = examples[i].segments;
    item.segment_samples =
        DecodeSegments(model, examples[i].segments, options, MixSeed(seed, i));
    if (config.ensemble.combine == SegmentCombination::kByRank) {
      std::size_t k = SIZE_MAX;
      for (const auto& set : item.segment_samples) k = std::min(k, set.samples.size());
      for (auto& set : item.segment_samples) set.samples.resize(k);
    }
    out.push_back(std::move(item));
  }
  return out;
}

namespace {

TraceRow EvaluateTrace(const LinearTextClassifier& clf, const ConditionalSeqModel& model,
                       std::span<const Example> dev_set, const MapConfig& config,
                       const PriorCenters& centers, int epoch, std::uint64_t seed) {
  const auto batch = DecodeBatch(model, dev_set, config, seed);
  const auto terms = MapObjective(clf, model, batch, config, centers);
  if (std::isnan(terms.total())) {
    throw DomainError("few-shot objective diverged (NaN) at epoch " + std::to_string(epoch));
  }
  return {epoch, terms.total(), terms.classifier_loss, terms.mrt_loss, terms.skipped_items};
}

}  // namespace

FinetuneResult FewShotFinetune(const LinearTextClassifier& clf,
                               const ConditionalSeqModel& model,
                               std::span<const Example> dev_set, const MapConfig& config,
                               std::uint64_t seed) {
  if (dev_set.empty()) throw InvalidInputError("few-shot set is empty");
  if (config.batch_size < 1) throw InvalidInputError("batch size must be positive");
  FinetuneResult result{clf, model, {}};
  const ParameterVector theta0 = clf.theta();
  const ParameterVector phi0 = model.params();
  PriorCenters centers;
  if (config.prior_center == PriorCenter::kInitialization) {
    centers = {&theta0, &phi0};
  }

  OptimizerConfig clf_opt;
  clf_opt.kind = OptimizerKind::kAdam;
  clf_opt.step = config.clf_step;
  clf_opt.clip_norm = config.clip_norm;
  clf_opt.l2 = config.lambda;
  OptimizerConfig mt_opt;
  mt_opt.kind = OptimizerKind::kSgd;
  mt_opt.step = config.mt_step;
  mt_opt.clip_norm = config.clip_norm;
  mt_opt.l2 = config.lambda;
  Optimizer clf_optimizer(clf_opt, theta0.size());
  Optimizer mt_optimizer(mt_opt, phi0.size());

  const std::uint64_t eval_seed = MixSeed(seed, 0xe7a1);
  result.trace.push_back(
      EvaluateTrace(result.clf, result.model, dev_set, config, centers, 0, eval_seed));

  std::vector<std::size_t> order(dev_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Example> batch_examples;
  std::uint64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(MixSeed(seed, static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch_examples.clear();
      for (std::size_t i = start; i < end; ++i) batch_examples.push_back(dev_set[order[i]]);
      const double inv_b = 1.0 / static_cast<double>(batch_examples.size());

      const auto batch = DecodeBatch(result.model, batch_examples, config,
                                     MixSeed(seed, 0x5eed0000 + step++));
      std::vector<EnsembleItem> items;
      items.reserve(batch.size());
      for (const auto& item : batch) items.push_back({item.segment_samples, item.gold});

      ParameterVector theta_grad;
      EnsembleNllLoss(result.clf, items, config.ensemble, &theta_grad);
      theta_grad.Scale(inv_b);

      if (config.update_translator) {
        ParameterVector phi_grad =
            MrtGradient(result.model, result.clf, batch, config.ensemble.combine);
        phi_grad.Scale(inv_b);
        ParameterVector phi = result.model.params();
        mt_optimizer.Step(phi, std::move(phi_grad), centers.phi);
        if (!phi.AllFinite()) throw DomainError("translator parameters diverged");
        clf_optimizer.Step(result.clf.mutable_theta(), std::move(theta_grad), centers.theta);
        result.model.set_params(std::move(phi));
      } else {
        clf_optimizer.Step(result.clf.mutable_theta(), std::move(theta_grad), centers.theta);
      }
      if (!result.clf.theta().AllFinite()) throw DomainError("classifier parameters diverged");
    }
    result.trace.push_back(
        EvaluateTrace(result.clf, result.model, dev_set, config, centers, epoch, eval_seed));
  }
  return result;
}

void WriteTraceCsv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "epoch,objective,clf_loss,mrt_loss,skipped_items\n";
  for (const auto& row : trace) {
    out << row.epoch << ',' << FormatDouble(row.objective) << ','
        << FormatDouble(row.clf_loss) << ',' << FormatDouble(row.mrt_loss) << ','
        << row.skipped_items << '\n';
  }
}

double FiniteDifferenceCheck(const std::function<double(const ParameterVector&)>& fn,
                             const ParameterVector& analytic_grad,
                             const ParameterVector& params, double step,
                             std::size_t samples, std::uint64_t seed) {
  if (!(step > 0.0)) throw InvalidInputError("finite-difference step must be positive");
  if (!analytic_grad.SameLayout(params)) {
    throw InvalidInputError("gradient layout does not match the parameters");
  }
  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (samples < coords.size()) {
    Rng rng(seed);
    rng.Shuffle(coords);
    coords.resize(samples);
  }
  double worst = 0.0;
  ParameterVector probe = params;
  for (std::size_t i : coords) {
    // Divide by the step actually realized in floating point.
    const double hi = params[i] + step;
    const double lo = params[i] - step;
    probe[i] = hi;
    const double up = fn(probe);
    probe[i] = lo;
    const double down = fn(probe);
    probe[i] = params[i];
    const double fd = (up - down) / (hi - lo);
    const double an = analytic_grad[i];
    const double scale = std::max({std::abs(fd), std::abs(an), kFdRelativeFloor});
    worst = std::max(worst, std::abs(fd - an) / scale);
  }
  return worst;
}

}  // namespace latrans
