#ifndef LATRANS_MRT_H_
#define LATRANS_MRT_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "latrans/classifier.h"
#include "latrans/dataset.h"
#include "latrans/ensemble.h"
#include "latrans/seq_model.h"

namespace latrans {

// One few-shot example with its decoded translations.
struct MrtBatchItem {
  std::vector<TranslationSampleSet> segment_samples;
  int gold = 0;
  std::vector<Sequence> source_segments;
};

// q_j = softmax(log_scores). Throws InvalidInputError when empty or when
// every score is a structural zero.
std::vector<double> MrtWeights(std::span<const double> log_scores);

// log p(gold | composed member) under the classifier; kLogZero when the
// probability underflows to zero.
double Reward(const LinearTextClassifier& clf, std::span<const Sequence> member_segments,
              int gold);

struct MrtLoss {
  double value = 0.0;
  // Items skipped because a member reward was a structural zero.
  std::size_t skipped_items = 0;
};

// sum_i sum_j q_ij * (-R(h_ij)) with q from the log-scores stored in the
// sample sets.
MrtLoss ComputeMrtLoss(const LinearTextClassifier& clf, std::span<const MrtBatchItem> batch,
                       SegmentCombination combine = SegmentCombination::kByRank);

// Same loss with the samples held fixed but their scores recomputed under
// `model`; this is the function MrtGradient differentiates.
MrtLoss ComputeMrtLoss(const ConditionalSeqModel& model, const LinearTextClassifier& clf,
                       std::span<const MrtBatchItem> batch,
                       SegmentCombination combine = SegmentCombination::kByRank);

// Exact gradient of ComputeMrtLoss(model, ...) with respect to the
// translator parameters:
//   -sum_i sum_j q_ij grad log p*(h_ij) (R_ij - sum_j' q_ij' R_ij').
// A descent step along the negative of this vector lowers the risk.
ParameterVector MrtGradient(const ConditionalSeqModel& model,
                            const LinearTextClassifier& clf,
                            std::span<const MrtBatchItem> batch,
                            SegmentCombination combine = SegmentCombination::kByRank,
                            std::size_t* skipped_items = nullptr);

enum class PriorCenter { kZero, kInitialization };

std::string PriorCenterName(PriorCenter c);
PriorCenter ParsePriorCenter(const std::string& name);

struct MapConfig {
  double lambda = 1e-4;
  std::size_t k = 12;
  std::size_t beam_width = 12;
  SampleMode sampling = SampleMode::kKBest;
  double temperature = 1.0;
  int epochs = 5;
  int batch_size = 24;
  double clf_step = 0.1;  // Adam
  double mt_step = 1e-2;  // plain SGD
  double clip_norm = 1.0;
  PriorCenter prior_center = PriorCenter::kZero;
  EnsembleConfig ensemble;
  // false: only the classifier is fine-tuned (few-shot without MRT).
  bool update_translator = true;
};

// Where the Gaussian priors are centered. Null means the origin.
struct PriorCenters {
  const ParameterVector* theta = nullptr;
  const ParameterVector* phi = nullptr;
};

struct MapObjectiveTerms {
  double classifier_loss = 0.0;  // ensemble NLL
  double mrt_loss = 0.0;
  double theta_penalty = 0.0;
  double phi_penalty = 0.0;
  std::size_t skipped_items = 0;

  double total() const { return classifier_loss + mrt_loss + theta_penalty + phi_penalty; }
};

MapObjectiveTerms MapObjective(const LinearTextClassifier& clf,
                               const ConditionalSeqModel& model,
                               std::span<const MrtBatchItem> batch, const MapConfig& config,
                               const PriorCenters& centers = {});

struct TraceRow {
  int epoch = 0;
  double objective = 0.0;
  double clf_loss = 0.0;
  double mrt_loss = 0.0;
  std::size_t skipped_items = 0;
};

struct FinetuneResult {
  LinearTextClassifier clf;
  ConditionalSeqModel model;
  // Row 0 is the objective before any update, then one row per epoch.
  std::vector<TraceRow> trace;
};

// Decodes the segments of each example with the current translator.
std::vector<MrtBatchItem> DecodeBatch(const ConditionalSeqModel& model,
                                      std::span<const Example> examples,
                                      const MapConfig& config, std::uint64_t seed);

// Joint mini-batch descent on the MAP objective. Each step re-decodes the
// batch with the current translator, takes the classifier gradient of the
// ensemble NLL and the translator gradient of the MRT risk, clips each to
// clip_norm, then applies Adam (classifier) and SGD (translator) followed by
// a proximal shrink toward the prior center. Throws DomainError if the
// objective becomes NaN.
FinetuneResult FewShotFinetune(const LinearTextClassifier& clf,
                               const ConditionalSeqModel& model,
                               std::span<const Example> dev_set, const MapConfig& config,
                               std::uint64_t seed);

// CSV: epoch,objective,clf_loss,mrt_loss,skipped_items
void WriteTraceCsv(std::ostream& out, std::span<const TraceRow> trace);

// Central differences on `samples` random coordinates (all coordinates when
// samples >= size). Returns max |fd - analytic| / max(|fd|, |analytic|,
// kFdRelativeFloor).
inline constexpr double kFdRelativeFloor = 1e-3;

double FiniteDifferenceCheck(const std::function<double(const ParameterVector&)>& fn,
                             const ParameterVector& analytic_grad,
                             const ParameterVector& params, double step,
                             std::size_t samples, std::uint64_t seed);

}  // namespace latrans

#endif  // LATRANS_MRT_H_
