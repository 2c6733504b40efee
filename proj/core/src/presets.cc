#include "latrans/harness.h"

namespace latrans {

ExperimentConfig NoisyToySuite() {
  ExperimentConfig c;
  c.name = "noisy-toy";
  c.generation.shape = TaskShape::kCopa;
  c.generation.rule = LabelRule::kKeywordOverlap;
  c.generation.vocab_size = 32;
  c.generation.sizes.test = 1000;
  LanguageSpec lang{"noisy", 0.3, {}, true};
  // Sixteen of the 32 source tokens share a target token with a partner.
  for (int i = 0; i < 8; ++i) lang.merges.emplace_back(2 * i + 1, 2 * i);
  c.languages = {lang};
  // Overlap level indicators make the classifier sharp enough that averaging
  // over translations no longer helps on this suite.
  c.features.overlap_levels = false;
  c.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  return c;
}

ExperimentConfig BiasedChannelSuite() {
  ExperimentConfig c;
  c.name = "biased-channel";
  c.generation.shape = TaskShape::kParaphrase;
  c.generation.rule = LabelRule::kParity;
  c.generation.vocab_size = 8;
  // Token 0 decides the label and is rare in task text; token 1 shares its
  // target token, never occurs in task text and dominates the parallel data.
  c.generation.options.designated_token = 0;
  c.generation.options.token_weights = {0.15, 0, 1, 1, 1, 1, 1, 1};
  c.generation.options.parallel_token_weights = {0.05, 3, 1, 1, 1, 1, 1, 1};
  c.languages = {LanguageSpec{"biased", 0.0, {{1, 0}}, true}};
  c.ensemble.combine = SegmentCombination::kCrossProduct;
  c.mode = RunMode::kFewShotMrt;
  c.map.mt_step = 10.0;
  c.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  return c;
}

}  // namespace latrans
