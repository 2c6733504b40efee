#ifndef LATRANS_DATASET_H_
#define LATRANS_DATASET_H_

#include <string>
#include <vector>

#include "latrans/vocabulary.h"

namespace latrans {

// One labeled record. Segments are translated independently and joined with
// the separator only when the classifier reads them.
struct Example {
  std::vector<Sequence> segments;
  int label = 0;
  std::string lang;

  bool operator==(const Example&) const = default;
};

struct LabeledDataset {
  std::vector<Example> examples;
  int num_labels = 2;
};

// Throws InvalidInputError if a label is outside [0, num_labels).
void ValidateDataset(const LabeledDataset& data);

// Number of tokens the two sequences share, counted with multiplicity.
int MultisetOverlap(const Sequence& a, const Sequence& b);

struct ParallelPair {
  Sequence source;
  Sequence target;

  bool operator==(const ParallelPair&) const = default;
};

}  // namespace latrans

#endif  // LATRANS_DATASET_H_
