#include "latrans/dataset.h"

#include <map>

#include "latrans/errors.h"

namespace latrans {

void ValidateDataset(const LabeledDataset& data) {
  if (data.num_labels < 2) throw InvalidInputError("need at least 2 labels");
  for (const auto& ex : data.examples) {
    if (ex.label < 0 || ex.label >= data.num_labels) {
      throw InvalidInputError("label " + std::to_string(ex.label) + " outside [0, " +
                              std::to_string(data.num_labels) + ")");
    }
  }
}

int MultisetOverlap(const Sequence& a, const Sequence& b) {
  std::map<TokenId, int> counts;
  for (TokenId t : a) ++counts[t];
  int overlap = 0;
  for (TokenId t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

}  // namespace latrans
