#ifndef LATRANS_CHECKPOINT_H_
#define LATRANS_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>

#include "latrans/classifier.h"
#include "latrans/seq_model.h"

namespace latrans {

// Checkpoints are JSON documents:
//   {"kind": ..., "vocabularies": {...}, "layout": [{"name", "offset", "size"}],
//    "values": ["<decimal>", ...], ...}
// Values are shortest round-trip decimal strings, so loading restores the
// parameter array bit for bit.
void SaveTranslator(std::ostream& out, const ConditionalSeqModel& model);
ConditionalSeqModel LoadTranslator(std::istream& in);
void SaveTranslator(const std::filesystem::path& path, const ConditionalSeqModel& model);
// Throws InvalidInputError naming the path when the file does not exist.
ConditionalSeqModel LoadTranslator(const std::filesystem::path& path);

void SaveClassifier(std::ostream& out, const LinearTextClassifier& clf);
LinearTextClassifier LoadClassifier(std::istream& in);
void SaveClassifier(const std::filesystem::path& path, const LinearTextClassifier& clf);
LinearTextClassifier LoadClassifier(const std::filesystem::path& path);

}  // namespace latrans

#endif  // LATRANS_CHECKPOINT_H_
