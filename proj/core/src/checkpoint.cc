#include "latrans/checkpoint.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "latrans/errors.h"
#include "latrans/format.h"

namespace latrans {

using nlohmann::json;

namespace {

constexpr const char* kClassifierKind = "linear_text_classifier";

json VocabToJson(const Vocabulary& v) {
  return {{"tokens", v.tokens()}, {"separator_id", v.separator_id()}, {"eos_id", v.eos_id()}};
}

Vocabulary VocabFromJson(const json& j) {
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>(),
                    j.at("separator_id").get<TokenId>(), j.at("eos_id").get<TokenId>());
}

void WriteParams(json& doc, const ParameterVector& params) {
  json layout = json::array();
  for (const auto& s : params.layout()) {
    layout.push_back({{"name", s.name}, {"offset", s.offset}, {"size", s.size}});
  }
  json values = json::array();
  for (double v : params.values()) values.push_back(FormatDouble(v));
  doc["layout"] = std::move(layout);
  doc["values"] = std::move(values);
}

ParameterVector ReadParams(const json& doc) {
  std::vector<ParamSlice> layout;
  for (const auto& s : doc.at("layout")) {
    layout.push_back({s.at("name").get<std::string>(), s.at("offset").get<std::size_t>(),
                      s.at("size").get<std::size_t>()});
  }
  std::vector<double> values;
  for (const auto& v : doc.at("values")) values.push_back(ParseDouble(v.get<std::string>()));
  return ParameterVector(std::move(layout), std::move(values));
}

json ParseDocument(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), 0);
  }
}

template <typename Fn>
auto Decode(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("malformed ") + what + " checkpoint: " + e.what());
  }
}

std::ifstream OpenCheckpoint(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::exists(path)) {
    throw InvalidInputError(std::string("missing ") + what + " checkpoint " + path.string() +
                            "; run the matching train subcommand first");
  }
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read " + path.string());
  return in;
}

void WriteDocument(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

json TranslatorDocument(const ConditionalSeqModel& model) {
  json doc = {{"kind", ModelKindName(model.kind())},
              {"vocabularies",
               {{"input", VocabToJson(model.input_vocab())},
                {"output", VocabToJson(model.output_vocab())}}}};
  WriteParams(doc, model.params());
  return doc;
}

json ClassifierDocument(const LinearTextClassifier& clf) {
  const FeatureSpec& f = clf.feature_spec();
  json doc = {{"kind", kClassifierKind},
              {"vocabularies", {{"input", VocabToJson(clf.vocab())}}},
              {"num_labels", clf.num_labels()},
              {"features",
               {{"max_ngram", f.max_ngram},
                {"hashing_dim", f.hashing_dim},
                {"include_segment_tags", f.include_segment_tags},
                {"count_indicators", f.count_indicators},
                {"overlap_features", f.overlap_features},
                {"overlap_levels", f.overlap_levels}}}};
  WriteParams(doc, clf.theta());
  return doc;
}

}  // namespace

void SaveTranslator(std::ostream& out, const ConditionalSeqModel& model) {
  out << TranslatorDocument(model).dump(1) << '\n';
}

ConditionalSeqModel LoadTranslator(std::istream& in) {
  const json doc = ParseDocument(in);
  return Decode("translator", [&] {
    const ModelKind kind = ParseModelKind(doc.at("kind").get<std::string>());
    (void)kind;  // the lexical channel is the only kind
    auto model = ConditionalSeqModel::LexicalChannel(
        VocabFromJson(doc.at("vocabularies").at("input")),
        VocabFromJson(doc.at("vocabularies").at("output")));
    model.set_params(ReadParams(doc));
    return model;
  });
}

void SaveTranslator(const std::filesystem::path& path, const ConditionalSeqModel& model) {
  WriteDocument(path, TranslatorDocument(model));
}

ConditionalSeqModel LoadTranslator(const std::filesystem::path& path) {
  auto in = OpenCheckpoint(path, "translator");
  return LoadTranslator(in);
}

void SaveClassifier(std::ostream& out, const LinearTextClassifier& clf) {
  out << ClassifierDocument(clf).dump(1) << '\n';
}

LinearTextClassifier LoadClassifier(std::istream& in) {
  const json doc = ParseDocument(in);
  return Decode("classifier", [&] {
    if (doc.at("kind").get<std::string>() != kClassifierKind) {
      throw InvalidInputError("checkpoint is not a classifier");
    }
    const json& f = doc.at("features");
    FeatureSpec spec;
    spec.max_ngram = f.at("max_ngram").get<int>();
    spec.hashing_dim = f.at("hashing_dim").get<std::size_t>();
    spec.include_segment_tags = f.at("include_segment_tags").get<bool>();
    spec.count_indicators = f.at("count_indicators").get<bool>();
    spec.overlap_features = f.at("overlap_features").get<bool>();
    spec.overlap_levels = f.at("overlap_levels").get<bool>();
    LinearTextClassifier clf(VocabFromJson(doc.at("vocabularies").at("input")), spec,
                             doc.at("num_labels").get<int>());
    clf.set_theta(ReadParams(doc));
    return clf;
  });
}

void SaveClassifier(const std::filesystem::path& path, const LinearTextClassifier& clf) {
  WriteDocument(path, ClassifierDocument(clf));
}

LinearTextClassifier LoadClassifier(const std::filesystem::path& path) {
  auto in = OpenCheckpoint(path, "classifier");
  return LoadClassifier(in);
}

}  // namespace latrans
