#include "latrans/vocabulary.h"

#include "latrans/errors.h"

namespace latrans {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId separator_id,
                       TokenId eos_id)
    : tokens_(std::move(tokens)), separator_id_(separator_id), eos_id_(eos_id) {
  if (tokens_.size() < 2) {
    throw InvalidInputError("vocabulary needs at least 2 tokens");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw InvalidInputError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
  if (!Contains(separator_id_) || !Contains(eos_id_)) {
    throw InvalidInputError("separator/eos id outside vocabulary");
  }
}

Vocabulary Vocabulary::WithSpecials(const std::vector<std::string>& content) {
  std::vector<std::string> tokens = {kSeparatorToken, kEosToken};
  tokens.insert(tokens.end(), content.begin(), content.end());
  return Vocabulary(std::move(tokens), 0, 1);
}

Vocabulary Vocabulary::Synthetic(const std::string& prefix, int count) {
  std::vector<std::string> content;
  content.reserve(count);
  for (int i = 0; i < count; ++i) content.push_back(prefix + std::to_string(i));
  return WithSpecials(content);
}

const std::string& Vocabulary::token(TokenId id) const {
  if (!Contains(id)) {
    throw InvalidInputError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::Find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::Id(const std::string& token) const {
  auto id = Find(token);
  if (!id) throw InvalidInputError("unknown token '" + token + "'");
  return *id;
}

bool Vocabulary::ContainsAll(std::span<const TokenId> ids) const {
  for (TokenId id : ids) {
    if (!Contains(id)) return false;
  }
  return true;
}

Sequence Vocabulary::Encode(const std::vector<std::string>& words) const {
  Sequence out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(Id(w));
  return out;
}

std::vector<std::string> Vocabulary::Decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token(id));
  return out;
}

}  // namespace latrans
