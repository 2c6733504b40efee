#ifndef LATRANS_VOCABULARY_H_
#define LATRANS_VOCABULARY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace latrans {

using TokenId = std::int32_t;

// Token ids of one text. End-of-sequence is implicit and never stored.
using Sequence = std::vector<TokenId>;

// Stand-in for log(0). Finite so that sums and comparisons stay well defined;
// anything at or below kLogZero / 2 is treated as a structural zero.
inline constexpr double kLogZero = -1e9;

inline bool IsLogZero(double log_value) { return log_value <= kLogZero / 2; }

// Ordered, duplicate-free list of token strings plus the two reserved ids.
class Vocabulary {
 public:
  static constexpr const char* kSeparatorToken = "<sep>";
  static constexpr const char* kEosToken = "</s>";

  Vocabulary(std::vector<std::string> tokens, TokenId separator_id, TokenId eos_id);

  // "<sep>" and "</s>" at ids 0 and 1, followed by `content` in order.
  static Vocabulary WithSpecials(const std::vector<std::string>& content);

  // `prefix` + index for `count` content tokens, e.g. s0, s1, ...
  static Vocabulary Synthetic(const std::string& prefix, int count);

  std::size_t size() const { return tokens_.size(); }
  TokenId separator_id() const { return separator_id_; }
  TokenId eos_id() const { return eos_id_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  const std::string& token(TokenId id) const;
  std::optional<TokenId> Find(const std::string& token) const;
  // Throws InvalidInputError for unknown tokens.
  TokenId Id(const std::string& token) const;

  bool Contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }
  bool ContainsAll(std::span<const TokenId> ids) const;

  Sequence Encode(const std::vector<std::string>& words) const;
  std::vector<std::string> Decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && separator_id_ == other.separator_id_ &&
           eos_id_ == other.eos_id_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId separator_id_;
  TokenId eos_id_;
};

}  // namespace latrans

#endif  // LATRANS_VOCABULARY_H_
