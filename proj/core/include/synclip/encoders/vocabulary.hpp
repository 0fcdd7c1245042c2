#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace synclip::encoders {

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kBosId = 1;
inline constexpr std::size_t kEosId = 2;
inline constexpr std::size_t kUnkId = 3;

/// Closed word vocabulary: [PAD]=0, [BOS]=1, [EOS]=2, [UNK]=3, then the
/// distinct words in lexicographic order.
class Vocabulary {
 public:
  Vocabulary();
  static Vocabulary from_words(std::span<const std::string> words);
  /// Rebuilds from a full token list as produced by tokens(); validates the
  /// special-token prefix and ordering.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  /// Id of `word`, or kUnkId.
  std::size_t id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct TokenSequence {
  std::vector<std::size_t> ids;  // exactly max_seq_len entries
  std::size_t eos_position = 0;
};

/// [BOS] word ids [EOS], padded with [PAD] to max_seq_len. Captions longer than
/// max_seq_len - 2 words are truncated so that [EOS] stays last.
TokenSequence tokenize(std::string_view caption, const Vocabulary& vocab, std::size_t max_seq_len);

/// Whitespace-separated words of `text`.
std::vector<std::string> split_words(std::string_view text);

}  // namespace synclip::encoders
