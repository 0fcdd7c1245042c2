#include "synclip/encoders/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "synclip/autodiff/tensor.hpp"

namespace synclip::encoders {

namespace {
const std::vector<std::string> kSpecials = {"[PAD]", "[BOS]", "[EOS]", "[UNK]"};
}

Vocabulary::Vocabulary() : tokens_(kSpecials) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) ids_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  std::set<std::string> sorted;
  for (const auto& w : words) {
    if (w.empty()) continue;
    if (std::find(kSpecials.begin(), kSpecials.end(), w) != kSpecials.end()) continue;
    sorted.insert(w);
  }
  std::vector<std::string> tokens = kSpecials;
  tokens.insert(tokens.end(), sorted.begin(), sorted.end());
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kSpecials.size() || !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin())) {
    throw autodiff::Error("Vocabulary: token list must start with [PAD], [BOS], [EOS], [UNK]");
  }
  if (!std::is_sorted(tokens.begin() + 4, tokens.end()) ||
      std::adjacent_find(tokens.begin() + 4, tokens.end()) != tokens.end()) {
    throw autodiff::Error("Vocabulary: words must be unique and sorted");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.ids_.clear();
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.ids_.emplace(v.tokens_[i], i);
  return v;
}

std::size_t Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view word) const { return ids_.count(std::string(word)) != 0; }

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

TokenSequence tokenize(std::string_view caption, const Vocabulary& vocab, std::size_t max_seq_len) {
  if (max_seq_len < 2) throw autodiff::DomainError("tokenize: max_seq_len must be at least 2");
  const auto words = split_words(caption);
  const std::size_t kept = std::min(words.size(), max_seq_len - 2);
  TokenSequence seq;
  seq.ids.assign(max_seq_len, kPadId);
  seq.ids[0] = kBosId;
  for (std::size_t i = 0; i < kept; ++i) seq.ids[i + 1] = vocab.id(words[i]);
  seq.eos_position = kept + 1;
  seq.ids[seq.eos_position] = kEosId;
  return seq;
}

}  // namespace synclip::encoders
