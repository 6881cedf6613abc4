#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace apt::tinylm {

// Splits on whitespace and isolates each ASCII punctuation character.
// Case is preserved.
std::vector<std::string> pre_tokenize(std::string_view text);

// Word-level vocabulary with character fallback. Out-of-vocabulary words are
// spelled as their first character followed by "##"-prefixed continuation
// characters; characters missing from the vocabulary become <unk>.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr std::size_t kNumSpecial = 4;

  Vocab() = default;

  // tokens[0..3] must be <pad>, <bos>, <eos>, <unk>.
  explicit Vocab(std::vector<std::string> tokens);

  // Words ordered by descending frequency then lexicographically, followed by
  // every character (plain and "##" form) seen in the texts.
  static Vocab build(std::span<const std::string> texts);

  std::vector<int> encode(std::string_view text) const;

  // Special tokens are skipped; "##" pieces attach to the previous token and
  // closing punctuation attaches to the word before it.
  std::string decode(std::span<const int> ids) const;

  // -1 when absent.
  int id(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace apt::tinylm
