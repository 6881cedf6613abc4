#include "apt/tinylm/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "apt/error.hpp"
#include "apt/utf8.hpp"

namespace apt::tinylm {
namespace {

constexpr std::string_view kContinuation = "##";

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> specials{"<pad>", "<bos>", "<eos>", "<unk>"};
  return specials;
}

bool attaches_left(std::string_view tok) {
  return tok.size() == 1 && std::string_view(".,;:!?)]}%").find(tok[0]) != std::string_view::npos;
}

bool attaches_right(std::string_view tok) {
  return tok.size() == 1 && std::string_view("([{$").find(tok[0]) != std::string_view::npos;
}

}  // namespace

std::vector<std::string> pre_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      word.push_back(ch);
    }
  }
  flush();
  return out;
}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kNumSpecial || !std::equal(special_tokens().begin(), special_tokens().end(), tokens_.begin())) {
    throw Error(ErrorKind::InvalidArgument, "vocabulary must start with <pad>, <bos>, <eos>, <unk>");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate vocabulary token: " + tokens_[i]);
    }
  }
}

Vocab Vocab::build(std::span<const std::string> texts) {
  std::map<std::string, std::size_t> counts;
  std::set<std::string> chars;
  for (const auto& text : texts) {
    for (const auto& w : pre_tokenize(text)) {
      ++counts[w];
      for (const auto& c : utf8::chars(w)) chars.insert(c);
    }
  }
  std::vector<std::pair<std::string, std::size_t>> words(counts.begin(), counts.end());
  std::ranges::stable_sort(words, [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens = special_tokens();
  std::set<std::string> seen(tokens.begin(), tokens.end());
  auto add = [&](const std::string& t) {
    if (seen.insert(t).second) tokens.push_back(t);
  };
  for (const auto& [w, n] : words) add(w);
  for (const auto& c : chars) add(c);
  for (const auto& c : chars) add(std::string(kContinuation) + c);
  return Vocab(std::move(tokens));
}

int Vocab::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> Vocab::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : pre_tokenize(text)) {
    if (const int known = id(w); known >= 0) {
      ids.push_back(known);
      continue;
    }
    bool first = true;
    for (const auto& c : utf8::chars(w)) {
      const int piece = id(first ? c : std::string(kContinuation) + c);
      ids.push_back(piece >= 0 ? piece : kUnk);
      first = false;
    }
  }
  return ids;
}

std::string Vocab::decode(std::span<const int> ids) const {
  std::string out;
  bool glue_next = false;
  for (int i : ids) {
    if (i < 0 || static_cast<std::size_t>(i) >= tokens_.size()) continue;
    if (i == kPad || i == kBos || i == kEos) continue;
    std::string_view tok = tokens_[static_cast<std::size_t>(i)];
    const bool continuation = tok.size() > kContinuation.size() && tok.starts_with(kContinuation);
    if (continuation) tok.remove_prefix(kContinuation.size());
    if (!out.empty() && !continuation && !glue_next && !attaches_left(tok)) out += ' ';
    out += tok;
    glue_next = attaches_right(tok);
  }
  return out;
}

}  // namespace apt::tinylm
