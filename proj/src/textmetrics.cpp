#include "apt/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

#include "apt/error.hpp"

namespace apt::metrics {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_overlap(const NgramCounts& candidate, const NgramCounts& reference) {
  std::size_t overlap = 0;
  for (const auto& [gram, count] : candidate) {
    const auto it = reference.find(gram);
    if (it != reference.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return tokens;
}

bool is_punctuation_token(std::string_view token) {
  return token.size() == 1 && static_cast<unsigned char>(token[0]) < 0x80 &&
         std::ispunct(static_cast<unsigned char>(token[0]));
}

OverlapScore make_score(double overlap, double candidate_total, double reference_total) {
  OverlapScore s;
  s.precision = candidate_total > 0 ? overlap / candidate_total : 0.0;
  s.recall = reference_total > 0 ? overlap / reference_total : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double bleu_tokens(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
                   int max_n) {
  if (max_n < 1) throw Error(ErrorKind::InvalidArgument, "bleu: max_n must be >= 1");
  if (candidate.empty()) throw Error(ErrorKind::EmptyInput, "bleu: empty candidate");
  const bool any_reference = std::ranges::any_of(references, [](const auto& r) { return !r.empty(); });
  if (!any_reference) throw Error(ErrorKind::EmptyInput, "bleu: no non-empty reference");

  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(max_n), candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : count_ngrams(ref, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    const std::size_t matched = clipped_overlap(cand, max_ref);
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(candidate.size() - n + 1));
  }

  const auto c = static_cast<double>(candidate.size());
  double closest = 0.0;
  double best_diff = std::numeric_limits<double>::infinity();
  for (const auto& ref : references) {
    if (ref.empty()) continue;
    const auto r = static_cast<double>(ref.size());
    const double diff = std::abs(r - c);
    if (diff < best_diff || (diff == best_diff && r < closest)) {
      best_diff = diff;
      closest = r;
    }
  }
  const double brevity = std::min(1.0, std::exp(1.0 - closest / c));
  return brevity * std::exp(log_sum / static_cast<double>(orders));
}

double bleu(std::string_view candidate, std::span<const std::string> references, int max_n) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(tokenize(r));
  const auto cand = tokenize(candidate);
  return bleu_tokens(cand, refs, max_n);
}

OverlapScore rouge_n_tokens(std::span<const std::string> candidate, std::span<const std::string> reference, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "rouge_n: n must be >= 1");
  const auto order = static_cast<std::size_t>(n);
  if (candidate.size() < order && reference.size() < order) {
    throw Error(ErrorKind::EmptyInput, "rouge_n: both sides shorter than n");
  }
  const NgramCounts cand = count_ngrams(candidate, order);
  const NgramCounts ref = count_ngrams(reference, order);
  const double cand_total = candidate.size() >= order ? static_cast<double>(candidate.size() - order + 1) : 0.0;
  const double ref_total = reference.size() >= order ? static_cast<double>(reference.size() - order + 1) : 0.0;
  return make_score(static_cast<double>(clipped_overlap(cand, ref)), cand_total, ref_total);
}

OverlapScore rouge_n(std::string_view candidate, std::string_view reference, int n) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return rouge_n_tokens(c, r, n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

OverlapScore rouge_l_tokens(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) throw Error(ErrorKind::EmptyInput, "rouge_l: empty input");
  const auto l = static_cast<double>(lcs_length(candidate, reference));
  return make_score(l, static_cast<double>(candidate.size()), static_cast<double>(reference.size()));
}

OverlapScore rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return rouge_l_tokens(c, r);
}

}  // namespace apt::metrics
