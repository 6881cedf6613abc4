#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apt::metrics {

struct OverlapScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // harmonic mean, 0 when precision + recall == 0
};

// Lowercases ASCII, splits on whitespace, and emits every ASCII punctuation
// character as its own token. Punctuation stays visible to the metrics
// because punctuation changes are a paraphrase type of their own.
std::vector<std::string> tokenize(std::string_view text);

bool is_punctuation_token(std::string_view token);

OverlapScore make_score(double overlap, double candidate_total, double reference_total);

// Sentence BLEU: geometric mean of clipped n-gram precisions for
// n = 1..min(max_n, |candidate|), times the brevity penalty
// min(1, exp(1 - r/c)) with r the reference length closest to c (shorter on
// ties). No smoothing, so any zero precision gives 0.
// Throws EmptyInput when the candidate or every reference tokenizes empty.
double bleu(std::string_view candidate, std::span<const std::string> references, int max_n = 4);
double bleu_tokens(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
                   int max_n = 4);

// Clipped n-gram overlap. Throws EmptyInput when neither side has an n-gram
// or n < 1.
OverlapScore rouge_n(std::string_view candidate, std::string_view reference, int n);
OverlapScore rouge_n_tokens(std::span<const std::string> candidate, std::span<const std::string> reference, int n);

// Longest-common-subsequence overlap. Throws EmptyInput on an empty side.
OverlapScore rouge_l(std::string_view candidate, std::string_view reference);
OverlapScore rouge_l_tokens(std::span<const std::string> candidate, std::span<const std::string> reference);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace apt::metrics
