#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "apt/error.hpp"
#include "apt/textmetrics.hpp"
#include "support/oracles.hpp"

using namespace apt;
using namespace apt::metrics;
using Catch::Matchers::WithinAbs;

TEST_CASE("tokenize lowercases and splits punctuation") {
  CHECK(tokenize("The Cat, sat!") == std::vector<std::string>{"the", "cat", ",", "sat", "!"});
  CHECK(tokenize("  ") .empty());
  CHECK(tokenize("don't") == std::vector<std::string>{"don", "'", "t"});
  CHECK(is_punctuation_token("."));
  CHECK_FALSE(is_punctuation_token("a"));
}

TEST_CASE("bleu examples") {
  const std::vector<std::string> ref{"a b c d e"};
  CHECK_THAT(bleu("a b c d", ref), WithinAbs(std::exp(1.0 - 5.0 / 4.0), 1e-12));
  CHECK_THAT(bleu("a b c d", ref), WithinAbs(0.778801, 1e-6));
  CHECK(bleu("x y z", ref) == 0.0);
  const std::vector<std::string> self{"the cat sat on the mat ."};
  CHECK(bleu("the cat sat on the mat .", self) == 1.0);
  CHECK_THROWS_AS(bleu("", ref), Error);
  const std::vector<std::string> none{"   "};
  CHECK_THROWS_AS(bleu("a", none), Error);
}

TEST_CASE("bleu picks the closest reference length, shorter on ties") {
  // c = 4 tokens; refs of length 2 and 6 are equally close, so r = 2 and BP = 1.
  const std::vector<std::string> refs{"a b", "a b c d e f"};
  CHECK(bleu("a b c d", refs) == 1.0);
}

TEST_CASE("rouge_n examples") {
  const auto s = rouge_n("a b c", "a b d", 1);
  CHECK_THAT(s.precision, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(s.recall, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(s.f1, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK(rouge_n("a b c d e", "a b c d e", 2).f1 == 1.0);
  CHECK(rouge_n("a b c", "x y z", 1).f1 == 0.0);
  CHECK_THROWS_AS(rouge_n("a", "b", 2), Error);
  CHECK_THROWS_AS(rouge_n("a", "b", 0), Error);
  CHECK(rouge_n("a b", "a", 2).f1 == 0.0);
}

TEST_CASE("rouge_l examples") {
  const auto s = rouge_l("a c b", "a b c");
  CHECK_THAT(s.f1, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK(rouge_l("the cat", "the cat").f1 == 1.0);
  const std::vector<std::string> a{"x", "q"}, b{"y", "q", "z"};
  CHECK(lcs_length(a, b) == 1);
  CHECK_THROWS_AS(rouge_l("", "a"), Error);
}

TEST_CASE("metrics agree with brute-force oracles on random pairs") {
  const auto pairs = oracle::random_sentence_pairs(500, 77);
  for (const auto& p : pairs) {
    const auto c = tokenize(p.candidate);
    const auto r = tokenize(p.reference);
    INFO(p.candidate << " | " << p.reference);
    CHECK(lcs_length(c, r) == oracle::lcs_bruteforce(c, r));
    const auto rl = rouge_l(p.candidate, p.reference);
    const auto orl = oracle::rouge_l(c, r);
    CHECK(rl.precision == orl.p);
    CHECK(rl.recall == orl.r);
    CHECK(rl.f1 == orl.f);
    for (int n : {1, 2}) {
      if (c.size() < static_cast<std::size_t>(n) && r.size() < static_cast<std::size_t>(n)) continue;
      const auto rn = rouge_n(p.candidate, p.reference, n);
      const auto orn = oracle::rouge_n(c, r, static_cast<std::size_t>(n));
      CHECK(rn.precision == orn.p);
      CHECK(rn.recall == orn.r);
      CHECK(rn.f1 == orn.f);
    }
    const std::vector<std::string> refs{p.reference};
    CHECK_THAT(bleu(p.candidate, refs), WithinAbs(oracle::bleu(c, {r}), 1e-12));
  }
}

TEST_CASE("multi-reference bleu agrees with the oracle") {
  const auto pairs = oracle::random_sentence_pairs(300, 78);
  for (std::size_t i = 0; i + 2 < pairs.size(); i += 3) {
    const std::vector<std::string> refs{pairs[i].reference, pairs[i + 1].reference, pairs[i + 2].candidate};
    std::vector<oracle::Tokens> tok_refs;
    for (const auto& s : refs) tok_refs.push_back(tokenize(s));
    CHECK_THAT(bleu(pairs[i].candidate, refs), WithinAbs(oracle::bleu(tokenize(pairs[i].candidate), tok_refs), 1e-12));
  }
}

TEST_CASE("scores stay in range and bleu of a sentence against itself is 1") {
  for (const auto& p : oracle::random_sentence_pairs(300, 79)) {
    const std::vector<std::string> refs{p.reference};
    const double b = bleu(p.candidate, refs);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    const std::vector<std::string> self{p.candidate};
    CHECK_THAT(bleu(p.candidate, self), WithinAbs(1.0, 1e-15));
    const auto rl = rouge_l(p.candidate, p.reference);
    CHECK(rl.f1 >= 0.0);
    CHECK(rl.f1 <= 1.0);
  }
}

TEST_CASE("rouge_n F is symmetric for equal lengths") {
  for (const auto& p : oracle::random_sentence_pairs(300, 80)) {
    const auto c = tokenize(p.candidate), r = tokenize(p.reference);
    if (c.size() != r.size()) continue;
    CHECK(rouge_n(p.candidate, p.reference, 1).f1 == rouge_n(p.reference, p.candidate, 1).f1);
  }
}

TEST_CASE("rouge-l can fall below rouge-2") {
  // Two bigrams survive a block swap while the LCS halves.
  CHECK(rouge_l("a b c d", "c d a b").f1 < rouge_n("a b c d", "c d a b", 2).f1);
}
