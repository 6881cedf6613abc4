#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apt/corpus.hpp"

namespace apt::corpus {

// Indices into the input, each list in ascending (input) order.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

template <typename Record>
struct SplitPair {
  std::vector<Record> train;
  std::vector<Record> test;
  std::uint64_t seed = 0;
};

// Train share of a group of n: round-half-up of ratio*n, then clamped to
// [1, n-1] when n >= 2 so both sides see the group. A singleton goes to train.
std::size_t train_quota(std::size_t n, double ratio);

// Each label group is shuffled with its own SplitMix64 substream
// (derived from seed and the label) and its first train_quota records go to
// train. Throws EmptyInput, or InvalidArgument unless 0 < ratio < 1.
SplitIndices split_stratified_indices(std::span<const std::string> labels, double ratio, std::uint64_t seed);

// Greedy iterative stratification over multilabel records.
//  1. Types are visited in ascending global frequency (ties by id).
//  2. For type t, the records carrying t that are still unassigned are
//     shuffled with t's substream and dealt to train until t's train count
//     reaches train_quota(n_t), then to test. A record is assigned once.
//  3. Records without any type are dealt to keep the global ratio.
//  4. A repair pass moves records so that every type with >= 2 records is on
//     both sides whenever a move exists that does not empty another type.
// With one type per record this reproduces split_stratified_indices exactly.
SplitIndices split_multilabel_indices(std::span<const TypeSet> types, double ratio, std::uint64_t seed);

template <typename Record>
SplitPair<Record> materialize(std::span<const Record> records, const SplitIndices& idx) {
  SplitPair<Record> out;
  out.seed = idx.seed;
  out.train.reserve(idx.train.size());
  out.test.reserve(idx.test.size());
  for (auto i : idx.train) out.train.push_back(records[i]);
  for (auto i : idx.test) out.test.push_back(records[i]);
  return out;
}

template <typename Record, typename KeyFn>
SplitPair<Record> split_stratified(std::span<const Record> records, double ratio, KeyFn key, std::uint64_t seed) {
  std::vector<std::string> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(key(r));
  return materialize(records, split_stratified_indices(labels, ratio, seed));
}

SplitPair<SentencePairRecord> split_multilabel(std::span<const SentencePairRecord> records, double ratio,
                                               std::uint64_t seed);

// Stratification key for a record's type set: labels joined with '|'.
std::string type_key(const TypeSet& types);

}  // namespace apt::corpus
