#include "apt/split.hpp"

#include <algorithm>
#include <array>
#include <initializer_list>
#include <cmath>
#include <map>

#include "apt/rng.hpp"

namespace apt::corpus {
namespace {

void check_args(std::size_t n, double ratio) {
  if (n == 0) throw Error(ErrorKind::EmptyInput, "split: no records");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::InvalidArgument, "split ratio must be in (0, 1)");
}

SplitMix64 group_stream(std::uint64_t seed, std::string_view label) { return SplitMix64(derive_seed(seed, fnv1a(label))); }

std::size_t rounded_share(std::size_t n, double ratio) {
  // The epsilon keeps products such as 0.7 * 5 on the half-up side.
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5 + 1e-9));
}

enum class Side : std::uint8_t { Unassigned, Train, Test };

SplitIndices collect(const std::vector<Side>& side, std::uint64_t seed) {
  SplitIndices out;
  out.seed = seed;
  for (std::size_t i = 0; i < side.size(); ++i) (side[i] == Side::Train ? out.train : out.test).push_back(i);
  return out;
}

}  // namespace

std::size_t train_quota(std::size_t n, double ratio) {
  if (n <= 1) return n;
  return std::clamp<std::size_t>(rounded_share(n, ratio), 1, n - 1);
}

std::string type_key(const TypeSet& types) {
  std::string key;
  for (const auto& l : types.labels()) {
    if (!key.empty()) key += '|';
    key += l;
  }
  return key;
}

SplitIndices split_stratified_indices(std::span<const std::string> labels, double ratio, std::uint64_t seed) {
  check_args(labels.size(), ratio);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);

  std::vector<Side> side(labels.size(), Side::Test);
  for (auto& [label, members] : groups) {
    auto rng = group_stream(seed, label);
    shuffle(std::span(members), rng);
    const std::size_t quota = train_quota(members.size(), ratio);
    for (std::size_t k = 0; k < quota; ++k) side[members[k]] = Side::Train;
  }
  return collect(side, seed);
}

SplitIndices split_multilabel_indices(std::span<const TypeSet> types, double ratio, std::uint64_t seed) {
  check_args(types.size(), ratio);
  const std::size_t n = types.size();

  std::array<std::vector<std::size_t>, taxonomy::kTypeCount> carriers;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto t : types[i].members()) carriers[taxonomy::id(t)].push_back(i);
  }
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < taxonomy::kTypeCount; ++t) {
    if (!carriers[t].empty()) order.push_back(t);
  }
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return carriers[a].size() < carriers[b].size(); });

  std::vector<Side> side(n, Side::Unassigned);
  for (std::size_t t : order) {
    std::size_t in_train = 0;
    std::vector<std::size_t> pending;
    for (auto i : carriers[t]) {
      if (side[i] == Side::Train) ++in_train;
      else if (side[i] == Side::Unassigned) pending.push_back(i);
    }
    auto rng = group_stream(seed, taxonomy::label(taxonomy::from_id(t)));
    shuffle(std::span(pending), rng);
    const std::size_t quota = train_quota(carriers[t].size(), ratio);
    for (auto i : pending) {
      if (in_train < quota) {
        side[i] = Side::Train;
        ++in_train;
      } else {
        side[i] = Side::Test;
      }
    }
  }

  std::vector<std::size_t> untyped;
  std::size_t total_train = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (side[i] == Side::Unassigned) untyped.push_back(i);
    else if (side[i] == Side::Train) ++total_train;
  }
  if (!untyped.empty()) {
    auto rng = group_stream(seed, "");
    shuffle(std::span(untyped), rng);
    const std::size_t global_target = rounded_share(n, ratio);
    for (auto i : untyped) {
      side[i] = total_train < global_target ? Side::Train : Side::Test;
      if (side[i] == Side::Train) ++total_train;
    }
  }

  // Repair by local search: flip one record, or failing that a pair of
  // records, whenever the flip strictly lowers the number of types with >= 2
  // carriers that sit on one side only. Terminates because that count drops.
  std::array<std::size_t, taxonomy::kTypeCount> on_train{};
  std::size_t train_size = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (side[i] != Side::Train) continue;
    ++train_size;
    for (auto t : types[i].members()) ++on_train[taxonomy::id(t)];
  }
  auto one_sided = [&](std::size_t t) {
    return carriers[t].size() >= 2 && (on_train[t] == 0 || on_train[t] == carriers[t].size());
  };
  auto flip = [&](std::size_t i) {
    const bool to_train = side[i] != Side::Train;
    side[i] = to_train ? Side::Train : Side::Test;
    train_size = to_train ? train_size + 1 : train_size - 1;
    for (auto t : types[i].members()) on_train[taxonomy::id(t)] += to_train ? 1 : static_cast<std::size_t>(-1);
  };
  // Change in one-sided types when flipping the given records.
  auto gain = [&](std::initializer_list<std::size_t> recs) {
    TypeSet touched;
    for (auto i : recs) touched = touched.unite(types[i]);
    long before = 0;
    for (auto t : touched.members()) before += one_sided(taxonomy::id(t));
    for (auto i : recs) flip(i);
    long after = 0;
    for (auto t : touched.members()) after += one_sided(taxonomy::id(t));
    const bool sides_ok = train_size > 0 && train_size < n;
    for (auto i : recs) flip(i);
    return sides_ok ? before - after : 0L;
  };
  auto improve = [&]() {
    for (std::size_t t : order) {
      if (!one_sided(t)) continue;
      for (auto i : carriers[t]) {
        if (gain({i}) > 0) {
          flip(i);
          return true;
        }
      }
    }
    for (std::size_t t : order) {
      if (!one_sided(t)) continue;
      for (auto i : carriers[t]) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && gain({i, j}) > 0) {
            flip(i);
            flip(j);
            return true;
          }
        }
      }
    }
    return false;
  };
  while (improve()) {
  }
  return collect(side, seed);
}

SplitPair<SentencePairRecord> split_multilabel(std::span<const SentencePairRecord> records, double ratio,
                                               std::uint64_t seed) {
  std::vector<TypeSet> types;
  types.reserve(records.size());
  for (const auto& r : records) types.push_back(r.types);
  return materialize(records, split_multilabel_indices(types, ratio, seed));
}

}  // namespace apt::corpus
