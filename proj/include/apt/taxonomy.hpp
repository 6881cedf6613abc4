#pragma once

// Registry of the 26 atomic paraphrase types annotated in ETPC.

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apt::taxonomy {

// Ids are dense 0..25 in the order of the ETPC frequency table.
enum class ParaphraseType : std::uint8_t {
  AdditionDeletion,
  ChangeOfFormat,
  ChangeOfOrder,
  ConverseSubstitution,
  CoordinationChanges,
  DerivationalChanges,
  DiathesisAlternation,
  DirectIndirectStyle,
  Ellipsis,
  Entailment,
  Identity,
  InflectionalChanges,
  ModalVerbChanges,
  NegationSwitching,
  NonParaphrase,
  OppositePolarityContextual,
  OppositePolarityHabitual,
  PunctuationChanges,
  SamePolarityContextual,
  SamePolarityHabitual,
  SamePolarityNamedEntity,
  SemanticBased,
  SpellingChanges,
  SubordinationNesting,
  SyntaxDiscourse,
  SyntheticAnalytic,
};

inline constexpr std::size_t kTypeCount = 26;

constexpr std::size_t id(ParaphraseType t) noexcept { return static_cast<std::size_t>(t); }

// Canonical ETPC spelling, e.g. "Same Polarity Substitution (contextual)".
std::string_view label(ParaphraseType t) noexcept;

// Throws Error(InvalidArgument) when id >= kTypeCount.
ParaphraseType from_id(std::size_t id);

// Trimmed, ASCII case-insensitive match against the canonical labels.
// Throws Error(UnknownType) when nothing matches.
ParaphraseType parse_type(std::string_view text);

std::span<const ParaphraseType> all_types() noexcept;

// Set of types; iteration is always in ascending id order.
class TypeSet {
 public:
  TypeSet() = default;
  TypeSet(std::initializer_list<ParaphraseType> types) {
    for (auto t : types) insert(t);
  }

  void insert(ParaphraseType t) { bits_.set(id(t)); }
  void erase(ParaphraseType t) { bits_.reset(id(t)); }
  bool contains(ParaphraseType t) const { return bits_.test(id(t)); }
  std::size_t size() const noexcept { return bits_.count(); }
  bool empty() const noexcept { return bits_.none(); }

  bool is_subset_of(const TypeSet& other) const { return (bits_ & ~other.bits_).none(); }
  TypeSet intersect(const TypeSet& other) const { return TypeSet(bits_ & other.bits_); }
  TypeSet unite(const TypeSet& other) const { return TypeSet(bits_ | other.bits_); }

  std::vector<ParaphraseType> members() const;
  std::vector<std::string> labels() const;

  friend bool operator==(const TypeSet&, const TypeSet&) = default;

 private:
  explicit TypeSet(std::bitset<kTypeCount> bits) : bits_(bits) {}
  std::bitset<kTypeCount> bits_;
};

// The ten types the detection and ranking experiments focus on.
const TypeSet& top10();

// top10() in ascending id order; the index into this list is the logit slot
// used by detection models.
std::span<const ParaphraseType> top10_order() noexcept;

// Position of t in top10_order(), or -1.
int top10_slot(ParaphraseType t) noexcept;

}  // namespace apt::taxonomy
