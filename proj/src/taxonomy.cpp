#include "apt/taxonomy.hpp"

#include <algorithm>
#include <cctype>

#include "apt/error.hpp"

namespace apt::taxonomy {
namespace {

constexpr std::array<std::string_view, kTypeCount> kLabels = {
    "Addition/Deletion",
    "Change of format",
    "Change of order",
    "Converse substitution",
    "Coordination changes",
    "Derivational Changes",
    "Diathesis alternation",
    "Direct/indirect style alternations",
    "Ellipsis",
    "Entailment",
    "Identity",
    "Inflectional Changes",
    "Modal Verb Changes",
    "Negation switching",
    "Non-paraphrase",
    "Opposite polarity substitution (contextual)",
    "Opposite polarity substitution (habitual)",
    "Punctuation changes",
    "Same Polarity Substitution (contextual)",
    "Same Polarity Substitution (habitual)",
    "Same Polarity Substitution (named ent.)",
    "Semantic-based",
    "Spelling changes",
    "Subordination and nesting changes",
    "Syntax/discourse structure changes",
    "Synthetic/Analytic Substitution",
};

constexpr std::array<ParaphraseType, kTypeCount> make_all() {
  std::array<ParaphraseType, kTypeCount> out{};
  for (std::size_t i = 0; i < kTypeCount; ++i) out[i] = static_cast<ParaphraseType>(i);
  return out;
}

constexpr auto kAll = make_all();

constexpr std::array<ParaphraseType, 10> kTop10 = {
    ParaphraseType::AdditionDeletion,     ParaphraseType::ChangeOfOrder,
    ParaphraseType::DerivationalChanges,  ParaphraseType::InflectionalChanges,
    ParaphraseType::PunctuationChanges,   ParaphraseType::SamePolarityContextual,
    ParaphraseType::SemanticBased,        ParaphraseType::SpellingChanges,
    ParaphraseType::SubordinationNesting, ParaphraseType::SyntheticAnalytic,
};

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return std::ranges::equal(a, b, [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
  });
}

}  // namespace

std::string_view label(ParaphraseType t) noexcept { return kLabels[id(t)]; }

ParaphraseType from_id(std::size_t id) {
  if (id >= kTypeCount) throw Error(ErrorKind::InvalidArgument, "paraphrase type id " + std::to_string(id));
  return static_cast<ParaphraseType>(id);
}

ParaphraseType parse_type(std::string_view text) {
  const auto needle = trim(text);
  for (std::size_t i = 0; i < kTypeCount; ++i) {
    if (iequals(needle, kLabels[i])) return static_cast<ParaphraseType>(i);
  }
  throw Error(ErrorKind::UnknownType, std::string(text));
}

std::span<const ParaphraseType> all_types() noexcept { return kAll; }

std::vector<ParaphraseType> TypeSet::members() const {
  std::vector<ParaphraseType> out;
  out.reserve(size());
  for (std::size_t i = 0; i < kTypeCount; ++i) {
    if (bits_.test(i)) out.push_back(static_cast<ParaphraseType>(i));
  }
  return out;
}

std::vector<std::string> TypeSet::labels() const {
  std::vector<std::string> out;
  for (auto t : members()) out.emplace_back(label(t));
  return out;
}

const TypeSet& top10() {
  static const TypeSet set = [] {
    TypeSet s;
    for (auto t : kTop10) s.insert(t);
    return s;
  }();
  return set;
}

std::span<const ParaphraseType> top10_order() noexcept { return kTop10; }

int top10_slot(ParaphraseType t) noexcept {
  const auto it = std::ranges::find(kTop10, t);
  return it == kTop10.end() ? -1 : static_cast<int>(it - kTop10.begin());
}

}  // namespace apt::taxonomy
