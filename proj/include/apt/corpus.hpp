#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "apt/error.hpp"
#include "apt/normalize.hpp"
#include "apt/taxonomy.hpp"

namespace apt::corpus {

using taxonomy::ParaphraseType;
using taxonomy::TypeSet;

// One ETPC-style sentence pair. QQP-style binary data uses the same record
// with an empty type set.
struct SentencePairRecord {
  std::string id;
  std::string original;
  std::string paraphrase;
  TypeSet types;
  bool is_paraphrase = true;
};

struct PreferenceRecord {
  std::string id;
  std::string original;
  ParaphraseType target_type{};
  std::string chosen;
  std::string rejected;
};

// One human judgment. Rank 1 is best; invalid paraphrases always carry rank 4.
struct AnnotationRecord {
  std::string item_id;
  std::string model_id;
  ParaphraseType target_type{};
  std::string annotator_id;
  int rank = 4;
  bool valid = false;
};

// A model output for one evaluation item.
struct GenerationRecord {
  std::string item_id;
  std::string model_id;
  std::string original;
  ParaphraseType target_type{};
  std::string text;
};

struct ReferenceRecord {
  std::string item_id;
  std::string reference;
};

// Byte-exact generation prompt:
//   Given the following sentence, generate a paraphrase with the following type.\n
//   Sentence: ['<original>']\n
//   Paraphrase Types: ['<label1>', '<label2>'].\n
//   Answer:<space>
// Throws EmptyInput when original or types is empty.
std::string render_prompt(std::string_view original, std::span<const ParaphraseType> types);

// ---- JSONL loading -------------------------------------------------------

struct LoadError {
  std::size_t line_no = 0;  // 1-based
  ErrorKind kind = ErrorKind::Schema;
  std::string message;
};

// total counts every listed occurrence of a type, unique counts records.
struct TypeCount {
  std::size_t total = 0;
  std::size_t unique = 0;
};

using TypeCounts = std::array<TypeCount, taxonomy::kTypeCount>;

template <typename Record>
struct LoadResult {
  std::vector<Record> records;
  std::vector<LoadError> errors;
  TypeCounts counts{};
};

struct PairLoadOptions {
  // ETPC requires a non-empty type set on paraphrase records; binary-only
  // corpora (QQP) do not.
  bool require_types = true;
};

// Record-level problems (bad JSON, missing fields, unknown labels) are
// collected in the result; only an unreadable file throws (Io).
LoadResult<SentencePairRecord> load_etpc(const std::filesystem::path& path, PairLoadOptions options = {});
LoadResult<PreferenceRecord> load_apty_ranked(const std::filesystem::path& path);
LoadResult<AnnotationRecord> load_annotations(const std::filesystem::path& path);
LoadResult<GenerationRecord> load_generations(const std::filesystem::path& path);
LoadResult<ReferenceRecord> load_references(const std::filesystem::path& path);

// Single-object parsers used by the loaders. They throw Error(Schema) or
// Error(UnknownType); text fields come back normalized.
SentencePairRecord parse_pair(const nlohmann::json& j, PairLoadOptions options = {});
PreferenceRecord parse_preference(const nlohmann::json& j);
AnnotationRecord parse_annotation(const nlohmann::json& j);
GenerationRecord parse_generation(const nlohmann::json& j);

nlohmann::json to_json(const SentencePairRecord& r);
nlohmann::json to_json(const PreferenceRecord& r);
nlohmann::json to_json(const AnnotationRecord& r);
nlohmann::json to_json(const GenerationRecord& r);

// Writes one compact JSON object per line, LF terminated.
template <typename Record>
void write_jsonl(const std::filesystem::path& path, std::span<const Record> records);

// Reads non-empty lines of a text file, tolerating CRLF. Throws Io.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// ---- Preference pairs from rankings --------------------------------------

struct RankedItem {
  std::string original;
  ParaphraseType target_type{};
  std::map<std::string, std::string> texts;  // model_id -> generated text
};

using ItemTable = std::map<std::string, RankedItem>;

ItemTable items_from_generations(std::span<const GenerationRecord> generations);

struct ConsensusRank {
  std::string item_id;
  std::string model_id;
  double mean_rank = 0.0;
  std::size_t annotations = 0;
};

// Mean rank per (item, model), ordered by item then model id.
std::vector<ConsensusRank> consensus_ranks(std::span<const AnnotationRecord> annotations);

// One record per ordered pair (a, b) of models within an item whose
// consensus ranks satisfy rank(a) < rank(b). Equal ranks give no pair;
// texts that are identical after normalization are skipped.
// Throws MissingText when a ranked model has no text for the item.
std::vector<PreferenceRecord> pairs_from_rankings(std::span<const AnnotationRecord> annotations,
                                                  const ItemTable& items);

}  // namespace apt::corpus
