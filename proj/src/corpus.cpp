#include "apt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace apt::corpus {
namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorKind::Schema, "expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw Error(ErrorKind::Schema, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw Error(ErrorKind::Schema, std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

// Ids may arrive as numbers in converted dumps.
std::string require_id(const json& j, const char* key) {
  const json& v = require(j, key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorKind::Schema, std::string("field \"") + key + "\" must be a string or integer");
}

std::string require_text(const json& j, const char* key) {
  std::string text = normalize_text(require_string(j, key));
  if (text.empty()) throw Error(ErrorKind::Schema, std::string("field \"") + key + "\" is empty after normalization");
  return text;
}

template <typename Record, typename Parse, typename Count>
LoadResult<Record> load_jsonl(const std::filesystem::path& path, Parse parse, Count count) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  LoadResult<Record> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Record r = parse(j);
      count(result.counts, j, r);
      result.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      result.errors.push_back({line_no, ErrorKind::Schema, e.what()});
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.kind(), e.message()});
    }
  }
  return result;
}

void count_single(TypeCounts& counts, ParaphraseType t) {
  ++counts[taxonomy::id(t)].total;
  ++counts[taxonomy::id(t)].unique;
}

}  // namespace

std::string render_prompt(std::string_view original, std::span<const ParaphraseType> types) {
  if (original.empty()) throw Error(ErrorKind::EmptyInput, "render_prompt: empty sentence");
  if (types.empty()) throw Error(ErrorKind::EmptyInput, "render_prompt: no paraphrase types");
  std::string out = "Given the following sentence, generate a paraphrase with the following type.\nSentence: ['";
  out += original;
  out += "']\nParaphrase Types: [";
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (i > 0) out += ", ";
    out += '\'';
    out += taxonomy::label(types[i]);
    out += '\'';
  }
  out += "].\nAnswer: ";
  return out;
}

SentencePairRecord parse_pair(const json& j, PairLoadOptions options) {
  SentencePairRecord r;
  r.id = require_id(j, "id");
  r.original = require_text(j, "original");
  r.paraphrase = require_text(j, "paraphrase");
  const json& types = require(j, "types");
  if (!types.is_array()) throw Error(ErrorKind::Schema, "field \"types\" must be an array");
  for (const auto& t : types) {
    if (!t.is_string()) throw Error(ErrorKind::Schema, "type labels must be strings");
    r.types.insert(taxonomy::parse_type(t.get<std::string>()));
  }
  const json& flag = require(j, "is_paraphrase");
  if (!flag.is_boolean()) throw Error(ErrorKind::Schema, "field \"is_paraphrase\" must be a boolean");
  r.is_paraphrase = flag.get<bool>();
  if (options.require_types && r.is_paraphrase && r.types.empty()) {
    throw Error(ErrorKind::Schema, "paraphrase record without types");
  }
  return r;
}

PreferenceRecord parse_preference(const json& j) {
  PreferenceRecord r;
  r.id = require_id(j, "id");
  r.original = require_text(j, "original");
  r.target_type = taxonomy::parse_type(require_string(j, "target_type"));
  r.chosen = require_text(j, "chosen");
  r.rejected = require_text(j, "rejected");
  if (r.chosen == r.rejected) throw Error(ErrorKind::Schema, "chosen and rejected are identical");
  return r;
}

AnnotationRecord parse_annotation(const json& j) {
  AnnotationRecord r;
  r.item_id = require_id(j, "item_id");
  r.model_id = require_id(j, "model_id");
  r.target_type = taxonomy::parse_type(require_string(j, "target_type"));
  r.annotator_id = require_id(j, "annotator_id");
  const json& rank = require(j, "rank");
  if (!rank.is_number_integer()) throw Error(ErrorKind::Schema, "field \"rank\" must be an integer");
  r.rank = rank.get<int>();
  if (r.rank < 1 || r.rank > 4) throw Error(ErrorKind::Schema, "rank must be in 1..4");
  r.valid = r.rank < 4;
  if (const auto it = j.find("valid"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw Error(ErrorKind::Schema, "field \"valid\" must be a boolean");
    r.valid = it->get<bool>();
    if (!r.valid && r.rank != 4) throw Error(ErrorKind::Schema, "invalid paraphrase must carry rank 4");
  }
  return r;
}

GenerationRecord parse_generation(const json& j) {
  GenerationRecord r;
  r.item_id = require_id(j, "item_id");
  r.model_id = require_id(j, "model_id");
  r.original = require_text(j, "original");
  r.target_type = taxonomy::parse_type(require_string(j, "target_type"));
  // Empty generations are legal (a model may emit nothing).
  r.text = normalize_text(require_string(j, "text"));
  return r;
}

LoadResult<SentencePairRecord> load_etpc(const std::filesystem::path& path, PairLoadOptions options) {
  return load_jsonl<SentencePairRecord>(
      path, [options](const json& j) { return parse_pair(j, options); },
      [](TypeCounts& counts, const json& j, const SentencePairRecord& r) {
        for (const auto& t : j.at("types")) ++counts[taxonomy::id(taxonomy::parse_type(t.get<std::string>()))].total;
        for (auto t : r.types.members()) ++counts[taxonomy::id(t)].unique;
      });
}

LoadResult<PreferenceRecord> load_apty_ranked(const std::filesystem::path& path) {
  auto result = load_jsonl<PreferenceRecord>(path, parse_preference,
                                             [](TypeCounts&, const json&, const PreferenceRecord&) {});
  // total = records per type, unique = distinct originals per type.
  std::array<std::set<std::string>, taxonomy::kTypeCount> originals;
  for (const auto& r : result.records) {
    ++result.counts[taxonomy::id(r.target_type)].total;
    originals[taxonomy::id(r.target_type)].insert(r.original);
  }
  for (std::size_t i = 0; i < taxonomy::kTypeCount; ++i) result.counts[i].unique = originals[i].size();
  return result;
}

LoadResult<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  return load_jsonl<AnnotationRecord>(path, parse_annotation,
                                      [](TypeCounts& c, const json&, const AnnotationRecord& r) {
                                        count_single(c, r.target_type);
                                      });
}

LoadResult<GenerationRecord> load_generations(const std::filesystem::path& path) {
  return load_jsonl<GenerationRecord>(path, parse_generation,
                                      [](TypeCounts& c, const json&, const GenerationRecord& r) {
                                        count_single(c, r.target_type);
                                      });
}

LoadResult<ReferenceRecord> load_references(const std::filesystem::path& path) {
  return load_jsonl<ReferenceRecord>(
      path,
      [](const json& j) { return ReferenceRecord{require_id(j, "item_id"), require_text(j, "reference")}; },
      [](TypeCounts&, const json&, const ReferenceRecord&) {});
}

json to_json(const SentencePairRecord& r) {
  return json{{"id", r.id},
              {"original", r.original},
              {"paraphrase", r.paraphrase},
              {"types", r.types.labels()},
              {"is_paraphrase", r.is_paraphrase}};
}

json to_json(const PreferenceRecord& r) {
  return json{{"id", r.id},
              {"original", r.original},
              {"target_type", std::string(taxonomy::label(r.target_type))},
              {"chosen", r.chosen},
              {"rejected", r.rejected}};
}

json to_json(const AnnotationRecord& r) {
  return json{{"item_id", r.item_id},
              {"model_id", r.model_id},
              {"target_type", std::string(taxonomy::label(r.target_type))},
              {"annotator_id", r.annotator_id},
              {"rank", r.rank}};
}

json to_json(const GenerationRecord& r) {
  return json{{"item_id", r.item_id},
              {"model_id", r.model_id},
              {"original", r.original},
              {"target_type", std::string(taxonomy::label(r.target_type))},
              {"text", r.text}};
}

template <typename Record>
void write_jsonl(const std::filesystem::path& path, std::span<const Record> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

template void write_jsonl<SentencePairRecord>(const std::filesystem::path&, std::span<const SentencePairRecord>);
template void write_jsonl<PreferenceRecord>(const std::filesystem::path&, std::span<const PreferenceRecord>);
template void write_jsonl<AnnotationRecord>(const std::filesystem::path&, std::span<const AnnotationRecord>);
template void write_jsonl<GenerationRecord>(const std::filesystem::path&, std::span<const GenerationRecord>);

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

ItemTable items_from_generations(std::span<const GenerationRecord> generations) {
  ItemTable items;
  for (const auto& g : generations) {
    auto& item = items[g.item_id];
    item.original = g.original;
    item.target_type = g.target_type;
    item.texts[g.model_id] = g.text;
  }
  return items;
}

std::vector<ConsensusRank> consensus_ranks(std::span<const AnnotationRecord> annotations) {
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> sums;
  for (const auto& a : annotations) {
    auto& [sum, n] = sums[{a.item_id, a.model_id}];
    sum += a.rank;
    ++n;
  }
  std::vector<ConsensusRank> out;
  out.reserve(sums.size());
  for (const auto& [key, acc] : sums) {
    out.push_back({key.first, key.second, acc.first / static_cast<double>(acc.second), acc.second});
  }
  return out;
}

std::vector<PreferenceRecord> pairs_from_rankings(std::span<const AnnotationRecord> annotations,
                                                  const ItemTable& items) {
  std::map<std::string, std::vector<ConsensusRank>> by_item;
  for (auto& c : consensus_ranks(annotations)) by_item[c.item_id].push_back(std::move(c));

  std::vector<PreferenceRecord> pairs;
  for (auto& [item_id, ranks] : by_item) {
    const auto item_it = items.find(item_id);
    if (item_it == items.end()) throw Error(ErrorKind::MissingText, "no generations for item " + item_id);
    const RankedItem& item = item_it->second;
    auto text_of = [&](const std::string& model_id) -> const std::string& {
      const auto it = item.texts.find(model_id);
      if (it == item.texts.end()) throw Error(ErrorKind::MissingText, item_id + "/" + model_id);
      return it->second;
    };
    for (const auto& r : ranks) text_of(r.model_id);

    std::ranges::stable_sort(ranks, [](const ConsensusRank& a, const ConsensusRank& b) {
      return a.mean_rank < b.mean_rank;
    });
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      for (std::size_t k = i + 1; k < ranks.size(); ++k) {
        if (!(ranks[i].mean_rank < ranks[k].mean_rank)) continue;
        const std::string chosen = normalize_text(text_of(ranks[i].model_id));
        const std::string rejected = normalize_text(text_of(ranks[k].model_id));
        if (chosen == rejected) continue;
        pairs.push_back({item_id + ":" + ranks[i].model_id + ">" + ranks[k].model_id, normalize_text(item.original),
                         item.target_type, chosen, rejected});
      }
    }
  }
  return pairs;
}

}  // namespace apt::corpus
