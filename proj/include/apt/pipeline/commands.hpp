#pragma once

// One function per CLI subcommand. Every command writes its artifacts into
// an output (run) directory and records its resolved configuration in
// <out>/run.json under "commands".<name>, so reruns with the same inputs and
// run.json produce byte-identical files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apt/corpus.hpp"
#include "apt/evalstats.hpp"
#include "apt/pipeline/evalreport.hpp"
#include "apt/prefloss.hpp"
#include "apt/tinylm/train.hpp"

namespace apt::pipeline {

namespace fs = std::filesystem;

// Merges {"commands": {command: config}} into <out>/run.json. ingest and
// train are keyed per format / method ("ingest-etpc", "train-dpo").
void record_run(const fs::path& out, const std::string& command, const nlohmann::json& config);

// Throws MissingData when the path does not exist.
void require_file(const fs::path& path);

// Type, Total, Unique for all 26 types in taxonomy order.
Table type_count_table(const corpus::TypeCounts& counts);

// ---- ingest ---------------------------------------------------------------

// Formats: etpc, qqp (pairs without type annotations), apty, annotations,
// generations, references.
struct IngestOptions {
  fs::path input;
  std::string format = "etpc";
  fs::path out = ".";
  bool lenient = false;
};

struct IngestSummary {
  fs::path written;
  std::size_t records = 0;
  std::vector<corpus::LoadError> errors;
  std::optional<corpus::TypeCounts> counts;
};

// Writes the normalized records plus, for pair and preference corpora,
// type_counts_<format>.csv. Throws the first record error unless lenient.
IngestSummary cmd_ingest(const IngestOptions& o);

// ---- split ----------------------------------------------------------------

// kind "pairs" uses the multilabel split; kind "prefs" stratifies by target
// type. top10 keeps only the ten most frequent types (pairs lose their other
// labels, records left without any are dropped).
struct SplitOptions {
  fs::path input;
  std::string kind = "pairs";
  std::optional<double> ratio;  // 0.7 for pairs, 0.8 for prefs
  std::uint64_t seed = 0;
  bool top10 = false;
  fs::path out = ".";
};

struct SplitSummary {
  std::size_t train = 0;
  std::size_t test = 0;
  Table counts;  // Type, Train, Test
};

SplitSummary cmd_split(const SplitOptions& o);

// ---- pairs ----------------------------------------------------------------

struct PairsOptions {
  fs::path generations;
  fs::path annotations;
  fs::path out = ".";
};

std::size_t cmd_pairs(const PairsOptions& o);

// ---- train ----------------------------------------------------------------

struct TrainOverrides {
  std::optional<double> learning_rate, weight_decay, beta, max_grad_norm, warmup_ratio;
  std::optional<std::string> scheduler;
  std::optional<std::size_t> epochs, batch_size, patience;
};

// sft: pairs JSONL; dpo/ipo: prefs JSONL. Without init a fresh model is built
// over the training texts; the reference defaults to the starting model.
struct TrainOptions {
  std::string method = "dpo";
  fs::path data;
  std::optional<fs::path> init;
  std::optional<fs::path> reference;
  std::uint64_t seed = 0;
  TrainOverrides overrides;
  tinylm::ModelConfig model;
  fs::path out = ".";
};

// Documented defaults per method before overrides.
tinylm::TrainConfig default_train_config(const std::string& method);
tinylm::TrainConfig resolve_train_config(const std::string& method, const TrainOverrides& o, std::uint64_t seed);
nlohmann::json to_json(const tinylm::TrainConfig& c);

struct TrainSummary {
  tinylm::TrainConfig config;
  std::size_t examples = 0;
  Table curves;
};

TrainSummary cmd_train(const TrainOptions& o);

// ---- gen ------------------------------------------------------------------

// Items: JSONL objects with "original", "target_type" and "item_id" (or
// "id"); the first occurrence of an item id wins.
struct GenOptions {
  fs::path checkpoint;
  fs::path items;
  std::string model_id = "tinylm";
  std::size_t max_len = 64;
  std::uint64_t seed = 0;
  bool greedy = true;
  fs::path out = ".";
};

std::size_t cmd_gen(const GenOptions& o);

// ---- eval -----------------------------------------------------------------

struct EvalOptions {
  fs::path generations;
  fs::path annotations;
  std::optional<fs::path> references;
  fs::path out = ".";
};

EvalReport cmd_eval(const EvalOptions& o);

// ---- ptd-eval -------------------------------------------------------------

// Gold: pairs JSONL. Predictions come from `preds` or, with heuristic, from
// the rule-based detector run on the gold pairs.
struct PtdEvalOptions {
  fs::path gold;
  std::optional<fs::path> preds;
  bool heuristic = false;
  std::string classes = "top10";  // or "heuristic"
  double threshold = 0.5;
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 0;
  fs::path out = ".";
};

stats::F1Report cmd_ptd_eval(const PtdEvalOptions& o);

// ---- prefstats ------------------------------------------------------------

struct PrefStatsOptions {
  fs::path scored;
  std::string method = "dpo";
  double beta = 0.2;
  bool lenient = false;
  fs::path out = ".";
};

prefloss::PrefStats cmd_prefstats(const PrefStatsOptions& o);

// ---- report ---------------------------------------------------------------

// Renders every known CSV found in the run directory into report.md, in a
// fixed order. Returns the markdown.
std::string cmd_report(const fs::path& run_dir);

}  // namespace apt::pipeline
