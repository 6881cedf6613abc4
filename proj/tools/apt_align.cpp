// apt-align: command-line front end for the paraphrase-type alignment toolkit.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "apt/error.hpp"
#include "apt/pipeline/commands.hpp"
#include "apt/ptd.hpp"

namespace {

using namespace apt;
using namespace apt::pipeline;

void print_table(const Table& t) { std::cout << to_markdown(t); }

template <typename T>
void optional_flag(CLI::App* cmd, const std::string& name, std::optional<T>& target, const std::string& help) {
  cmd->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paraphrase-type alignment toolkit"};
  app.name("apt-align");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML config file; [subcommand] sections hold subcommand options");

  std::uint64_t seed = 0;
  std::string out = ".";
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--out", out, "Run directory for all artifacts")->capture_default_str();

  std::optional<std::string> ref_path;

  // ingest
  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate and normalize a corpus file into the run directory");
  c_ingest->add_option("input", ingest.input, "Input JSONL")->required();
  c_ingest->add_option("--format", ingest.format, "etpc|qqp|apty|annotations|generations|references")
      ->check(CLI::IsMember({"etpc", "qqp", "apty", "annotations", "generations", "references"}))
      ->capture_default_str();
  c_ingest->add_flag("--lenient", ingest.lenient, "Skip malformed records instead of failing");

  // split
  SplitOptions split;
  auto* c_split = app.add_subcommand("split", "Stratified train/test split with manifest");
  c_split->add_option("input", split.input, "pairs.jsonl or prefs.jsonl")->required();
  c_split->add_option("--kind", split.kind, "pairs|prefs")->check(CLI::IsMember({"pairs", "prefs"}))->capture_default_str();
  optional_flag(c_split, "--ratio", split.ratio, "Train fraction (default 0.7 pairs, 0.8 prefs)");
  c_split->add_flag("--top10", split.top10, "Keep only the ten most frequent types");

  // pairs
  PairsOptions pairs;
  auto* c_pairs = app.add_subcommand("pairs", "Build chosen/rejected pairs from human rankings");
  c_pairs->add_option("--generations", pairs.generations, "generations.jsonl")->required();
  c_pairs->add_option("--annotations", pairs.annotations, "annotations.jsonl")->required();

  // train
  TrainOptions train;
  std::optional<std::string> init_path;
  auto* c_train = app.add_subcommand("train", "Train the tiny model with SFT, DPO or IPO");
  c_train->add_option("method", train.method, "sft|dpo|ipo")->required()->check(CLI::IsMember({"sft", "dpo", "ipo"}));
  c_train->add_option("--data", train.data, "pairs.jsonl (sft) or prefs.jsonl (dpo/ipo)")->required();
  optional_flag(c_train, "--init", init_path, "Starting checkpoint");
  optional_flag(c_train, "--reference", ref_path, "Frozen reference checkpoint (default: starting model)");
  optional_flag(c_train, "--lr", train.overrides.learning_rate, "Learning rate");
  optional_flag(c_train, "--weight-decay", train.overrides.weight_decay, "Decoupled weight decay");
  optional_flag(c_train, "--beta", train.overrides.beta, "Preference temperature");
  optional_flag(c_train, "--max-grad-norm", train.overrides.max_grad_norm, "Global gradient clip");
  optional_flag(c_train, "--warmup-ratio", train.overrides.warmup_ratio, "Linear warmup fraction");
  optional_flag(c_train, "--scheduler", train.overrides.scheduler, "cosine|plateau");
  optional_flag(c_train, "--epochs", train.overrides.epochs, "Epochs");
  optional_flag(c_train, "--batch-size", train.overrides.batch_size, "Batch size");
  optional_flag(c_train, "--patience", train.overrides.patience, "Plateau patience in epochs");
  c_train->add_option("--embed-dim", train.model.embed_dim, "Embedding width")->capture_default_str();
  c_train->add_option("--hidden-dim", train.model.hidden_dim, "GRU state width")->capture_default_str();
  c_train->add_option("--context-len", train.model.context_len, "Longest scored sequence")->capture_default_str();

  // gen
  GenOptions gen;
  bool sample = false;
  auto* c_gen = app.add_subcommand("gen", "Generate paraphrases from a checkpoint");
  c_gen->add_option("--checkpoint", gen.checkpoint, "model.json")->required();
  c_gen->add_option("--items", gen.items, "JSONL with item_id, original, target_type")->required();
  c_gen->add_option("--model-id", gen.model_id, "Model id written into generations")->capture_default_str();
  c_gen->add_option("--max-len", gen.max_len, "Maximum tokens per generation")->capture_default_str();
  c_gen->add_flag("--sample", sample, "Seeded sampling instead of greedy decoding");

  // eval
  EvalOptions eval;
  std::optional<std::string> refs_path;
  auto* c_eval = app.add_subcommand("eval", "Human-judgment statistics and metric correlations");
  c_eval->add_option("--generations", eval.generations, "generations.jsonl")->required();
  c_eval->add_option("--annotations", eval.annotations, "annotations.jsonl")->required();
  optional_flag(c_eval, "--references", refs_path, "references.jsonl");

  // ptd-eval
  PtdEvalOptions ptd_eval;
  std::optional<std::string> preds_path;
  auto* c_ptd = app.add_subcommand("ptd-eval", "Paraphrase type detection F1 with bootstrap intervals");
  c_ptd->add_option("--gold", ptd_eval.gold, "Gold pairs.jsonl")->required();
  optional_flag(c_ptd, "--preds", preds_path, "ptd_preds.jsonl");
  c_ptd->add_flag("--heuristic", ptd_eval.heuristic, "Use the rule-based detector");
  c_ptd->add_option("--classes", ptd_eval.classes, "top10|heuristic")
      ->check(CLI::IsMember({"top10", "heuristic"}))
      ->capture_default_str();
  c_ptd->add_option("--threshold", ptd_eval.threshold, "Sigmoid decision threshold")->capture_default_str();
  c_ptd->add_option("--resamples", ptd_eval.n_resamples, "Bootstrap resamples")->capture_default_str();

  // prefstats
  PrefStatsOptions prefstats;
  auto* c_prefstats = app.add_subcommand("prefstats", "Loss, margin and accuracy of a scored.jsonl file");
  c_prefstats->add_option("scored", prefstats.scored, "scored.jsonl")->required();
  c_prefstats->add_option("--method", prefstats.method, "dpo|ipo")->check(CLI::IsMember({"dpo", "ipo"}))->capture_default_str();
  c_prefstats->add_option("--beta", prefstats.beta, "Preference temperature")->capture_default_str();
  c_prefstats->add_flag("--lenient", prefstats.lenient, "Skip malformed lines instead of failing");

  // report
  auto* c_report = app.add_subcommand("report", "Render every result table in the run directory to report.md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_ingest->parsed()) {
      ingest.out = out;
      const auto s = cmd_ingest(ingest);
      std::cout << "wrote " << s.records << " records to " << s.written.string() << "\n";
      for (const auto& e : s.errors) std::cerr << "line " << e.line_no << ": " << e.message << "\n";
      if (s.counts) print_table(type_count_table(*s.counts));
    } else if (c_split->parsed()) {
      split.out = out;
      split.seed = seed;
      const auto s = cmd_split(split);
      std::cout << "train " << s.train << ", test " << s.test << "\n";
      print_table(s.counts);
    } else if (c_pairs->parsed()) {
      pairs.out = out;
      std::cout << "wrote " << cmd_pairs(pairs) << " preference pairs\n";
    } else if (c_train->parsed()) {
      train.out = out;
      train.seed = seed;
      if (init_path) train.init = *init_path;
      if (ref_path) train.reference = *ref_path;
      const auto s = cmd_train(train);
      std::cout << "trained on " << s.examples << " examples\n";
      print_table(s.curves);
    } else if (c_gen->parsed()) {
      gen.out = out;
      gen.seed = seed;
      gen.greedy = !sample;
      std::cout << "generated " << cmd_gen(gen) << " paraphrases\n";
    } else if (c_eval->parsed()) {
      eval.out = out;
      if (refs_path) eval.references = *refs_path;
      const auto r = cmd_eval(eval);
      print_table(accuracy_table(r));
      print_table(rank_distribution_table(r));
      print_table(statistics_table(r));
    } else if (c_ptd->parsed()) {
      ptd_eval.out = out;
      ptd_eval.seed = seed;
      if (preds_path) ptd_eval.preds = *preds_path;
      const auto r = cmd_ptd_eval(ptd_eval);
      std::cout << ptd::to_csv(r);
      std::printf("macro F1 %.4f, weighted F1 %.4f\n", r.macro_f1, r.weighted_f1);
    } else if (c_prefstats->parsed()) {
      prefstats.out = out;
      const auto s = cmd_prefstats(prefstats);
      std::printf("loss %.6f margin %.6f accuracy %.6f\n", s.mean_loss, s.reward_margin, s.reward_accuracy);
    } else if (c_report->parsed()) {
      cmd_report(out);
      std::cout << "wrote " << (std::filesystem::path(out) / "report.md").string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "apt-align: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "apt-align: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
