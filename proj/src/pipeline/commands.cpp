#include "apt/pipeline/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "apt/error.hpp"
#include "apt/normalize.hpp"
#include "apt/ptd.hpp"
#include "apt/split.hpp"
#include "apt/tinylm/checkpoint.hpp"

namespace apt::pipeline {
namespace {

using nlohmann::json;

std::string first_error(const std::vector<corpus::LoadError>& errors, const fs::path& path) {
  const auto& e = errors.front();
  return path.string() + ":" + std::to_string(e.line_no) + ": " + e.message + " (" +
         std::to_string(errors.size()) + " bad record(s))";
}

template <typename R>
void reject_errors(const corpus::LoadResult<R>& r, const fs::path& path, bool lenient) {
  if (!r.errors.empty() && !lenient) throw Error(r.errors.front().kind, first_error(r.errors, path));
}

template <typename R>
corpus::LoadResult<R> strict(corpus::LoadResult<R> r, const fs::path& path) {
  reject_errors(r, path, false);
  return r;
}

json errors_json(const std::vector<corpus::LoadError>& errors) {
  json out = json::array();
  for (const auto& e : errors) out.push_back({{"line", e.line_no}, {"kind", to_string(e.kind)}, {"message", e.message}});
  return out;
}

void write_references(const fs::path& path, std::span<const corpus::ReferenceRecord> refs) {
  std::string text;
  for (const auto& r : refs) text += json{{"item_id", r.item_id}, {"reference", r.reference}}.dump() + "\n";
  write_text(path, text);
}

template <typename R>
void write_records(const fs::path& path, const std::vector<R>& records) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  corpus::write_jsonl<R>(path, std::span<const R>(records));
}

std::vector<tinylm::SftExample> sft_examples(std::span<const corpus::SentencePairRecord> records) {
  std::vector<tinylm::SftExample> out;
  for (const auto& r : records) {
    if (!r.is_paraphrase || r.types.empty()) continue;
    const auto types = r.types.members();
    out.emplace_back(corpus::render_prompt(r.original, types), r.paraphrase);
  }
  return out;
}

tinylm::TinyModel fresh_model(const std::vector<std::string>& texts, tinylm::ModelConfig config, std::uint64_t seed) {
  return tinylm::init_model(tinylm::Vocab::build(texts), config, seed);
}

Table sft_curve_table(const std::vector<double>& losses) {
  Table t{{"epoch", "loss"}, {}};
  for (std::size_t e = 0; e < losses.size(); ++e) t.rows.push_back({std::to_string(e + 1), fmt_g(losses[e])});
  return t;
}

Table pref_curve_table(const std::vector<prefloss::PrefStats>& curve) {
  Table t{{"epoch", "loss", "reward_margin", "reward_accuracy"}, {}};
  for (std::size_t e = 0; e < curve.size(); ++e) {
    t.rows.push_back({std::to_string(e + 1), fmt_g(curve[e].mean_loss), fmt_g(curve[e].reward_margin),
                      fmt_g(curve[e].reward_accuracy)});
  }
  return t;
}

}  // namespace

void record_run(const fs::path& out, const std::string& command, const json& config) {
  const auto path = out / "run.json";
  json run = {{"format", "apt-run"}, {"version", 1}, {"commands", json::object()}};
  if (fs::exists(path)) {
    try {
      auto existing = json::parse(read_text(path));
      if (existing.is_object() && existing.contains("commands") && existing["commands"].is_object()) {
        run["commands"] = existing["commands"];
      }
    } catch (const json::exception&) {
      // A corrupt run.json is replaced.
    }
  }
  run["commands"][command] = config;
  write_text(path, run.dump(2) + "\n");
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingData, "input not found: " + path.string());
}

Table type_count_table(const corpus::TypeCounts& counts) {
  Table t{{"Type", "Total", "Unique"}, {}};
  for (auto type : taxonomy::all_types()) {
    const auto& c = counts[taxonomy::id(type)];
    t.rows.push_back({std::string(taxonomy::label(type)), std::to_string(c.total), std::to_string(c.unique)});
  }
  return t;
}

IngestSummary cmd_ingest(const IngestOptions& o) {
  require_file(o.input);
  IngestSummary s;
  auto finish = [&](auto&& result, const std::string& name) {
    reject_errors(result, o.input, o.lenient);
    s.records = result.records.size();
    s.errors = result.errors;
    s.written = o.out / name;
    return std::move(result);
  };
  if (o.format == "etpc" || o.format == "qqp") {
    auto r = finish(corpus::load_etpc(o.input, {.require_types = o.format == "etpc"}), "pairs.jsonl");
    write_records(s.written, r.records);
    s.counts = r.counts;
  } else if (o.format == "apty") {
    auto r = finish(corpus::load_apty_ranked(o.input), "prefs.jsonl");
    write_records(s.written, r.records);
    s.counts = r.counts;
  } else if (o.format == "annotations") {
    auto r = finish(corpus::load_annotations(o.input), "annotations.jsonl");
    write_records(s.written, r.records);
  } else if (o.format == "generations") {
    auto r = finish(corpus::load_generations(o.input), "generations.jsonl");
    write_records(s.written, r.records);
  } else if (o.format == "references") {
    auto r = finish(corpus::load_references(o.input), "references.jsonl");
    write_references(s.written, r.records);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown ingest format: " + o.format);
  }
  if (s.counts) write_text(o.out / ("type_counts_" + o.format + ".csv"), to_csv(type_count_table(*s.counts)));
  record_run(o.out, "ingest-" + o.format,
             {{"input", o.input.string()},
              {"format", o.format},
              {"lenient", o.lenient},
              {"records", s.records},
              {"rejected", errors_json(s.errors)}});
  return s;
}

SplitSummary cmd_split(const SplitOptions& o) {
  require_file(o.input);
  SplitSummary s;
  const double ratio = o.ratio.value_or(o.kind == "prefs" ? 0.8 : 0.7);
  std::vector<std::string> train_ids, test_ids;
  std::map<taxonomy::ParaphraseType, std::pair<std::size_t, std::size_t>> per_type;

  if (o.kind == "pairs") {
    auto records = strict(corpus::load_etpc(o.input, {.require_types = false}), o.input).records;
    if (o.top10) {
      std::vector<corpus::SentencePairRecord> kept;
      for (auto& r : records) {
        r.types = r.types.intersect(taxonomy::top10());
        if (!r.types.empty()) kept.push_back(std::move(r));
      }
      records = std::move(kept);
    }
    const auto split = corpus::split_multilabel(records, ratio, o.seed);
    for (const auto& r : split.train) {
      train_ids.push_back(r.id);
      for (auto t : r.types.members()) ++per_type[t].first;
    }
    for (const auto& r : split.test) {
      test_ids.push_back(r.id);
      for (auto t : r.types.members()) ++per_type[t].second;
    }
    write_records(o.out / "train.jsonl", split.train);
    write_records(o.out / "test.jsonl", split.test);
  } else if (o.kind == "prefs") {
    auto records = strict(corpus::load_apty_ranked(o.input), o.input).records;
    if (o.top10) {
      std::erase_if(records, [](const auto& r) { return !taxonomy::top10().contains(r.target_type); });
    }
    const auto split = corpus::split_stratified(std::span<const corpus::PreferenceRecord>(records), ratio,
                                                [](const auto& r) { return std::string(taxonomy::label(r.target_type)); },
                                                o.seed);
    for (const auto& r : split.train) {
      train_ids.push_back(r.id);
      ++per_type[r.target_type].first;
    }
    for (const auto& r : split.test) {
      test_ids.push_back(r.id);
      ++per_type[r.target_type].second;
    }
    write_records(o.out / "train.jsonl", split.train);
    write_records(o.out / "test.jsonl", split.test);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown split kind: " + o.kind);
  }

  s.train = train_ids.size();
  s.test = test_ids.size();
  s.counts = {{"Type", "Train", "Test"}, {}};
  json types = json::object();
  for (const auto& [t, c] : per_type) {
    s.counts.rows.push_back({std::string(taxonomy::label(t)), std::to_string(c.first), std::to_string(c.second)});
    types[std::string(taxonomy::label(t))] = {{"train", c.first}, {"test", c.second}};
  }
  const json manifest = {{"input", o.input.filename().string()},
                         {"kind", o.kind},
                         {"ratio", ratio},
                         {"seed", o.seed},
                         {"top10", o.top10},
                         {"train", train_ids},
                         {"test", test_ids},
                         {"types", types}};
  write_text(o.out / "manifest.json", manifest.dump(2) + "\n");
  write_text(o.out / "split_counts.csv", to_csv(s.counts));
  record_run(o.out, "split",
             {{"input", o.input.string()}, {"kind", o.kind}, {"ratio", ratio}, {"seed", o.seed}, {"top10", o.top10}});
  return s;
}

std::size_t cmd_pairs(const PairsOptions& o) {
  require_file(o.generations);
  require_file(o.annotations);
  const auto gens = strict(corpus::load_generations(o.generations), o.generations).records;
  const auto anns = strict(corpus::load_annotations(o.annotations), o.annotations).records;
  if (anns.empty()) throw Error(ErrorKind::MissingAnnotations, "no annotations in " + o.annotations.string());
  const auto items = corpus::items_from_generations(gens);
  const auto pairs = corpus::pairs_from_rankings(anns, items);
  write_records(o.out / "prefs.jsonl", pairs);
  record_run(o.out, "pairs",
             {{"generations", o.generations.string()}, {"annotations", o.annotations.string()}, {"pairs", pairs.size()}});
  return pairs.size();
}

tinylm::TrainConfig default_train_config(const std::string& method) {
  tinylm::TrainConfig c;
  if (method == "sft") {
    c.learning_rate = 1e-2;
    c.max_grad_norm = 1.0;
  } else if (method == "dpo") {
    c.learning_rate = 1e-6;
    c.weight_decay = 0.4;
    c.beta = 0.2;
    c.max_grad_norm = 200.0;
    c.scheduler = tinylm::Scheduler::Cosine;
  } else if (method == "ipo") {
    c.learning_rate = 5e-6;
    c.weight_decay = 0.02;
    c.warmup_ratio = 0.2;
    c.beta = 0.2;
    c.max_grad_norm = 1.0;
    c.scheduler = tinylm::Scheduler::Plateau;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown training method: " + method);
  }
  return c;
}

tinylm::TrainConfig resolve_train_config(const std::string& method, const TrainOverrides& o, std::uint64_t seed) {
  auto c = default_train_config(method);
  if (o.learning_rate) c.learning_rate = *o.learning_rate;
  if (o.weight_decay) c.weight_decay = *o.weight_decay;
  if (o.beta) c.beta = *o.beta;
  if (o.max_grad_norm) c.max_grad_norm = *o.max_grad_norm;
  if (o.warmup_ratio) c.warmup_ratio = *o.warmup_ratio;
  if (o.scheduler) c.scheduler = tinylm::parse_scheduler(*o.scheduler);
  if (o.epochs) c.epochs = *o.epochs;
  if (o.batch_size) c.batch_size = *o.batch_size;
  if (o.patience) c.patience = *o.patience;
  c.seed = seed;
  c.validate();
  return c;
}

json to_json(const tinylm::TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"beta", c.beta},
          {"max_grad_norm", c.max_grad_norm},
          {"scheduler", tinylm::to_string(c.scheduler)},
          {"warmup_ratio", c.warmup_ratio},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"patience", c.patience},
          {"seed", c.seed}};
}

TrainSummary cmd_train(const TrainOptions& o) {
  require_file(o.data);
  if (o.init) require_file(*o.init);
  if (o.reference) require_file(*o.reference);
  TrainSummary s;
  s.config = resolve_train_config(o.method, o.overrides, o.seed);
  fs::create_directories(o.out);

  std::optional<tinylm::TinyModel> start;
  if (o.init) start = tinylm::load_checkpoint(*o.init);

  json data_info;
  if (o.method == "sft") {
    const auto records = strict(corpus::load_etpc(o.data, {.require_types = false}), o.data).records;
    const auto examples = sft_examples(records);
    if (examples.empty()) throw Error(ErrorKind::EmptyCorpus, "no typed paraphrase pairs in " + o.data.string());
    if (!start) {
      std::vector<std::string> texts;
      for (const auto& [p, t] : examples) {
        texts.push_back(p);
        texts.push_back(t);
      }
      start = fresh_model(texts, o.model, o.seed);
    }
    auto result = tinylm::train_sft(std::move(*start), examples, s.config);
    s.examples = examples.size();
    s.curves = sft_curve_table(result.loss_curve);
    tinylm::save_checkpoint(result.model, o.out / "model.json");
  } else {
    const auto method = prefloss::parse_method(o.method);
    const auto records = strict(corpus::load_apty_ranked(o.data), o.data).records;
    if (records.empty()) throw Error(ErrorKind::EmptyPairs, "no preference pairs in " + o.data.string());
    std::vector<tinylm::PrefExample> examples;
    for (const auto& r : records) examples.push_back(tinylm::to_example(r));
    if (!start) {
      std::vector<std::string> texts;
      for (const auto& e : examples) texts.insert(texts.end(), {e.prompt, e.chosen, e.rejected});
      start = fresh_model(texts, o.model, o.seed);
    }
    const tinylm::TinyModel reference = o.reference ? tinylm::load_checkpoint(*o.reference) : *start;
    auto result = tinylm::train_pref(std::move(*start), reference, examples, method, s.config);
    s.examples = examples.size();
    s.curves = pref_curve_table(result.curve);
    tinylm::save_checkpoint(result.model, o.out / "model.json");
  }
  write_text(o.out / "curves.csv", to_csv(s.curves));
  json model = {{"embed_dim", o.model.embed_dim}, {"hidden_dim", o.model.hidden_dim}, {"context_len", o.model.context_len}};
  record_run(o.out, "train-" + o.method,
             {{"method", o.method},
              {"data", o.data.string()},
              {"init", o.init ? json(o.init->string()) : json(nullptr)},
              {"reference", o.reference ? json(o.reference->string()) : json(nullptr)},
              {"examples", s.examples},
              {"model", model},
              {"config", to_json(s.config)}});
  return s;
}

std::size_t cmd_gen(const GenOptions& o) {
  require_file(o.checkpoint);
  require_file(o.items);
  const auto model = tinylm::load_checkpoint(o.checkpoint);
  std::vector<corpus::GenerationRecord> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& line : corpus::read_lines(o.items)) {
    ++line_no;
    try {
      const auto j = json::parse(line);
      corpus::GenerationRecord g;
      const auto& id = j.contains("item_id") ? j.at("item_id") : j.at("id");
      g.item_id = id.is_string() ? id.get<std::string>() : id.dump();
      if (!seen.insert(g.item_id).second) continue;
      g.model_id = o.model_id;
      g.original = corpus::normalize_text(j.at("original").get<std::string>());
      g.target_type = taxonomy::parse_type(j.at("target_type").get<std::string>());
      const std::array<taxonomy::ParaphraseType, 1> types{g.target_type};
      g.text = tinylm::generate(model, corpus::render_prompt(g.original, types), o.max_len, o.seed, o.greedy);
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Schema, o.items.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  write_records(o.out / "generations.jsonl", out);
  record_run(o.out, "gen",
             {{"checkpoint", o.checkpoint.string()},
              {"items", o.items.string()},
              {"model_id", o.model_id},
              {"max_len", o.max_len},
              {"seed", o.seed},
              {"greedy", o.greedy},
              {"generated", out.size()}});
  return out.size();
}

EvalReport cmd_eval(const EvalOptions& o) {
  require_file(o.generations);
  require_file(o.annotations);
  if (o.references) require_file(*o.references);
  const auto gens = strict(corpus::load_generations(o.generations), o.generations).records;
  const auto anns = strict(corpus::load_annotations(o.annotations), o.annotations).records;
  if (anns.empty()) throw Error(ErrorKind::MissingAnnotations, "no annotations in " + o.annotations.string());
  std::vector<corpus::ReferenceRecord> refs;
  if (o.references) refs = strict(corpus::load_references(*o.references), *o.references).records;
  auto report = run_eval(gens, anns, refs);
  write_text(o.out / "accuracy.csv", to_csv(accuracy_table(report)));
  write_text(o.out / "accuracy_by_type.csv", to_csv(accuracy_by_type_table(report)));
  write_text(o.out / "rank_distribution.csv", to_csv(rank_distribution_table(report)));
  write_text(o.out / "rank_counts.csv", to_csv(rank_count_table(report)));
  write_text(o.out / "statistics.csv", to_csv(statistics_table(report)));
  if (!report.scores.empty()) {
    write_text(o.out / "correlations.csv", to_csv(correlation_table(report)));
    write_text(o.out / "metric_scores.csv", to_csv(metric_scores_table(report)));
  }
  record_run(o.out, "eval",
             {{"generations", o.generations.string()},
              {"annotations", o.annotations.string()},
              {"references", o.references ? json(o.references->string()) : json(nullptr)}});
  return report;
}

stats::F1Report cmd_ptd_eval(const PtdEvalOptions& o) {
  require_file(o.gold);
  if (!o.preds && !o.heuristic) throw Error(ErrorKind::MissingData, "ptd-eval needs --preds or --heuristic");
  if (o.preds) require_file(*o.preds);
  const auto gold_records = strict(corpus::load_etpc(o.gold, {.require_types = false}), o.gold).records;
  if (gold_records.empty()) throw Error(ErrorKind::EmptyInput, "no gold pairs in " + o.gold.string());

  std::vector<taxonomy::TypeSet> gold, predicted;
  if (o.preds) {
    const auto preds = strict(ptd::load_predictions(*o.preds), *o.preds).records;
    std::map<std::string, const ptd::Prediction*> by_id;
    for (const auto& p : preds) by_id.emplace(p.id, &p);
    for (const auto& g : gold_records) {
      const auto it = by_id.find(g.id);
      if (it == by_id.end()) throw Error(ErrorKind::MissingData, "no prediction for gold id " + g.id);
      gold.push_back(g.types);
      predicted.push_back(it->second->resolve(o.threshold));
    }
  } else {
    for (const auto& g : gold_records) {
      gold.push_back(g.types);
      predicted.push_back(ptd::heuristic_detect(g));
    }
  }
  ptd::EvalOptions eo;
  if (o.classes == "heuristic") {
    eo.classes = ptd::heuristic_classes();
  } else if (o.classes != "top10") {
    throw Error(ErrorKind::InvalidArgument, "unknown class set: " + o.classes);
  }
  eo.n_resamples = o.n_resamples;
  auto report = ptd::evaluate_ptd(predicted, gold, o.seed, eo);
  write_text(o.out / "ptd_f1.csv", ptd::to_csv(report));
  const Table summary{{"Metric", "Value"},
                      {{"Examples", std::to_string(gold.size())},
                       {"Macro F1", fmt(report.macro_f1)},
                       {"Weighted F1", fmt(report.weighted_f1)}}};
  write_text(o.out / "ptd_summary.csv", to_csv(summary));
  record_run(o.out, "ptd-eval",
             {{"gold", o.gold.string()},
              {"preds", o.preds ? json(o.preds->string()) : json(nullptr)},
              {"heuristic", o.heuristic},
              {"classes", o.classes},
              {"threshold", o.threshold},
              {"n_resamples", o.n_resamples},
              {"seed", o.seed}});
  return report;
}

prefloss::PrefStats cmd_prefstats(const PrefStatsOptions& o) {
  require_file(o.scored);
  const auto method = prefloss::parse_method(o.method);
  const auto load = prefloss::load_scored(o.scored);
  if (!load.errors.empty() && !o.lenient) throw Error(load.errors.front().kind, first_error(load.errors, o.scored));
  const auto stats = prefloss::batch_stats(load.items, method, o.beta);
  const Table t{{"Metric", "Value"},
                {{"Pairs", std::to_string(load.items.size())},
                 {"Rejected lines", std::to_string(load.errors.size())},
                 {"Mean loss", fmt(stats.mean_loss, 6)},
                 {"Reward margin", fmt(stats.reward_margin, 6)},
                 {"Reward accuracy", fmt(stats.reward_accuracy, 6)}}};
  write_text(o.out / "prefstats.csv", to_csv(t));
  record_run(o.out, "prefstats",
             {{"scored", o.scored.string()}, {"method", o.method}, {"beta", o.beta}, {"lenient", o.lenient}});
  return stats;
}

std::string cmd_report(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw Error(ErrorKind::Io, "run directory not found: " + run_dir.string());
  struct Section {
    const char* file;
    const char* title;
  };
  static constexpr Section kSections[] = {
      {"type_counts_etpc.csv", "Paraphrase type frequencies (sentence pairs)"},
      {"type_counts_qqp.csv", "Paraphrase type frequencies (binary pairs)"},
      {"type_counts_apty.csv", "Paraphrase type frequencies (preference pairs)"},
      {"split_counts.csv", "Split counts per type"},
      {"curves.csv", "Training curves"},
      {"prefstats.csv", "Preference statistics (scored sequences)"},
      {"accuracy.csv", "Accuracy by model"},
      {"accuracy_by_type.csv", "Accuracy by paraphrase type"},
      {"rank_distribution.csv", "Human ranking distribution (%)"},
      {"rank_counts.csv", "Human ranking counts"},
      {"statistics.csv", "Significance tests and annotator agreement"},
      {"correlations.csv", "Automatic metrics vs. human ranking (Pearson)"},
      {"metric_scores.csv", "Per-generation metric scores"},
      {"ptd_f1.csv", "Paraphrase type detection F1"},
      {"ptd_summary.csv", "Paraphrase type detection summary"},
  };
  std::string md = "# Run report\n";
  std::size_t found = 0;
  for (const auto& s : kSections) {
    const auto path = run_dir / s.file;
    if (!fs::exists(path)) continue;
    ++found;
    md += "\n## ";
    md += s.title;
    md += "\n\nSource: `";
    md += s.file;
    md += "`\n\n";
    md += to_markdown(parse_csv(read_text(path)));
  }
  if (found == 0) md += "\nNo result tables found.\n";
  write_text(run_dir / "report.md", md);
  return md;
}

}  // namespace apt::pipeline
