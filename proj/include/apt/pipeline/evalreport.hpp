#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apt/corpus.hpp"
#include "apt/evalstats.hpp"
#include "apt/pipeline/table.hpp"

namespace apt::pipeline {

// One (item, model) cell of the human evaluation.
struct UnitJudgment {
  std::string item_id;
  std::string model_id;
  taxonomy::ParaphraseType target_type{};
  double mean_rank = 0.0;
  std::size_t annotations = 0;
  bool correct = false;  // strict majority of annotators marked it valid
};

struct UnitScores {
  std::string item_id;
  std::string model_id;
  double bleu = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double human = 0.0;  // logistic_rank_transform(mean rank)
};

struct ModelAccuracy {
  std::string model_id;
  std::size_t items = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::vector<std::string> models;  // sorted
  std::vector<UnitJudgment> units;  // sorted by item, then model
  std::vector<ModelAccuracy> accuracy;

  std::vector<taxonomy::ParaphraseType> types;                    // target types present, by id
  std::vector<std::vector<std::optional<double>>> type_accuracy;  // [type][model]

  std::vector<std::array<std::int64_t, 4>> rank_counts;  // [model][rank - 1]

  std::optional<stats::ChiSquareResult> chi_square;
  std::optional<stats::AnovaResult> anova;
  std::optional<double> kappa;  // mean pairwise Cohen's kappa on validity
  std::optional<double> alpha;  // ordinal Krippendorff's alpha on ranks
  std::size_t annotators = 0;
  std::size_t kappa_pairs = 0;

  std::vector<UnitScores> scores;  // empty without references
  std::vector<std::string> corr_vars;
  std::vector<std::vector<std::optional<double>>> pearson;  // symmetric
  std::vector<std::optional<double>> pearson_p;             // each metric vs human
  std::vector<std::optional<double>> spearman;              // each metric vs human
};

// Throws MissingAnnotations when a generation has no annotation and
// EmptyInput when there are no annotations at all. References may be empty,
// in which case metric scores and correlations are omitted.
EvalReport run_eval(std::span<const corpus::GenerationRecord> generations,
                    std::span<const corpus::AnnotationRecord> annotations,
                    std::span<const corpus::ReferenceRecord> references);

Table accuracy_table(const EvalReport& r);
Table accuracy_by_type_table(const EvalReport& r);
// Model x rank percentages (row sums 100 up to rounding).
Table rank_distribution_table(const EvalReport& r);
Table rank_count_table(const EvalReport& r);
Table statistics_table(const EvalReport& r);
Table correlation_table(const EvalReport& r);
Table metric_scores_table(const EvalReport& r);

}  // namespace apt::pipeline
