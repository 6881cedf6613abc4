#pragma once

// Paraphrase-type detection harness: multilabel loss math, thresholding, a
// rule-based baseline detector and F1 reports with bootstrap intervals.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apt/corpus.hpp"
#include "apt/evalstats.hpp"

namespace apt::ptd {

using taxonomy::ParaphraseType;
using taxonomy::TypeSet;

// Logit and weight vectors are aligned to taxonomy::top10_order().
inline constexpr std::size_t kNumClasses = 10;

struct ClassWeights {
  std::vector<double> weights;
};

// w_c = N / (K * max(n_c, 1)), clamped to [0.1, 50]. Throws AllZero.
ClassWeights class_weights(std::span<const std::size_t> counts);

// Per-class positive counts of a corpus, in top10 order.
std::vector<std::size_t> top10_counts(std::span<const corpus::SentencePairRecord> records);

// mean_c -[w_c t_c log s(z_c) + (1 - t_c) log(1 - s(z_c))], via softplus.
// Throws LengthMismatch; targets must be 0 or 1.
double weighted_bce_loss(std::span<const double> logits, std::span<const int> targets, const ClassWeights& weights);

// d loss / d logit_c for the same loss.
std::vector<double> weighted_bce_grad(std::span<const double> logits, std::span<const int> targets,
                                      const ClassWeights& weights);

// Class c is predicted iff sigmoid(logit_c) >= threshold. Throws
// InvalidArgument unless there are exactly 10 logits.
TypeSet decide(std::span<const double> logits, double threshold = 0.5);

// Rule-based detector; rules may fire jointly. On lowercased tokens with
// content = non-punctuation tokens:
//   Addition/Deletion    content token counts differ;
//   Punctuation changes  content multisets equal, punctuation sequences differ;
//   Change of order      content multisets equal, content sequences differ;
//   Spelling changes     equal content counts and exactly one aligned content
//                        pair is 1-2 edits apart while sharing a 3-character
//                        prefix or suffix.
TypeSet heuristic_detect(const corpus::SentencePairRecord& pair);

// Types heuristic_detect can emit.
const TypeSet& heuristic_classes();

std::size_t edit_distance(std::string_view a, std::string_view b);

struct EvalOptions {
  TypeSet classes = taxonomy::top10();
  std::size_t n_resamples = 1000;
  double level = 0.95;
};

// f1_scores plus per-class percentile bootstrap CIs from resampling
// examples. Intervals are widened to contain the point estimate.
stats::F1Report evaluate_ptd(std::span<const TypeSet> predicted, std::span<const TypeSet> gold, std::uint64_t seed,
                             const EvalOptions& options = {});

struct HumanJudgment {
  ParaphraseType target_type{};
  bool correct = false;
};

// Per target type: human `correct` is the gold label and membership of the
// target type in the prediction is the predicted label.
stats::F1Report agreement_with_humans(std::span<const TypeSet> predicted, std::span<const HumanJudgment> human,
                                      std::uint64_t seed = 0, std::size_t n_resamples = 1000);

// "Class,F1,CI Lower,CI Upper,Support" with four-decimal scores.
std::string to_csv(const stats::F1Report& report);

// ptd_preds.jsonl: {"id","logits":[10 reals]} or {"id","predicted":[labels]}.
struct Prediction {
  std::string id;
  std::optional<std::vector<double>> logits;
  std::optional<TypeSet> predicted;

  TypeSet resolve(double threshold) const;
};
corpus::LoadResult<Prediction> load_predictions(const std::filesystem::path& path);

// Exhaustive search over a grid of named axes; returns every point in
// enumeration order (last axis fastest) with its objective value.
struct GridAxis {
  std::string name;
  std::vector<double> values;
};
struct GridPoint {
  std::map<std::string, double> values;
  double score = 0.0;
};
std::vector<GridPoint> grid_search(std::span<const GridAxis> axes,
                                   const std::function<double(const std::map<std::string, double>&)>& objective);

// First point with the highest score.
const GridPoint& best_point(std::span<const GridPoint> points);

// Decision threshold maximizing macro F1 over the candidates.
double tune_threshold(std::span<const std::vector<double>> logits, std::span<const TypeSet> gold,
                      std::span<const double> candidates);

}  // namespace apt::ptd
