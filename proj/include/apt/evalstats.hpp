#pragma once

// Statistics used to compare models and annotators: rank transform,
// correlation, agreement, significance tests, F1 aggregation and bootstrap
// intervals.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apt/error.hpp"
#include "apt/rng.hpp"
#include "apt/taxonomy.hpp"

namespace apt::stats {

// 1 / (1 + exp(rank - 2.5)): maps the 1..4 annotation scale onto (0, 1)
// around the scale midpoint 2.5; better ranks map higher.
double logistic_rank_transform(double rank) noexcept;

// Pearson product-moment correlation. Throws LengthMismatch, InsufficientData
// (fewer than 3 points) or ConstantInput.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Two-sided p-value of a correlation r over n >= 3 points from the t
// distribution with n - 2 degrees of freedom.
double correlation_p_value(double r, std::size_t n);

// Pearson of fractional ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

// 1-based ranks; tied values share the average of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

// Cohen's kappa from a square confusion matrix (rows: rater A, cols: rater B).
// Throws DegenerateAgreement when chance agreement is 1.
double cohens_kappa_from_confusion(const std::vector<std::vector<double>>& confusion);

template <typename Label>
double cohens_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "cohens_kappa: label lists differ in length");
  if (a.empty()) throw Error(ErrorKind::InsufficientData, "cohens_kappa: no items");
  std::map<Label, std::size_t> index;
  for (const auto& l : a) index.try_emplace(l, 0);
  for (const auto& l : b) index.try_emplace(l, 0);
  std::size_t k = 0;
  for (auto& [label, slot] : index) slot = k++;
  std::vector<std::vector<double>> confusion(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) confusion[index.at(a[i])][index.at(b[i])] += 1.0;
  return cohens_kappa_from_confusion(confusion);
}

enum class AlphaLevel { Nominal, Ordinal };

// coder x unit; std::nullopt marks a missing value.
using ReliabilityData = std::vector<std::vector<std::optional<double>>>;

// Krippendorff's alpha via the coincidence matrix. Ordinal distances use
// the cumulative marginal counts between two values. Throws
// InsufficientData (< 2 pairable units) or DegenerateAgreement (every value
// identical, so expected disagreement is 0).
double krippendorff_alpha(const ReliabilityData& values, AlphaLevel level);

struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

struct ChiSquareResult {
  double stat = 0.0;
  int df = 0;
  double p = 1.0;
};

// Pearson chi-square test of independence, no continuity correction.
// Throws DegenerateTable for tables smaller than 2x2, ragged rows, negative
// counts, or an all-zero row or column.
ChiSquareResult chi_square(const ContingencyTable& table);

struct AnovaResult {
  double f = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p = 1.0;
};

// One-way ANOVA. Throws DegenerateInput for fewer than two groups, a group
// with fewer than two values, or all values identical.
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

struct ClassF1 {
  std::string label;
  double f1 = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::size_t support = 0;  // gold positives
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct F1Report {
  std::vector<ClassF1> per_class;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

// Set-membership F1 per class: f1 = 2TP / (2TP + FP + FN), 0 when the
// denominator is 0. Macro averages the classes that occur at all (support or
// predictions); weighted averages by support. CIs are left equal to f1.
F1Report f1_scores(std::span<const taxonomy::TypeSet> predicted, std::span<const taxonomy::TypeSet> gold,
                   const taxonomy::TypeSet& classes);

// Recomputes macro and weighted means from per_class.
void summarize(F1Report& report);

// Linear-interpolation quantile of sorted data (numpy's default).
double quantile_sorted(std::span<const double> sorted, double q);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap of a vector-valued statistic over n items. Each
// resample b draws n indices with replacement from its own substream
// derive_seed(seed, b), so replicate b does not depend on evaluation order.
// NaN components mark resamples where the statistic is undefined and are
// skipped. Returns one interval per component; NaN bounds when every
// replicate of a component was undefined.
std::vector<Interval> bootstrap_intervals(
    const std::function<std::vector<double>(std::span<const std::size_t>)>& statistic, std::size_t n_items,
    std::size_t n_resamples, double level, std::uint64_t seed);

template <typename T>
Interval bootstrap_ci(const std::function<double(std::span<const T>)>& statistic, std::span<const T> data,
                      std::size_t n_resamples = 1000, double level = 0.95, std::uint64_t seed = 0) {
  if (data.size() < 2) throw Error(ErrorKind::InsufficientData, "bootstrap_ci: need at least 2 observations");
  std::vector<T> sample;
  auto wrapped = [&](std::span<const std::size_t> idx) {
    sample.clear();
    for (auto i : idx) sample.push_back(data[i]);
    return std::vector<double>{statistic(std::span<const T>(sample))};
  };
  return bootstrap_intervals(wrapped, data.size(), n_resamples, level, seed).front();
}

}  // namespace apt::stats
