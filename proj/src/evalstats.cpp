#include "apt/evalstats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "apt/special_functions.hpp"

namespace apt::stats {
namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double logistic_rank_transform(double rank) noexcept { return 1.0 / (1.0 + std::exp(rank - 2.5)); }

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::LengthMismatch, "pearson: inputs differ in length");
  if (xs.size() < 3) throw Error(ErrorKind::InsufficientData, "pearson: need at least 3 points");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ConstantInput, "pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw Error(ErrorKind::InsufficientData, "correlation_p_value: need at least 3 points");
  const double df = static_cast<double>(n - 2);
  const double r2 = std::min(r * r, 1.0);
  if (r2 >= 1.0) return 0.0;
  // P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2) and df / (df + t^2) = 1 - r^2.
  return regularized_beta(df / 2.0, 0.5, 1.0 - r2);
}

std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::LengthMismatch, "spearman: inputs differ in length");
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  return pearson(rx, ry);
}

double cohens_kappa_from_confusion(const std::vector<std::vector<double>>& confusion) {
  const std::size_t k = confusion.size();
  double total = 0.0;
  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  double agree = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (confusion[i].size() != k) throw Error(ErrorKind::InvalidArgument, "confusion matrix must be square");
    for (std::size_t j = 0; j < k; ++j) {
      rows[i] += confusion[i][j];
      cols[j] += confusion[i][j];
      total += confusion[i][j];
    }
    agree += confusion[i][i];
  }
  if (total <= 0.0) throw Error(ErrorKind::InsufficientData, "cohens_kappa: empty confusion matrix");
  const double p_o = agree / total;
  double p_e = 0.0;
  for (std::size_t i = 0; i < k; ++i) p_e += (rows[i] / total) * (cols[i] / total);
  if (p_e >= 1.0) throw Error(ErrorKind::DegenerateAgreement, "cohens_kappa: chance agreement is 1");
  return (p_o - p_e) / (1.0 - p_e);
}

double krippendorff_alpha(const ReliabilityData& values, AlphaLevel level) {
  std::size_t n_units = 0;
  for (const auto& coder : values) n_units = std::max(n_units, coder.size());

  // Distinct values in ascending order index the coincidence matrix.
  std::map<double, std::size_t> index;
  for (const auto& coder : values) {
    for (const auto& v : coder) {
      if (v) index.try_emplace(*v, 0);
    }
  }
  std::size_t k = 0;
  for (auto& [value, slot] : index) slot = k++;

  std::vector<std::vector<double>> coincidence(k, std::vector<double>(k, 0.0));
  std::size_t pairable = 0;
  for (std::size_t u = 0; u < n_units; ++u) {
    std::vector<std::size_t> unit;
    for (const auto& coder : values) {
      if (u < coder.size() && coder[u]) unit.push_back(index.at(*coder[u]));
    }
    if (unit.size() < 2) continue;
    ++pairable;
    const double weight = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t i = 0; i < unit.size(); ++i) {
      for (std::size_t j = 0; j < unit.size(); ++j) {
        if (i != j) coincidence[unit[i]][unit[j]] += weight;
      }
    }
  }
  if (pairable < 2) throw Error(ErrorKind::InsufficientData, "krippendorff_alpha: fewer than 2 pairable units");

  std::vector<double> marginals(k, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) marginals[c] += coincidence[c][d];
    n += marginals[c];
  }

  auto delta2 = [&](std::size_t c, std::size_t d) {
    if (c == d) return 0.0;
    if (level == AlphaLevel::Nominal) return 1.0;
    const std::size_t lo = std::min(c, d), hi = std::max(c, d);
    double cumulative = 0.0;
    for (std::size_t g = lo; g <= hi; ++g) cumulative += marginals[g];
    const double dist = cumulative - (marginals[lo] + marginals[hi]) / 2.0;
    return dist * dist;
  };

  double observed = 0.0, expected = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      const double w = delta2(c, d);
      observed += coincidence[c][d] * w;
      expected += marginals[c] * marginals[d] * w;
    }
  }
  if (expected == 0.0) throw Error(ErrorKind::DegenerateAgreement, "krippendorff_alpha: no variation in values");
  return 1.0 - (n - 1.0) * observed / expected;
}

ChiSquareResult chi_square(const ContingencyTable& table) {
  const std::size_t rows = table.counts.size();
  if (rows < 2) throw Error(ErrorKind::DegenerateTable, "chi_square: need at least 2 rows");
  const std::size_t cols = table.counts.front().size();
  if (cols < 2) throw Error(ErrorKind::DegenerateTable, "chi_square: need at least 2 columns");

  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (table.counts[i].size() != cols) throw Error(ErrorKind::DegenerateTable, "chi_square: ragged table");
    for (std::size_t j = 0; j < cols; ++j) {
      const auto c = table.counts[i][j];
      if (c < 0) throw Error(ErrorKind::DegenerateTable, "chi_square: negative count");
      row_sum[i] += static_cast<double>(c);
      col_sum[j] += static_cast<double>(c);
      total += static_cast<double>(c);
    }
  }
  if (std::ranges::any_of(row_sum, [](double s) { return s == 0.0; }) ||
      std::ranges::any_of(col_sum, [](double s) { return s == 0.0; })) {
    throw Error(ErrorKind::DegenerateTable, "chi_square: all-zero row or column");
  }

  ChiSquareResult result;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double expected = row_sum[i] * col_sum[j] / total;
      const double diff = static_cast<double>(table.counts[i][j]) - expected;
      result.stat += diff * diff / expected;
    }
  }
  result.df = static_cast<int>((rows - 1) * (cols - 1));
  result.p = chi_square_sf(result.stat, result.df);
  return result;
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(ErrorKind::DegenerateInput, "anova: need at least 2 groups");
  double grand = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorKind::DegenerateInput, "anova: every group needs at least 2 values");
    for (double x : g) grand += x;
    n += g.size();
  }
  grand /= static_cast<double>(n);

  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) ssw += (x - m) * (x - m);
  }
  if (ssb == 0.0 && ssw == 0.0) throw Error(ErrorKind::DegenerateInput, "anova: all values identical");

  AnovaResult r;
  r.df_between = static_cast<int>(groups.size() - 1);
  r.df_within = static_cast<int>(n - groups.size());
  if (ssw == 0.0) {
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.f = (ssb / r.df_between) / (ssw / r.df_within);
  r.p = f_sf(r.f, r.df_between, r.df_within);
  return r;
}

void summarize(F1Report& report) {
  double macro = 0.0;
  std::size_t defined = 0;
  double weighted = 0.0;
  std::size_t support = 0;
  for (const auto& c : report.per_class) {
    if (c.support > 0 || c.fp > 0) {
      macro += c.f1;
      ++defined;
    }
    weighted += static_cast<double>(c.support) * c.f1;
    support += c.support;
  }
  report.macro_f1 = defined > 0 ? macro / static_cast<double>(defined) : 0.0;
  report.weighted_f1 = support > 0 ? weighted / static_cast<double>(support) : 0.0;
}

F1Report f1_scores(std::span<const taxonomy::TypeSet> predicted, std::span<const taxonomy::TypeSet> gold,
                   const taxonomy::TypeSet& classes) {
  if (predicted.size() != gold.size()) throw Error(ErrorKind::LengthMismatch, "f1_scores: predicted/gold differ in length");
  F1Report report;
  for (auto t : classes.members()) {
    ClassF1 c;
    c.label = std::string(taxonomy::label(t));
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predicted[i].contains(t);
      const bool g = gold[i].contains(t);
      c.tp += p && g;
      c.fp += p && !g;
      c.fn += !p && g;
    }
    c.support = c.tp + c.fn;
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    c.f1 = denom > 0 ? 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
    c.ci_lower = c.ci_upper = c.f1;
    report.per_class.push_back(std::move(c));
  }
  summarize(report);
  return report;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::InsufficientData, "quantile of empty data");
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<Interval> bootstrap_intervals(
    const std::function<std::vector<double>(std::span<const std::size_t>)>& statistic, std::size_t n_items,
    std::size_t n_resamples, double level, std::uint64_t seed) {
  if (n_items < 2) throw Error(ErrorKind::InsufficientData, "bootstrap: need at least 2 observations");
  if (n_resamples == 0) throw Error(ErrorKind::InvalidArgument, "bootstrap: n_resamples must be > 0");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "bootstrap: level must be in (0, 1)");

  std::vector<std::vector<double>> replicates;  // component -> values
  std::vector<std::size_t> idx(n_items);
  for (std::size_t b = 0; b < n_resamples; ++b) {
    SplitMix64 rng(derive_seed(seed, b));
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n_items));
    const auto values = statistic(idx);
    if (replicates.empty()) replicates.resize(values.size());
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (!std::isnan(values[c])) replicates[c].push_back(values[c]);
    }
  }
  const double alpha = (1.0 - level) / 2.0;
  std::vector<Interval> out;
  for (auto& values : replicates) {
    if (values.empty()) {
      out.push_back({std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()});
      continue;
    }
    std::ranges::sort(values);
    out.push_back({quantile_sorted(values, alpha), quantile_sorted(values, 1.0 - alpha)});
  }
  return out;
}

}  // namespace apt::stats
