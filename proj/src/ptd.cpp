#include "apt/ptd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "apt/prefloss.hpp"
#include "apt/textmetrics.hpp"
#include "apt/utf8.hpp"

namespace apt::ptd {
namespace {

using taxonomy::top10_order;

struct TokenView {
  std::vector<std::string> content;
  std::vector<std::string> punctuation;
};

TokenView split_tokens(std::string_view text) {
  TokenView v;
  for (auto& tok : metrics::tokenize(text)) {
    (metrics::is_punctuation_token(tok) ? v.punctuation : v.content).push_back(std::move(tok));
  }
  return v;
}

std::vector<std::string> sorted_copy(std::vector<std::string> v) {
  std::ranges::sort(v);
  return v;
}

bool shares_affix(std::string_view a, std::string_view b, std::size_t len) {
  if (a.size() < len || b.size() < len) return false;
  return a.substr(0, len) == b.substr(0, len) || a.substr(a.size() - len) == b.substr(b.size() - len);
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

ClassWeights class_weights(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw Error(ErrorKind::AllZero, "class_weights: every count is zero");
  const auto n = static_cast<double>(total);
  const auto k = static_cast<double>(counts.size());
  ClassWeights w;
  for (auto c : counts) {
    w.weights.push_back(std::clamp(n / (k * static_cast<double>(std::max<std::size_t>(c, 1))), 0.1, 50.0));
  }
  return w;
}

std::vector<std::size_t> top10_counts(std::span<const corpus::SentencePairRecord> records) {
  std::vector<std::size_t> counts(kNumClasses, 0);
  for (const auto& r : records) {
    for (std::size_t c = 0; c < kNumClasses; ++c) counts[c] += r.types.contains(top10_order()[c]);
  }
  return counts;
}

double weighted_bce_loss(std::span<const double> logits, std::span<const int> targets, const ClassWeights& weights) {
  if (logits.size() != targets.size() || logits.size() != weights.weights.size()) {
    throw Error(ErrorKind::LengthMismatch, "weighted_bce_loss: logits, targets and weights differ in length");
  }
  if (logits.empty()) throw Error(ErrorKind::EmptyInput, "weighted_bce_loss: no classes");
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (targets[c] != 0 && targets[c] != 1) throw Error(ErrorKind::InvalidArgument, "targets must be 0 or 1");
    // -log s(z) = softplus(-z), -log(1 - s(z)) = softplus(z)
    sum += targets[c] == 1 ? weights.weights[c] * prefloss::softplus(-logits[c]) : prefloss::softplus(logits[c]);
  }
  return sum / static_cast<double>(logits.size());
}

std::vector<double> weighted_bce_grad(std::span<const double> logits, std::span<const int> targets,
                                      const ClassWeights& weights) {
  if (logits.size() != targets.size() || logits.size() != weights.weights.size()) {
    throw Error(ErrorKind::LengthMismatch, "weighted_bce_grad: logits, targets and weights differ in length");
  }
  std::vector<double> g(logits.size());
  const auto k = static_cast<double>(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const double s = prefloss::sigmoid(logits[c]);
    g[c] = (targets[c] == 1 ? -weights.weights[c] * (1.0 - s) : s) / k;
  }
  return g;
}

TypeSet decide(std::span<const double> logits, double threshold) {
  if (logits.size() != kNumClasses) {
    throw Error(ErrorKind::InvalidArgument, "decide: expected 10 logits, got " + std::to_string(logits.size()));
  }
  TypeSet out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (prefloss::sigmoid(logits[c]) >= threshold) out.insert(top10_order()[c]);
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto x = utf8::decode(a);
  const auto y = utf8::decode(b);
  std::vector<std::size_t> prev(y.size() + 1), row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      row[j] = std::min({prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
    std::swap(prev, row);
  }
  return prev[y.size()];
}

const TypeSet& heuristic_classes() {
  static const TypeSet classes{ParaphraseType::AdditionDeletion, ParaphraseType::PunctuationChanges,
                               ParaphraseType::ChangeOfOrder, ParaphraseType::SpellingChanges};
  return classes;
}

TypeSet heuristic_detect(const corpus::SentencePairRecord& pair) {
  const TokenView a = split_tokens(pair.original);
  const TokenView b = split_tokens(pair.paraphrase);
  TypeSet out;

  if (a.content.size() != b.content.size()) out.insert(ParaphraseType::AdditionDeletion);

  const bool same_bag = sorted_copy(a.content) == sorted_copy(b.content);
  if (same_bag && a.punctuation != b.punctuation) out.insert(ParaphraseType::PunctuationChanges);
  if (same_bag && a.content != b.content) out.insert(ParaphraseType::ChangeOfOrder);

  if (!same_bag && a.content.size() == b.content.size()) {
    std::size_t spelling_pairs = 0;
    for (std::size_t i = 0; i < a.content.size(); ++i) {
      const auto& x = a.content[i];
      const auto& y = b.content[i];
      if (x == y) continue;
      const std::size_t d = edit_distance(x, y);
      if (d >= 1 && d <= 2 && shares_affix(x, y, 3)) ++spelling_pairs;
    }
    if (spelling_pairs == 1) out.insert(ParaphraseType::SpellingChanges);
  }
  return out;
}

stats::F1Report evaluate_ptd(std::span<const TypeSet> predicted, std::span<const TypeSet> gold, std::uint64_t seed,
                             const EvalOptions& options) {
  if (predicted.size() != gold.size()) throw Error(ErrorKind::LengthMismatch, "evaluate_ptd: predicted/gold differ in length");
  if (gold.empty()) throw Error(ErrorKind::EmptyInput, "evaluate_ptd: no examples");
  stats::F1Report report = stats::f1_scores(predicted, gold, options.classes);
  if (gold.size() < 2) return report;

  std::vector<TypeSet> p_sample, g_sample;
  auto statistic = [&](std::span<const std::size_t> idx) {
    p_sample.clear();
    g_sample.clear();
    for (auto i : idx) {
      p_sample.push_back(predicted[i]);
      g_sample.push_back(gold[i]);
    }
    const auto r = stats::f1_scores(p_sample, g_sample, options.classes);
    // A class absent from both sides of a resample has no F1.
    std::vector<double> f1;
    for (const auto& c : r.per_class) {
      f1.push_back(c.tp + c.fp + c.fn == 0 ? std::numeric_limits<double>::quiet_NaN() : c.f1);
    }
    return f1;
  };
  const auto intervals = stats::bootstrap_intervals(statistic, gold.size(), options.n_resamples, options.level, seed);
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    auto& row = report.per_class[c];
    row.ci_lower = std::isnan(intervals[c].lower) ? row.f1 : std::min(intervals[c].lower, row.f1);
    row.ci_upper = std::isnan(intervals[c].upper) ? row.f1 : std::max(intervals[c].upper, row.f1);
  }
  return report;
}

stats::F1Report agreement_with_humans(std::span<const TypeSet> predicted, std::span<const HumanJudgment> human,
                                      std::uint64_t seed, std::size_t n_resamples) {
  if (predicted.size() != human.size()) {
    throw Error(ErrorKind::LengthMismatch, "agreement_with_humans: predicted/human differ in length");
  }
  // Reduce to single-type sets: gold = {target} if humans judged it correct,
  // prediction = {target} if the detector found it.
  std::vector<TypeSet> pred, gold;
  TypeSet classes;
  for (std::size_t i = 0; i < human.size(); ++i) {
    const auto t = human[i].target_type;
    classes.insert(t);
    pred.push_back(predicted[i].contains(t) ? TypeSet{t} : TypeSet{});
    gold.push_back(human[i].correct ? TypeSet{t} : TypeSet{});
  }
  if (human.empty()) return {};
  return evaluate_ptd(pred, gold, seed, EvalOptions{classes, n_resamples, 0.95});
}

std::string to_csv(const stats::F1Report& report) {
  std::ostringstream out;
  out << "Class,F1,CI Lower,CI Upper,Support\n";
  for (const auto& c : report.per_class) {
    out << csv_field(c.label) << ',' << format_score(c.f1) << ',' << format_score(c.ci_lower) << ','
        << format_score(c.ci_upper) << ',' << c.support << '\n';
  }
  return out.str();
}

TypeSet Prediction::resolve(double threshold) const {
  if (predicted) return *predicted;
  if (logits) return decide(*logits, threshold);
  return {};
}

corpus::LoadResult<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  corpus::LoadResult<Prediction> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Prediction p;
      const auto& id = j.at("id");
      p.id = id.is_string() ? id.get<std::string>() : id.dump();
      if (j.contains("logits")) {
        p.logits = j.at("logits").get<std::vector<double>>();
        if (p.logits->size() != kNumClasses) throw Error(ErrorKind::Schema, "logits must have 10 entries");
      } else if (j.contains("predicted")) {
        TypeSet s;
        for (const auto& l : j.at("predicted")) s.insert(taxonomy::parse_type(l.get<std::string>()));
        p.predicted = s;
      } else {
        throw Error(ErrorKind::Schema, "prediction needs \"logits\" or \"predicted\"");
      }
      result.records.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      result.errors.push_back({line_no, ErrorKind::Schema, e.what()});
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.kind(), e.message()});
    }
  }
  return result;
}

std::vector<GridPoint> grid_search(std::span<const GridAxis> axes,
                                   const std::function<double(const std::map<std::string, double>&)>& objective) {
  std::vector<GridPoint> points;
  if (axes.empty() || std::ranges::any_of(axes, [](const GridAxis& a) { return a.values.empty(); })) return points;
  std::vector<std::size_t> cursor(axes.size(), 0);
  while (true) {
    GridPoint p;
    for (std::size_t a = 0; a < axes.size(); ++a) p.values[axes[a].name] = axes[a].values[cursor[a]];
    p.score = objective(p.values);
    points.push_back(std::move(p));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++cursor[a] < axes[a].values.size()) break;
      cursor[a] = 0;
      if (a == 0) return points;
    }
  }
}

const GridPoint& best_point(std::span<const GridPoint> points) {
  if (points.empty()) throw Error(ErrorKind::EmptyInput, "best_point: empty grid");
  const GridPoint* best = &points.front();
  for (const auto& p : points) {
    if (p.score > best->score) best = &p;
  }
  return *best;
}

double tune_threshold(std::span<const std::vector<double>> logits, std::span<const TypeSet> gold,
                      std::span<const double> candidates) {
  if (logits.size() != gold.size()) throw Error(ErrorKind::LengthMismatch, "tune_threshold: logits/gold differ in length");
  const std::vector<GridAxis> axes{{"threshold", {candidates.begin(), candidates.end()}}};
  const auto points = grid_search(axes, [&](const std::map<std::string, double>& v) {
    std::vector<TypeSet> predicted;
    for (const auto& l : logits) predicted.push_back(decide(l, v.at("threshold")));
    return stats::f1_scores(predicted, gold, taxonomy::top10()).macro_f1;
  });
  return best_point(points).values.at("threshold");
}

}  // namespace apt::ptd
