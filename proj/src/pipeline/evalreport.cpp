#include "apt/pipeline/evalreport.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "apt/error.hpp"
#include "apt/textmetrics.hpp"

namespace apt::pipeline {
namespace {

using Unit = std::pair<std::string, std::string>;  // (item, model)

template <typename F>
std::optional<double> guarded(F&& f) {
  try {
    return f();
  } catch (const Error&) {
    return std::nullopt;
  }
}

double best_rouge_n(const std::vector<std::string>& cand, const std::vector<std::vector<std::string>>& refs, int n) {
  double best = 0.0;
  for (const auto& ref : refs) {
    best = std::max(best, guarded([&] { return metrics::rouge_n_tokens(cand, ref, n).f1; }).value_or(0.0));
  }
  return best;
}

double best_rouge_l(const std::vector<std::string>& cand, const std::vector<std::vector<std::string>>& refs) {
  double best = 0.0;
  for (const auto& ref : refs) {
    best = std::max(best, guarded([&] { return metrics::rouge_l_tokens(cand, ref).f1; }).value_or(0.0));
  }
  return best;
}

std::optional<double> mean_pairwise_kappa(std::span<const corpus::AnnotationRecord> annotations,
                                          std::size_t& pairs_used) {
  std::map<std::string, std::map<Unit, bool>> by_annotator;
  for (const auto& a : annotations) by_annotator[a.annotator_id][{a.item_id, a.model_id}] = a.valid;
  std::vector<const std::map<Unit, bool>*> coders;
  for (const auto& [id, m] : by_annotator) coders.push_back(&m);
  double sum = 0.0;
  pairs_used = 0;
  for (std::size_t i = 0; i < coders.size(); ++i) {
    for (std::size_t j = i + 1; j < coders.size(); ++j) {
      std::vector<int> a, b;
      for (const auto& [unit, v] : *coders[i]) {
        if (auto it = coders[j]->find(unit); it != coders[j]->end()) {
          a.push_back(v ? 1 : 0);
          b.push_back(it->second ? 1 : 0);
        }
      }
      if (a.empty()) continue;
      if (auto k = guarded([&] { return stats::cohens_kappa<int>(a, b); })) {
        sum += *k;
        ++pairs_used;
      }
    }
  }
  if (pairs_used == 0) return std::nullopt;
  return sum / static_cast<double>(pairs_used);
}

std::optional<double> ordinal_alpha(std::span<const corpus::AnnotationRecord> annotations,
                                    const std::vector<UnitJudgment>& units) {
  std::map<std::string, std::size_t> coder_index;
  for (const auto& a : annotations) coder_index.try_emplace(a.annotator_id, 0);
  if (coder_index.size() < 2) return std::nullopt;
  std::size_t k = 0;
  for (auto& [id, slot] : coder_index) slot = k++;
  std::map<Unit, std::size_t> unit_index;
  for (std::size_t u = 0; u < units.size(); ++u) unit_index[{units[u].item_id, units[u].model_id}] = u;
  stats::ReliabilityData data(coder_index.size(), std::vector<std::optional<double>>(units.size()));
  for (const auto& a : annotations) {
    data[coder_index.at(a.annotator_id)][unit_index.at({a.item_id, a.model_id})] = a.rank;
  }
  return guarded([&] { return stats::krippendorff_alpha(data, stats::AlphaLevel::Ordinal); });
}

}  // namespace

EvalReport run_eval(std::span<const corpus::GenerationRecord> generations,
                    std::span<const corpus::AnnotationRecord> annotations,
                    std::span<const corpus::ReferenceRecord> references) {
  if (annotations.empty()) throw Error(ErrorKind::EmptyInput, "no annotations to evaluate");
  EvalReport r;

  struct Acc {
    taxonomy::ParaphraseType type{};
    double rank_sum = 0.0;
    std::size_t n = 0, valid = 0;
  };
  std::map<Unit, Acc> acc;
  std::set<std::string> annotators;
  for (const auto& a : annotations) {
    auto& u = acc[{a.item_id, a.model_id}];
    u.type = a.target_type;
    u.rank_sum += a.rank;
    ++u.n;
    u.valid += a.valid ? 1 : 0;
    annotators.insert(a.annotator_id);
  }
  r.annotators = annotators.size();
  for (const auto& g : generations) {
    if (!acc.contains({g.item_id, g.model_id})) {
      throw Error(ErrorKind::MissingAnnotations,
                  "generation " + g.item_id + "/" + g.model_id + " has no annotation");
    }
  }

  std::set<std::string> models;
  for (const auto& [unit, a] : acc) {
    models.insert(unit.second);
    r.units.push_back({unit.first, unit.second, a.type, a.rank_sum / static_cast<double>(a.n), a.n, 2 * a.valid > a.n});
  }
  r.models.assign(models.begin(), models.end());
  std::map<std::string, std::size_t> model_index;
  for (std::size_t m = 0; m < r.models.size(); ++m) model_index[r.models[m]] = m;

  // Accuracy overall and per target type.
  r.accuracy.resize(r.models.size());
  for (std::size_t m = 0; m < r.models.size(); ++m) r.accuracy[m].model_id = r.models[m];
  std::map<taxonomy::ParaphraseType, std::vector<std::pair<std::size_t, std::size_t>>> by_type;
  for (const auto& u : r.units) {
    const auto m = model_index.at(u.model_id);
    ++r.accuracy[m].items;
    r.accuracy[m].correct += u.correct ? 1 : 0;
    auto& cells = by_type[u.target_type];
    cells.resize(r.models.size());
    ++cells[m].first;
    cells[m].second += u.correct ? 1 : 0;
  }
  for (auto& a : r.accuracy) a.accuracy = static_cast<double>(a.correct) / static_cast<double>(a.items);
  for (const auto& [type, cells] : by_type) {
    r.types.push_back(type);
    auto& row = r.type_accuracy.emplace_back(r.models.size());
    for (std::size_t m = 0; m < cells.size(); ++m) {
      if (cells[m].first > 0) row[m] = static_cast<double>(cells[m].second) / static_cast<double>(cells[m].first);
    }
  }

  // Rank distribution over every individual judgment.
  r.rank_counts.assign(r.models.size(), {0, 0, 0, 0});
  for (const auto& a : annotations) ++r.rank_counts[model_index.at(a.model_id)][static_cast<std::size_t>(a.rank - 1)];
  stats::ContingencyTable table;
  table.row_labels = r.models;
  table.col_labels = {"1", "2", "3", "4"};
  for (const auto& row : r.rank_counts) table.counts.emplace_back(row.begin(), row.end());
  try {
    r.chi_square = stats::chi_square(table);
  } catch (const Error&) {
  }

  std::vector<std::vector<double>> groups(r.models.size());
  for (const auto& u : r.units) groups[model_index.at(u.model_id)].push_back(u.correct ? 1.0 : 0.0);
  try {
    r.anova = stats::anova_oneway(groups);
  } catch (const Error&) {
  }

  if (r.annotators >= 2) {
    r.kappa = mean_pairwise_kappa(annotations, r.kappa_pairs);
    r.alpha = ordinal_alpha(annotations, r.units);
  }

  if (references.empty()) return r;

  std::map<std::string, std::vector<std::vector<std::string>>> refs;
  for (const auto& ref : references) refs[ref.item_id].push_back(metrics::tokenize(ref.reference));
  std::map<Unit, const corpus::GenerationRecord*> gen_index;
  for (const auto& g : generations) gen_index[{g.item_id, g.model_id}] = &g;
  for (const auto& u : r.units) {
    const auto g = gen_index.find({u.item_id, u.model_id});
    const auto ref = refs.find(u.item_id);
    if (g == gen_index.end() || ref == refs.end()) continue;
    UnitScores s{u.item_id, u.model_id, 0, 0, 0, 0, stats::logistic_rank_transform(u.mean_rank)};
    const auto cand = metrics::tokenize(g->second->text);
    if (!cand.empty()) {
      s.bleu = guarded([&] { return metrics::bleu_tokens(cand, ref->second); }).value_or(0.0);
      s.rouge1 = best_rouge_n(cand, ref->second, 1);
      s.rouge2 = best_rouge_n(cand, ref->second, 2);
      s.rougeL = best_rouge_l(cand, ref->second);
    }
    r.scores.push_back(std::move(s));
  }
  if (r.scores.empty()) return r;

  r.corr_vars = {"BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "Human"};
  std::vector<std::vector<double>> cols(r.corr_vars.size());
  for (const auto& s : r.scores) {
    cols[0].push_back(s.bleu);
    cols[1].push_back(s.rouge1);
    cols[2].push_back(s.rouge2);
    cols[3].push_back(s.rougeL);
    cols[4].push_back(s.human);
  }
  const std::size_t k = cols.size();
  r.pearson.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const auto v = guarded([&] { return stats::pearson(cols[i], cols[j]); });
      r.pearson[i][j] = r.pearson[j][i] = v;
    }
  }
  const std::size_t human = k - 1;
  for (std::size_t i = 0; i < human; ++i) {
    const auto rho = r.pearson[i][human];
    r.pearson_p.push_back(rho ? guarded([&] { return stats::correlation_p_value(*rho, cols[i].size()); })
                              : std::nullopt);
    r.spearman.push_back(guarded([&] { return stats::spearman(cols[i], cols[human]); }));
  }
  return r;
}

Table accuracy_table(const EvalReport& r) {
  Table t{{"Model", "Items", "Correct", "Accuracy"}, {}};
  for (const auto& a : r.accuracy) {
    t.rows.push_back({a.model_id, std::to_string(a.items), std::to_string(a.correct), fmt(a.accuracy)});
  }
  return t;
}

Table accuracy_by_type_table(const EvalReport& r) {
  Table t;
  t.header.push_back("Type");
  for (const auto& m : r.models) t.header.push_back(m);
  for (std::size_t i = 0; i < r.types.size(); ++i) {
    std::vector<std::string> row{std::string(taxonomy::label(r.types[i]))};
    for (const auto& v : r.type_accuracy[i]) row.push_back(fmt(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table rank_distribution_table(const EvalReport& r) {
  Table t{{"Model", "1", "2", "3", "4"}, {}};
  for (std::size_t m = 0; m < r.models.size(); ++m) {
    std::int64_t total = 0;
    for (auto c : r.rank_counts[m]) total += c;
    std::vector<std::string> row{r.models[m]};
    for (auto c : r.rank_counts[m]) {
      row.push_back(fmt(total ? 100.0 * static_cast<double>(c) / static_cast<double>(total) : 0.0, 2));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table rank_count_table(const EvalReport& r) {
  Table t{{"Model", "1", "2", "3", "4"}, {}};
  for (std::size_t m = 0; m < r.models.size(); ++m) {
    std::vector<std::string> row{r.models[m]};
    for (auto c : r.rank_counts[m]) row.push_back(std::to_string(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table statistics_table(const EvalReport& r) {
  Table t{{"Statistic", "Value", "df", "p"}, {}};
  if (r.chi_square) {
    t.rows.push_back({"Chi-square (model x rank)", fmt(r.chi_square->stat), std::to_string(r.chi_square->df),
                      fmt_g(r.chi_square->p)});
  } else {
    t.rows.push_back({"Chi-square (model x rank)", "n/a", "n/a", "n/a"});
  }
  if (r.anova) {
    t.rows.push_back({"One-way ANOVA F (correctness by model)", fmt(r.anova->f),
                      std::to_string(r.anova->df_between) + "," + std::to_string(r.anova->df_within),
                      fmt_g(r.anova->p)});
  } else {
    t.rows.push_back({"One-way ANOVA F (correctness by model)", "n/a", "n/a", "n/a"});
  }
  t.rows.push_back({"Cohen's kappa (validity, mean over annotator pairs)", fmt(r.kappa), "", ""});
  t.rows.push_back({"Krippendorff's alpha (ordinal ranks)", fmt(r.alpha), "", ""});
  t.rows.push_back({"Annotators", std::to_string(r.annotators), "", ""});
  return t;
}

Table correlation_table(const EvalReport& r) {
  Table t;
  t.header.push_back("");
  for (const auto& v : r.corr_vars) t.header.push_back(v);
  for (std::size_t i = 0; i < r.corr_vars.size(); ++i) {
    std::vector<std::string> row{r.corr_vars[i]};
    for (const auto& v : r.pearson[i]) row.push_back(fmt(v));
    t.rows.push_back(std::move(row));
  }
  if (!r.corr_vars.empty()) {
    std::vector<std::string> p{"Pearson p vs Human"}, s{"Spearman vs Human"};
    for (std::size_t i = 0; i + 1 < r.corr_vars.size(); ++i) {
      p.push_back(r.pearson_p[i] ? fmt_g(*r.pearson_p[i]) : "n/a");
      s.push_back(fmt(r.spearman[i]));
    }
    p.push_back("");
    s.push_back("");
    t.rows.push_back(std::move(p));
    t.rows.push_back(std::move(s));
  }
  return t;
}

Table metric_scores_table(const EvalReport& r) {
  Table t{{"Item", "Model", "BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "Human"}, {}};
  for (const auto& s : r.scores) {
    t.rows.push_back({s.item_id, s.model_id, fmt(s.bleu), fmt(s.rouge1), fmt(s.rouge2), fmt(s.rougeL), fmt(s.human)});
  }
  return t;
}

}  // namespace apt::pipeline
