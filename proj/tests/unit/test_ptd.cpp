#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <numbers>

#include "apt/ptd.hpp"
#include "support/oracles.hpp"

using namespace apt;
using namespace apt::ptd;
using Catch::Matchers::WithinAbs;

namespace {

corpus::SentencePairRecord pair(std::string a, std::string b) { return {"x", std::move(a), std::move(b), {}, true}; }

// Every TypeSet over the first k top10 classes.
std::vector<TypeSet> all_subsets(std::size_t k) {
  std::vector<TypeSet> out;
  for (std::size_t mask = 0; mask < (1u << k); ++mask) {
    TypeSet s;
    for (std::size_t c = 0; c < k; ++c)
      if (mask & (1u << c)) s.insert(taxonomy::top10_order()[c]);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("class weights") {
  const std::vector<std::size_t> even{100, 100}, skew{150, 50}, zero{0, 10}, none{0, 0};
  CHECK(class_weights(even).weights == std::vector<double>{1.0, 1.0});
  const auto w = class_weights(skew).weights;
  CHECK_THAT(w[0], WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(w[1], WithinAbs(2.0, 1e-15));
  const auto z = class_weights(zero).weights;
  CHECK(std::isfinite(z[0]));
  CHECK(z[0] == 5.0);
  const std::vector<std::size_t> extreme{10000, 0};
  CHECK(class_weights(extreme).weights[1] == 50.0);
  const std::vector<std::size_t> tiny{1, 100000};
  CHECK_THAT(class_weights(tiny).weights[1], WithinAbs(100001.0 / 200000.0, 1e-15));
  std::vector<std::size_t> lopsided(19, 1);
  lopsided.push_back(1000000);
  CHECK(class_weights(lopsided).weights[19] == 0.1);
  CHECK_THROWS_AS(class_weights(none), Error);
}

TEST_CASE("weighted bce examples") {
  const std::vector<double> z0{0.0}, z30{30.0};
  const std::vector<int> one{1};
  CHECK_THAT(weighted_bce_loss(z0, one, {{1.0}}), WithinAbs(std::numbers::ln2, 1e-15));
  CHECK_THAT(weighted_bce_loss(z0, one, {{2.0}}), WithinAbs(2 * std::numbers::ln2, 1e-15));
  CHECK(weighted_bce_loss(z30, one, {{1.0}}) < 1e-12);
  const std::vector<int> two{1, 0};
  CHECK_THROWS_AS(weighted_bce_loss(z0, two, {{1.0, 1.0}}), Error);
  const std::vector<int> bad{2};
  CHECK_THROWS_AS(weighted_bce_loss(z0, bad, {{1.0}}), Error);
}

TEST_CASE("unit weights reduce to plain bce and gradients match finite differences") {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z(10), w(10);
    std::vector<int> t(10);
    for (std::size_t c = 0; c < 10; ++c) {
      z[c] = (rng.uniform() - 0.5) * 20;
      t[c] = static_cast<int>(rng.below(2));
      w[c] = 0.1 + rng.uniform() * 5;
    }
    double plain = 0.0;
    for (std::size_t c = 0; c < 10; ++c) {
      const double s = 1.0 / (1.0 + std::exp(-z[c]));
      plain -= t[c] ? std::log(s) : std::log1p(-s);
    }
    CHECK_THAT(weighted_bce_loss(z, t, {std::vector<double>(10, 1.0)}), WithinAbs(plain / 10, 1e-9));
    const ClassWeights cw{w};
    const auto g = weighted_bce_grad(z, t, cw);
    for (std::size_t c = 0; c < 10; ++c) {
      auto zp = z, zm = z;
      zp[c] += 1e-6;
      zm[c] -= 1e-6;
      const double num = (weighted_bce_loss(zp, t, cw) - weighted_bce_loss(zm, t, cw)) / 2e-6;
      CHECK_THAT(g[c], WithinAbs(num, 1e-7));
    }
  }
}

TEST_CASE("decide thresholds at sigmoid >= threshold") {
  const std::vector<double> low(10, -10.0);
  CHECK(decide(low).empty());
  std::vector<double> edge(10, -10.0);
  edge[3] = 0.0;
  CHECK(decide(edge) == TypeSet{taxonomy::top10_order()[3]});
  std::vector<double> mixed{2, -2, 2, -2, 2, -2, 2, -2, 2, -2};
  const auto s = decide(mixed);
  CHECK(s.size() == 5);
  for (std::size_t c = 0; c < 10; c += 2) CHECK(s.contains(taxonomy::top10_order()[c]));
  const std::vector<double> nine(9, 0.0);
  CHECK_THROWS_AS(decide(nine), Error);
}

TEST_CASE("raising a logit never removes its class") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> z(10);
    for (auto& v : z) v = (rng.uniform() - 0.5) * 6;
    const double th = rng.uniform();
    const auto before = decide(z, th);
    const auto c = rng.below(10);
    z[c] += rng.uniform() * 3;
    const auto after = decide(z, th);
    CHECK(before.is_subset_of(after));
  }
}

TEST_CASE("heuristic detector examples") {
  using PT = taxonomy::ParaphraseType;
  CHECK(heuristic_detect(pair("the cat sat", "the big cat sat")) == TypeSet{PT::AdditionDeletion});
  CHECK(heuristic_detect(pair("hello, world", "hello world")) == TypeSet{PT::PunctuationChanges});
  CHECK(heuristic_detect(pair("john likes mary", "mary likes john")) == TypeSet{PT::ChangeOfOrder});
  CHECK(heuristic_detect(pair("the colour is red", "the color is red")) == TypeSet{PT::SpellingChanges});
  CHECK(heuristic_detect(pair("a b c", "a b c")).empty());
  CHECK(heuristic_detect(pair("john likes mary.", "mary likes john!")) ==
        TypeSet{PT::ChangeOfOrder, PT::PunctuationChanges});
  CHECK(heuristic_detect(pair("The Cat sat", "the cat sat")).empty());
  CHECK(heuristic_classes().size() == 4);
}

TEST_CASE("edit distance") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("same", "same") == 0);
}

TEST_CASE("evaluate_ptd reports perfect scores and keeps f1 inside its interval") {
  const auto& order = taxonomy::top10_order();
  std::vector<TypeSet> gold;
  for (std::size_t i = 0; i < 30; ++i) gold.push_back({order[i % 10], order[(i * 3) % 10]});
  const auto r = evaluate_ptd(gold, gold, 1, {taxonomy::top10(), 200, 0.95});
  CHECK(r.macro_f1 == 1.0);
  for (const auto& c : r.per_class) {
    CHECK(c.f1 == 1.0);
    CHECK(c.ci_lower == 1.0);
    CHECK(c.ci_upper == 1.0);
  }
  SplitMix64 rng(10);
  std::vector<TypeSet> pred = gold;
  for (auto& p : pred)
    if (rng.below(3) == 0) p.insert(order[rng.below(10)]);
  const auto a = evaluate_ptd(pred, gold, 4, {taxonomy::top10(), 300, 0.95});
  const auto b = evaluate_ptd(pred, gold, 4, {taxonomy::top10(), 300, 0.95});
  for (std::size_t c = 0; c < a.per_class.size(); ++c) {
    CHECK(a.per_class[c].ci_lower <= a.per_class[c].f1);
    CHECK(a.per_class[c].f1 <= a.per_class[c].ci_upper);
    CHECK(a.per_class[c].ci_lower == b.per_class[c].ci_lower);
    CHECK(a.per_class[c].ci_upper == b.per_class[c].ci_upper);
  }
  CHECK_THROWS_AS(evaluate_ptd(std::span<const TypeSet>(pred).first(3), gold, 0), Error);
}

TEST_CASE("evaluate_ptd matches a brute-force count on every small instance") {
  // Exhaustive over up to 3 examples with 3 classes and 4 examples with 2 classes.
  auto run = [](std::size_t n, std::size_t k) {
    const auto subsets = all_subsets(k);
    TypeSet classes;
    for (std::size_t c = 0; c < k; ++c) classes.insert(taxonomy::top10_order()[c]);
    const std::size_t s = subsets.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < 2 * n; ++i) total *= s;
    std::size_t mismatches = 0;
    std::vector<TypeSet> pred(n), gold(n);
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t rest = code;
      for (std::size_t i = 0; i < n; ++i) {
        pred[i] = subsets[rest % s];
        rest /= s;
        gold[i] = subsets[rest % s];
        rest /= s;
      }
      const auto r = evaluate_ptd(pred, gold, 0, {classes, 1, 0.95});
      double macro = 0.0, weighted = 0.0, support = 0.0;
      std::size_t defined = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const auto cnt = oracle::confusion(pred, gold, taxonomy::top10_order()[c]);
        const double f = oracle::f1(cnt);
        if (r.per_class[c].f1 != f || r.per_class[c].support != cnt.tp + cnt.fn) ++mismatches;
        if (cnt.tp + cnt.fp + cnt.fn) {
          macro += f;
          ++defined;
        }
        weighted += f * static_cast<double>(cnt.tp + cnt.fn);
        support += static_cast<double>(cnt.tp + cnt.fn);
      }
      if (std::abs(r.macro_f1 - (defined ? macro / static_cast<double>(defined) : 0.0)) > 1e-12) ++mismatches;
      if (std::abs(r.weighted_f1 - (support > 0 ? weighted / support : 0.0)) > 1e-12) ++mismatches;
    }
    return mismatches;
  };
  CHECK(run(1, 3) == 0);
  CHECK(run(2, 3) == 0);
  CHECK(run(3, 3) == 0);
  CHECK(run(4, 2) == 0);
}

TEST_CASE("agreement with humans") {
  using PT = taxonomy::ParaphraseType;
  const std::vector<HumanJudgment> human{{PT::AdditionDeletion, true},
                                         {PT::AdditionDeletion, false},
                                         {PT::AdditionDeletion, true},
                                         {PT::ChangeOfOrder, true},
                                         {PT::ChangeOfOrder, true}};
  const std::vector<TypeSet> agree{{PT::AdditionDeletion}, {}, {PT::AdditionDeletion}, {PT::ChangeOfOrder},
                                   {PT::ChangeOfOrder, PT::Identity}};
  const auto a = agreement_with_humans(agree, human, 0, 50);
  for (const auto& c : a.per_class) CHECK(c.f1 == 1.0);
  const std::vector<TypeSet> empty(5);
  for (const auto& c : agreement_with_humans(empty, human, 0, 50).per_class) CHECK(c.f1 == 0.0);
  // Addition/Deletion: TP 1 (item 0), FP 1 (item 1), FN 1 (item 2). Change of order: TP 1, FN 1.
  const std::vector<TypeSet> mixed{{PT::AdditionDeletion}, {PT::AdditionDeletion}, {}, {PT::ChangeOfOrder}, {}};
  const auto m = agreement_with_humans(mixed, human, 0, 50);
  REQUIRE(m.per_class.size() == 2);
  CHECK_THAT(m.per_class[0].f1, WithinAbs(2.0 / 4.0, 1e-15));
  CHECK_THAT(m.per_class[1].f1, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THROWS_AS(agreement_with_humans(std::span<const TypeSet>(mixed).first(2), human), Error);
}

TEST_CASE("report csv header and formatting") {
  stats::F1Report r;
  r.per_class.push_back({"Addition/Deletion", 0.912345, 0.9, 0.93, 1327, 0, 0, 0});
  CHECK(to_csv(r) == "Class,F1,CI Lower,CI Upper,Support\nAddition/Deletion,0.9123,0.9000,0.9300,1327\n");
}

TEST_CASE("prediction files accept logits or labels") {
  const auto dir = oracle::temp_dir("ptd");
  const auto path = dir / "preds.jsonl";
  std::ofstream(path) << "{\"id\": \"a\", \"logits\": [5, -5, -5, -5, -5, -5, -5, -5, -5, -5]}\n"
                         "{\"id\": 7, \"predicted\": [\"Change of order\"]}\n"
                         "{\"id\": \"b\", \"logits\": [1, 2]}\n"
                         "{\"id\": \"c\"}\n";
  const auto res = load_predictions(path);
  REQUIRE(res.records.size() == 2);
  CHECK(res.errors.size() == 2);
  CHECK(res.records[0].resolve(0.5) == TypeSet{taxonomy::top10_order()[0]});
  CHECK(res.records[1].id == "7");
  CHECK(res.records[1].resolve(0.5) == TypeSet{taxonomy::ParaphraseType::ChangeOfOrder});
}

TEST_CASE("grid search enumerates every point with the last axis fastest") {
  const std::vector<GridAxis> axes{{"lr", {1.0, 2.0}}, {"th", {0.1, 0.2, 0.3}}};
  const auto pts = grid_search(axes, [](const std::map<std::string, double>& v) { return v.at("lr") - v.at("th"); });
  REQUIRE(pts.size() == 6);
  CHECK(pts[1].values.at("th") == 0.2);
  CHECK(pts[1].values.at("lr") == 1.0);
  CHECK(best_point(pts).values.at("lr") == 2.0);
  CHECK(best_point(pts).values.at("th") == 0.1);
}

TEST_CASE("tune_threshold picks the best candidate") {
  const auto& order = taxonomy::top10_order();
  std::vector<std::vector<double>> logits;
  std::vector<TypeSet> gold;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> z(10, -3.0);
    z[static_cast<std::size_t>(i)] = 1.0;  // sigmoid ~0.73
    logits.push_back(z);
    gold.push_back({order[static_cast<std::size_t>(i)]});
  }
  const std::vector<double> candidates{0.9, 0.5, 0.1};
  CHECK(tune_threshold(logits, gold, candidates) == 0.5);
}
