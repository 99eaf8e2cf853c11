#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "chancegram/error.hpp"
#include "chancegram/eval.hpp"

using namespace chancegram;
using doctest::Approx;

namespace {

ScoreRow row(std::string text, std::uint64_t observed, double score) {
  ScoreRow r;
  r.n = 1 + static_cast<int>(std::count(text.begin(), text.end(), ' '));
  r.text = std::move(text);
  r.observed = observed;
  r.expected = 1.0;
  r.scores.fill(score);
  return r;
}

// Ranked list straight from gold flags, top first.
RankedList from_flags(std::initializer_list<bool> flags) {
  RankedList list;
  for (bool g : flags) {
    list.items.push_back({"x", 1, 0.0, g});
    list.gold_count += g ? 1 : 0;
  }
  return list;
}

std::vector<std::string> texts(const RankedList& list) {
  std::vector<std::string> out;
  for (const auto& item : list.items) out.push_back(item.text);
  return out;
}

}  // namespace

TEST_CASE("ranking tie-break policies") {
  std::vector<ScoreRow> rows = {row("c d", 2, 1.0), row("a b", 5, 1.0), row("e f", 9, 3.0), row("b c", 5, 1.0)};
  GoldSet gold = {"a b"};
  CHECK(texts(rank(rows, Measure::MI, gold, TieBreak::Frequency)) ==
        std::vector<std::string>{"e f", "a b", "b c", "c d"});
  CHECK(texts(rank(rows, Measure::MI, gold, TieBreak::Bytes)) ==
        std::vector<std::string>{"e f", "a b", "b c", "c d"});
  CHECK(texts(rank(rows, Measure::MI, gold, TieBreak::ScoreOnly)) ==
        std::vector<std::string>{"e f", "c d", "a b", "b c"});
  auto list = rank(rows, Measure::MI, gold);
  CHECK(list.gold_count == 1);
  CHECK(list.items[1].gold);
  CHECK(parse_tie_break("score-only") == TieBreak::ScoreOnly);
  CHECK_THROWS_AS(parse_tie_break("random"), EvalError);
}

TEST_CASE("ranking errors") {
  std::vector<ScoreRow> none;
  CHECK_THROWS_AS(rank(none, Measure::F, {}), EvalError);
  std::vector<ScoreRow> rows = {row("a b", 3, 1.0)};
  CHECK_THROWS_AS(rank(rows, Measure::F, {"q r"}), EvalError);
}

TEST_CASE("PR curve starts at the first non-gold item") {
  auto curve = pr_curve(from_flags({true, true, false, true}));
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].recall == Approx(2.0 / 3));
  CHECK(curve[0].precision == Approx(2.0 / 3));
  CHECK(curve[1].recall == Approx(1.0));
  CHECK(curve[1].precision == Approx(0.75));

  auto all_gold = pr_curve(from_flags({true, true}));
  REQUIRE(all_gold.size() == 1);
  CHECK(all_gold[0].recall == 1.0);
  CHECK(all_gold[0].precision == 1.0);
  CHECK_THROWS_AS(pr_curve(from_flags({false, false})), EvalError);
}

TEST_CASE("downsampling keeps the ends") {
  std::vector<PrPoint> curve;
  for (int i = 0; i < 5000; ++i) curve.push_back({i / 4999.0, 1.0 - i / 9999.0});
  auto thin = downsample_curve(curve, kMaxPrPoints);
  CHECK(thin.size() == kMaxPrPoints);
  CHECK(thin.front().recall == curve.front().recall);
  CHECK(thin.back().recall == curve.back().recall);
  for (std::size_t i = 1; i < thin.size(); ++i) CHECK(thin[i].recall > thin[i - 1].recall);
  CHECK(downsample_curve(std::span(curve).first(10), kMaxPrPoints).size() == 10);
}

TEST_CASE("average precision examples") {
  // Gold at ranks 1, 2 and 5 of 5: (1 + 1 + 3/5) / 3.
  CHECK(average_precision(from_flags({true, true, false, false, true})) == Approx(2.6 / 3));
  // Gold at ranks 1 and 3 of 4: (1 + 2/3) / 2.
  CHECK(average_precision(from_flags({true, false, true, false})) == Approx(5.0 / 6));
  CHECK(average_precision(from_flags({true, true, false})) == 1.0);
  CHECK(average_precision(from_flags({false, true})) == 0.5);
}

TEST_CASE("baseline and chance correction") {
  CHECK(baseline_ap(14, 50) == Approx(0.28));
  CHECK(chance_corrected_ap(0.28, 0.28) == Approx(0.0));
  CHECK(chance_corrected_ap(1.0, 0.28) == Approx(1.0));
  CHECK(chance_corrected_ap(0.64, 0.28) == Approx(0.5));
  CHECK_THROWS_AS(chance_corrected_ap(1.0, 1.0), EvalError);
  CHECK_THROWS_AS(baseline_ap(0, 10), EvalError);
  CHECK_THROWS_AS(baseline_ap(3, 0), EvalError);
}

TEST_CASE("first rejection recall") {
  CHECK(first_reject_recall(from_flags({true, true, false, true})) == Approx(2.0 / 3));
  CHECK(first_reject_recall(from_flags({false, true})) == 0.0);
  CHECK(first_reject_recall(from_flags({true, true})) == 1.0);
}

TEST_CASE("AP is invariant under strictly increasing transforms of the score") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoreRow> rows, transformed;
    GoldSet gold;
    for (int i = 0; i < 60; ++i) {
      const std::string text = "w" + std::to_string(i) + " x";
      const double s = std::round(u(gen) * 4) / 4;  // coarse grid, so ties occur
      const auto o = 1 + gen() % 5;
      rows.push_back(row(text, o, s));
      transformed.push_back(row(text, o, std::exp(2 * s) - 7));
      if (gen() % 3 == 0) gold.insert(text);
    }
    if (gold.empty()) continue;
    for (TieBreak tb : {TieBreak::Frequency, TieBreak::Bytes, TieBreak::ScoreOnly})
      CHECK(average_precision(rank(rows, Measure::Z, gold, tb)) ==
            average_precision(rank(transformed, Measure::Z, gold, tb)));
  }
}

TEST_CASE("AP of a random ranking matches its exact expectation") {
  // E[AP] = (H_n + (n - H_n)(g - 1)/(n - 1)) / n for g gold among n.
  const std::size_t n = 200, g = 60;
  double harmonic = 0.0;
  for (std::size_t k = 1; k <= n; ++k) harmonic += 1.0 / static_cast<double>(k);
  const double expected =
      (harmonic + (n - harmonic) * static_cast<double>(g - 1) / static_cast<double>(n - 1)) / n;

  std::mt19937_64 gen(3);
  std::vector<bool> flags(n, false);
  std::fill_n(flags.begin(), g, true);
  const int trials = 2000;
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::shuffle(flags.begin(), flags.end(), gen);
    RankedList list;
    for (bool f : flags) list.items.push_back({"x", 1, 0.0, f});
    list.gold_count = g;
    const double ap = average_precision(list);
    sum += ap;
    sum_sq += ap * ap;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  CHECK(std::abs(mean - expected) <= 3 * se);
}

TEST_CASE("evaluate builds per-length sections") {
  std::vector<ScoreRow> scores = {row("a b", 5, 4.0), row("b c", 4, 3.0), row("c d", 3, 1.0),
                                  row("a b c", 3, 2.0), row("b c d", 3, 1.0),
                                  row("x y z w", 3, 1.0)};
  auto sig = [](std::string text, bool s) {
    SignificanceRow r;
    r.pvalue.text = std::move(text);
    r.significant = s;
    return r;
  };
  std::vector<SignificanceRow> decisions = {sig("a b", true), sig("b c", false), sig("c d", true),
                                            sig("a b c", true), sig("b c d", true),
                                            sig("x y z w", false)};
  auto report = evaluate(scores, decisions);
  REQUIRE(report.lengths.size() == 3);

  const auto& two = report.lengths[0];
  CHECK(two.n == 2);
  CHECK(two.types == 3);
  CHECK(two.significant == 2);
  CHECK(*two.baseline == Approx(2.0 / 3));
  REQUIRE(two.measures.size() == kAllMeasures.size());
  CHECK(two.measures[0].ap == Approx((1.0 + 2.0 / 3) / 2));
  CHECK(*two.measures[0].ccap == Approx(((1.0 + 2.0 / 3) / 2 - 2.0 / 3) / (1.0 / 3)));
  CHECK(two.measures[0].first_reject_recall == Approx(0.5));

  const auto& three = report.lengths[1];
  CHECK(*three.baseline == 1.0);
  CHECK_FALSE(three.measures[0].ccap.has_value());
  CHECK_FALSE(three.note.empty());

  const auto& four = report.lengths[2];
  CHECK(four.significant == 0);
  CHECK(four.measures.empty());
  CHECK_FALSE(four.note.empty());

  auto json = nlohmann::json::parse(report_json(report));
  CHECK(json["lengths"]["2"]["measures"]["simple_ll"]["ap"].get<double>() == Approx(5.0 / 6));
  CHECK(json["lengths"]["3"]["measures"]["MI"]["ccap"].is_null());
  CHECK(json["lengths"]["4"]["baseline_ap"].is_null());
  CHECK(json["tie_break"] == "freq");

  std::vector<SignificanceRow> partial(decisions.begin(), decisions.begin() + 2);
  CHECK_THROWS_AS(evaluate(scores, partial), EvalError);
}
